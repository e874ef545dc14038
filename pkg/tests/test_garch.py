import math

import numpy as np
import pytest
from scipy import stats

from Domain.RiskDomain import GarchParams, ReturnSeries
from Enums import Convention
from Exceptions import DegenerateSampleError, PreconditionError
from Garch.garch import filter_returns, fit, forecast, log_likelihood, simulate, simulate_arrays

TRUE_PARAMS = GarchParams(phi=0.0, alpha0=0.1, alpha1=0.15, beta1=0.8)
IID = GarchParams(phi=0.0, alpha0=1.0, alpha1=0.0, beta1=0.0)


def _series(seed: int, n: int = 2000, params: GarchParams = TRUE_PARAMS,
            convention: Convention = Convention.STANDARDIZED_T) -> ReturnSeries:
    return simulate(params, n, seed=seed, convention=convention)


def test_params_must_be_stationary():
    with pytest.raises(PreconditionError, match="alpha1 \\+ beta1"):
        log_likelihood(GarchParams(alpha0=0.1, alpha1=0.4, beta1=0.7), _series(1, 100))


def test_params_need_positive_alpha0():
    with pytest.raises(PreconditionError):
        GarchParams(alpha0=0.0).validate()


def test_likelihood_needs_ten_observations():
    with pytest.raises(PreconditionError):
        log_likelihood(TRUE_PARAMS, ReturnSeries.from_values([0.1, -0.2, 0.3, 0.0, 0.5]))


def test_iid_likelihood_matches_scaled_t_density():
    series = _series(4, 500, IID)
    params = GarchParams(phi=0.0, alpha0=2.0, alpha1=0.0, beta1=0.0)

    value = log_likelihood(params, series)

    scale = math.sqrt(params.alpha0) * math.sqrt((params.nu - 2.0) / params.nu)
    expected = float(np.sum(stats.t.logpdf(series.values[1:], df=params.nu, scale=scale)))
    assert value == pytest.approx(expected, rel=1e-10)


def test_true_parameters_beat_perturbed_on_average():
    perturbed = GarchParams(phi=0.0, alpha0=0.1, alpha1=0.25, beta1=0.7)
    differences = []
    for seed in range(20):
        series = _series(100 + seed)
        differences.append(log_likelihood(TRUE_PARAMS, series) - log_likelihood(perturbed, series))

    assert np.mean(differences) > 0.0


def test_fit_rejects_short_series():
    with pytest.raises(PreconditionError, match="250"):
        fit(_series(2, 200))


def test_fit_rejects_constant_series():
    with pytest.raises(DegenerateSampleError):
        fit(ReturnSeries.from_values([1.0] * 300))


def test_fit_improves_on_every_start():
    series = _series(7)

    result = fit(series)

    assert len(result.start_logliks) == 3
    assert all(result.loglik >= start - 1e-6 for start in result.start_logliks)
    assert result.params.persistence < 1.0
    assert 0.05 <= result.params.alpha1 <= 0.35
    assert 0.55 <= result.params.beta1 <= 0.95
    assert result.n_obs == 2000
    assert all(math.isfinite(se) and se > 0.0 for se in result.robust_se.values())


def test_fit_loglik_is_the_original_scale_likelihood():
    series = _series(9)

    result = fit(series)

    assert result.loglik == pytest.approx(log_likelihood(result.params, series), rel=1e-8)


def test_fit_is_scale_equivariant():
    series = _series(12)

    base = fit(series)
    scaled = fit(series.scaled(4.0))

    assert scaled.params.phi == pytest.approx(base.params.phi, rel=1e-12, abs=1e-15)
    assert scaled.params.alpha1 == pytest.approx(base.params.alpha1, rel=1e-12)
    assert scaled.params.beta1 == pytest.approx(base.params.beta1, rel=1e-12)
    assert scaled.params.alpha0 == pytest.approx(16.0 * base.params.alpha0, rel=1e-12)
    assert scaled.loglik == pytest.approx(base.loglik - 1999 * math.log(4.0), rel=1e-10)


def test_filter_reconstructs_the_returns():
    series = _series(21, 1000)
    params = GarchParams(phi=0.07, alpha0=0.3, alpha1=0.2, beta1=0.5)

    output = filter_returns(params, series)

    np.testing.assert_allclose(output.mu + output.sigma * output.z, series.values, rtol=0.0, atol=1e-12)
    assert np.all(output.sigma > 0.0)


def test_iid_filter_leaves_residuals_unchanged():
    series = _series(22, 300, IID)

    output = filter_returns(IID, series)

    np.testing.assert_array_equal(output.z[1:], series.values[1:])
    assert output.mu[0] == 0.0
    assert output.sigma[0] == pytest.approx(np.std(series.values))


def test_filter_rejects_constant_series():
    with pytest.raises(DegenerateSampleError):
        filter_returns(TRUE_PARAMS, ReturnSeries.from_values([0.5] * 20))


def test_forecast_hand_recursion():
    series = ReturnSeries.from_values([0.5, -1.0, 2.0])
    params = GarchParams(phi=0.1, alpha0=0.2, alpha1=0.1, beta1=0.7)

    result = forecast(params, series, filter_returns(params, series))

    s2 = np.var([0.5, -1.0, 2.0])
    for r in (0.5, -1.0, 2.0):
        s2 = params.alpha0 + params.alpha1 * r ** 2 + params.beta1 * s2
    assert result.mu_next == pytest.approx(0.2, abs=1e-15)
    assert result.sigma_next == pytest.approx(math.sqrt(s2), rel=1e-14)


def test_forecast_iid_volatility_is_alpha0():
    series = _series(23, 100, IID)
    params = GarchParams(phi=0.0, alpha0=2.25, alpha1=0.0, beta1=0.0)

    result = forecast(params, series, filter_returns(params, series))

    assert result.mu_next == 0.0
    assert result.sigma_next == pytest.approx(1.5)


def test_forecast_rejects_foreign_filter_output():
    series = _series(24, 100)
    other = _series(25, 50)

    with pytest.raises(PreconditionError):
        forecast(TRUE_PARAMS, series, filter_returns(TRUE_PARAMS, other))


def test_simulate_is_reproducible():
    a = simulate(TRUE_PARAMS, 500, seed=42)
    b = simulate(TRUE_PARAMS, 500, seed=42)
    c = simulate(TRUE_PARAMS, 500, seed=43)

    np.testing.assert_array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)
    assert len(a) == 500
    assert a.name == 'simulated_std-t'


def test_simulated_variances_follow_the_recursion():
    returns, sigma2 = simulate_arrays(TRUE_PARAMS, 200, burn_in=50, seed=5)

    expected = TRUE_PARAMS.alpha0 + TRUE_PARAMS.alpha1 * returns[:-1] ** 2 + TRUE_PARAMS.beta1 * sigma2[:-1]
    np.testing.assert_allclose(sigma2[1:], expected, rtol=1e-13)


def test_standardized_iid_variance_is_alpha0():
    returns, _ = simulate_arrays(IID, 1_000_000, burn_in=0, seed=31)

    assert np.var(returns) == pytest.approx(1.0, rel=0.05)


def test_raw_t_doubles_the_variance():
    raw, _ = simulate_arrays(IID, 200_000, seed=32, convention=Convention.RAW_T)
    standardized, _ = simulate_arrays(IID, 200_000, seed=32, convention=Convention.STANDARDIZED_T)

    assert 1.8 <= np.var(raw) / np.var(standardized) <= 2.2


def test_raw_t_innovations_with_default_parameters_warn(caplog):
    returns, _ = simulate_arrays(GarchParams(), 100, burn_in=0, seed=1, convention=Convention.RAW_T)

    assert 'infinite variance' in caplog.text
    assert np.all(np.isfinite(returns))


def test_standardized_default_parameters_do_not_warn(caplog):
    simulate_arrays(GarchParams(), 100, burn_in=0, seed=1)

    assert 'infinite variance' not in caplog.text


def test_diverging_simulation_raises():
    with pytest.raises(DegenerateSampleError, match="diverged"):
        simulate_arrays(GarchParams(alpha0=0.1, alpha1=0.9, beta1=0.9), 50_000, seed=2)


def test_simulate_rejects_bad_length():
    with pytest.raises(PreconditionError):
        simulate(TRUE_PARAMS, 0)


@pytest.mark.slow
def test_parameter_recovery():
    inside = 0
    replications = 50
    for seed in range(replications):
        params = fit(_series(1000 + seed)).params
        if 0.08 <= params.alpha1 <= 0.22 and 0.70 <= params.beta1 <= 0.90:
            inside += 1

    assert inside / replications >= 0.9
