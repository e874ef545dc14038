import math

import numpy as np
import pytest
from scipy.special import ndtri

from Domain.RiskDomain import Forecast, TailEstimate, TailRiskModel, TailSample
from Enums import RiskKind, RiskMethod, TailMethod, TailSide
from Exceptions import PreconditionError, ScalingInapplicableError
from Risk.risk_measures import (conditional_probability, conditional_quantile, empirical_exceedance,
                                empirical_quantile, gaussian_probability, gaussian_quantile, report_table,
                                risk_report, scaling_factor, tail_probability_std, tail_quantile_std)
from Tail.hill import downside_tail, hill

UNIT = Forecast(mu_next=0.0, sigma_next=1.0)


def _model(gamma: float, m: int = 100, n_total: int = 2000, threshold: float = 2.5) -> TailRiskModel:
    estimate = TailEstimate(gamma=gamma, alpha=1.0 / gamma, m=m, stderr=gamma / math.sqrt(m),
                            method=TailMethod.HUISMAN, threshold=threshold, n_total=n_total)
    return TailRiskModel.from_estimate(estimate)


def _residual_tail(seed: int = 1) -> tuple[TailSample, TailRiskModel]:
    z = np.random.default_rng(seed).standard_t(4, 2000) * math.sqrt(0.5)
    sample = downside_tail(z)
    return sample, TailRiskModel.from_estimate(hill(sample, 100))


def test_tail_probability_example():
    assert tail_probability_std(_model(0.5), 5.0) == pytest.approx(0.0125, rel=1e-12)


def test_tail_probability_at_the_threshold_is_the_tail_fraction():
    assert tail_probability_std(_model(0.5), 2.5) == pytest.approx(0.05, rel=1e-12)


def test_tail_probability_inside_the_sample_is_refused():
    with pytest.raises(PreconditionError, match="empirical"):
        tail_probability_std(_model(0.5), 2.0)


def test_tail_quantile_example():
    assert tail_quantile_std(_model(0.25), 0.01) == pytest.approx(3.7384, abs=1e-4)


def test_tail_quantile_at_the_tail_fraction_is_the_threshold():
    assert tail_quantile_std(_model(0.25), 0.05) == pytest.approx(2.5, rel=1e-12)


def test_tail_quantile_inside_the_sample_is_refused():
    with pytest.raises(PreconditionError):
        tail_quantile_std(_model(0.25), 0.06)


def test_quantile_and_probability_invert_each_other():
    rng = np.random.default_rng(77)
    for _ in range(10_000):
        n_total = int(rng.integers(500, 5000))
        m = int(rng.integers(10, n_total // 4))
        model = _model(float(rng.uniform(0.1, 1.0)), m=m, n_total=n_total, threshold=float(rng.uniform(0.5, 4.0)))
        p = float(rng.uniform(1e-5, 1.0)) * model.tail_fraction

        assert tail_probability_std(model, tail_quantile_std(model, p)) == pytest.approx(p, rel=1e-10)


def test_tail_measures_are_monotone():
    model = _model(0.3)
    z = np.linspace(2.5, 20.0, 50)
    p = np.linspace(0.05, 0.0001, 50)

    probabilities = [tail_probability_std(model, v) for v in z]
    quantiles = [tail_quantile_std(model, v) for v in p]

    assert np.all(np.diff(probabilities) < 0.0)
    assert np.all(np.diff(quantiles) > 0.0)


def test_scaling_factor_one_period():
    assert scaling_factor(1, 3.0).q == 1.0


def test_scaling_factor_five_periods():
    assert scaling_factor(5, 3.735).q == pytest.approx(1.5385, abs=5e-4)


def test_scaling_refused_without_finite_variance():
    with pytest.raises(ScalingInapplicableError, match="1.8"):
        scaling_factor(2, 1.8)
    with pytest.raises(ScalingInapplicableError):
        scaling_factor(2, 2.0)


def test_alpha_root_scaling_is_below_square_root():
    for alpha in (2.5, 3.0, 4.0, 6.0):
        for h in range(2, 11):
            assert scaling_factor(h, alpha).q < math.sqrt(h)


def test_conditional_quantile_scales_with_the_alpha_root():
    forecast = Forecast(mu_next=0.04, sigma_next=1.3)
    model = _model(0.25)

    one = conditional_quantile(forecast, model, 0.01)
    five = conditional_quantile(forecast, model, 0.01, h=5)

    assert one.value == pytest.approx(-0.04 + 1.3 * tail_quantile_std(model, 0.01), rel=1e-12)
    assert (five.value + 0.04) / (one.value + 0.04) == pytest.approx(5.0 ** 0.25, rel=1e-9)
    assert five.scaling == pytest.approx(5.0 ** 0.25)
    assert one.label == 'Q99'


def test_upper_tail_quantile_adds_the_mean():
    forecast = Forecast(mu_next=0.04, sigma_next=1.3)

    upper = conditional_quantile(forecast, _model(0.25), 0.01, tail_side=TailSide.UPPER)

    assert upper.value == pytest.approx(0.04 + 1.3 * tail_quantile_std(_model(0.25), 0.01), rel=1e-12)


def test_conditional_probability_at_the_threshold():
    forecast = Forecast(mu_next=0.5, sigma_next=2.0)
    model = _model(0.5)

    lower = conditional_probability(forecast, model, 2.5 * 2.0 - 0.5)
    upper = conditional_probability(forecast, model, 2.5 * 2.0 + 0.5, tail_side=TailSide.UPPER)

    assert lower.value == pytest.approx(0.05, rel=1e-12)
    assert upper.value == pytest.approx(0.05, rel=1e-12)
    assert lower.label == 'P4.5'


def test_probability_is_capped_at_one():
    model = _model(1.0 / 2.1, m=900, n_total=2000, threshold=1.0)

    estimate = conditional_probability(UNIT, model, 1.0, h=100)

    assert estimate.value == 1.0
    assert estimate.capped


def test_in_sample_quantile_uses_the_order_statistic():
    sample, model = _residual_tail()

    estimate = conditional_quantile(UNIT, model, 0.1, sample=sample)

    assert estimate.in_sample
    assert estimate.value == sample.values[200]
    with pytest.raises(PreconditionError):
        conditional_quantile(UNIT, model, 0.1)


def test_empirical_and_extrapolated_quantiles_meet_at_the_tail_fraction():
    sample, model = _residual_tail()

    assert empirical_quantile(sample, model.tail_fraction) == pytest.approx(tail_quantile_std(model, 0.05))


def test_in_sample_probability_uses_the_observed_frequency():
    sample, model = _residual_tail()
    z = 0.5 * model.z_threshold

    estimate = conditional_probability(UNIT, model, z, sample=sample)

    assert estimate.in_sample
    assert estimate.value == empirical_exceedance(sample, z)
    assert estimate.value > model.tail_fraction


def test_gaussian_probability_two_sigma():
    assert gaussian_probability(UNIT, 2.0).value == pytest.approx(0.02275, abs=1e-5)


def test_gaussian_probability_at_the_mean_is_one_half():
    forecast = Forecast(mu_next=0.3, sigma_next=1.1)

    assert gaussian_probability(forecast, 0.3, tail_side=TailSide.UPPER).value == pytest.approx(0.5)
    assert gaussian_probability(forecast, -0.3).value == pytest.approx(0.5)


def test_gaussian_probability_grows_with_the_horizon():
    values = [gaussian_probability(UNIT, 3.0, h).value for h in range(1, 11)]

    assert np.all(np.diff(values) >= 0.0)


def test_gaussian_quantile_median_is_the_mean():
    assert gaussian_quantile(Forecast(mu_next=0.2, sigma_next=1.0), 0.5).value == pytest.approx(-0.2)


@pytest.mark.parametrize("single, p, expected", [
    (2.47, 0.05, {2: 3.49, 5: 5.52}),
    (4.12, 0.005, {2: 5.83, 5: 9.22}),
])
def test_gaussian_quantile_square_root_scaling(single, p, expected):
    forecast = Forecast(mu_next=0.0, sigma_next=single / float(ndtri(1.0 - p)))

    assert gaussian_quantile(forecast, p).value == pytest.approx(single, rel=1e-12)
    for h, value in expected.items():
        assert gaussian_quantile(forecast, p, h).value == pytest.approx(value, abs=0.011)


def test_alpha_root_scaling_matches_reference_multi_period_table():
    # alpha implied by the five-day 95% quantile
    alpha = math.log(5.0) / math.log(3.92 / 2.55)
    table = {
        'P5': (0.68, {2: 0.82, 4: 0.98, 5: 1.04}),
        'P2': (8.84, {2: 10.63, 4: 12.79, 5: 13.58}),
        'Q95': (2.55, {2: 3.07, 4: 3.69, 5: 3.92}),
        'Q99.5': (5.65, {2: 6.79, 4: 8.17, 5: 8.67}),
    }

    for single, multi in table.values():
        for h, reference in multi.items():
            assert single * scaling_factor(h, alpha).q == pytest.approx(reference, abs=0.02)


def test_risk_report_layout():
    sample, model = _residual_tail()
    forecast = Forecast(mu_next=0.05, sigma_next=1.2)

    rows = risk_report(forecast, model, [0.05, 0.005], [5.0, 2.0], [1, 2, 4, 5], sample=sample)
    table = report_table(rows)

    assert len(rows) == 32
    assert [r.kind for r in rows[:16]] == [RiskKind.PROBABILITY] * 16
    assert [r.method for r in rows[:8]] == [RiskMethod.EVT] * 4 + [RiskMethod.GAUSSIAN] * 4
    assert [(r['measure'], r['method']) for r in table] == [
        ('P5', 'evt'), ('P5', 'gaussian'), ('P2', 'evt'), ('P2', 'gaussian'),
        ('Q95', 'evt'), ('Q95', 'gaussian'), ('Q99.5', 'evt'), ('Q99.5', 'gaussian'),
    ]
    assert set(table[0]) == {'measure', 'method', 'h=1', 'h=2', 'h=4', 'h=5'}


def test_risk_report_evt_exceeds_gaussian_far_in_the_tail():
    sample, model = _residual_tail()

    rows = risk_report(UNIT, model, [0.001], [], [1], sample=sample)

    evt, gaussian = rows
    assert evt.method == RiskMethod.EVT and gaussian.method == RiskMethod.GAUSSIAN
    assert evt.value > gaussian.value


def test_risk_report_without_benchmark():
    sample, model = _residual_tail()

    rows = risk_report(UNIT, model, [0.01], [3.0], [1, 2], benchmark=False, sample=sample)

    assert len(rows) == 4
    assert all(r.method == RiskMethod.EVT for r in rows)


def test_risk_report_refuses_scaling_for_heavy_tails():
    model = _model(0.6)

    with pytest.raises(ScalingInapplicableError):
        risk_report(UNIT, model, [0.01], [], [1, 2])
    assert len(risk_report(UNIT, model, [0.01], [], [1])) == 2
