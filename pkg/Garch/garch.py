"""AR(1)-GARCH(1,1) with standardized Student-t innovations.

    R_t = mu_t + sigma_t Z_t,  mu_t = phi R_{t-1},
    sigma²_t = alpha0 + alpha1 R²_{t-1} + beta1 sigma²_{t-1}

Z_t has unit variance, so sigma_t is the conditional standard deviation. The
recursion starts from mu_1 = 0 and sigma²_1 = the population variance of the
series; the likelihood conditions on the first observation.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit, gammaln, logit

from Domain.RiskDomain import FilterOutput, FitResult, Forecast, GarchParams, PARAM_NAMES, ReturnSeries
from Enums import Convention
from Exceptions import DegenerateSampleError, FitError, LikelihoodError, PreconditionError
from Garch.recursions import mean_path, simulate_path, variance_path

MIN_LIKELIHOOD_LENGTH = 10
MIN_FIT_LENGTH = 250
WARN_FIT_LENGTH = 1000
PERSISTENCE_CAP = 1.0 - 1e-6
BOUNDARY_TOLERANCE = 1e-4
DEFAULT_BURN_IN = 1000
PENALTY = 1e10


@dataclass(frozen=True)
class OptimizerConfig:
    method: str = 'L-BFGS-B'
    maxiter: int = 500
    ftol: float = 1e-9
    # (alpha1, beta1) pairs; phi starts at 0 and alpha0 at var * (1 - alpha1 - beta1)
    starts: tuple[tuple[float, float], ...] = ((0.05, 0.90), (0.10, 0.80), (0.15, 0.60))
    compute_se: bool = True


def _t_log_constant(nu: float) -> float:
    return gammaln((nu + 1.0) / 2.0) - gammaln(nu / 2.0) - 0.5 * math.log(math.pi * (nu - 2.0))


def loglik_terms(vector: np.ndarray, nu: float, returns: np.ndarray, sigma2_init: float) -> np.ndarray:
    """Per-observation log-likelihood terms for t = 2..T (no parameter checks)."""
    phi, alpha0, alpha1, beta1 = vector
    mu = mean_path(phi, returns)
    sigma2 = variance_path(alpha0, alpha1, beta1, returns, sigma2_init)
    with np.errstate(all='ignore'):
        z2 = (returns[1:] - mu[1:]) ** 2 / sigma2[1:]
        return (_t_log_constant(nu) - 0.5 * (nu + 1.0) * np.log1p(z2 / (nu - 2.0))
                - 0.5 * np.log(sigma2[1:]))


def initial_variance(returns: np.ndarray) -> float:
    return float(np.var(returns))


def log_likelihood(params: GarchParams, series: ReturnSeries) -> float:
    params.validate(require_stationary=True)
    if len(series) < MIN_LIKELIHOOD_LENGTH:
        raise PreconditionError(f"log-likelihood needs at least {MIN_LIKELIHOOD_LENGTH} observations, "
                                f"got {len(series)}")
    sigma2_init = initial_variance(series.values)
    if sigma2_init <= 0.0:
        raise DegenerateSampleError("constant series: zero variance")
    value = float(np.sum(loglik_terms(params.as_vector(), params.nu, series.values, sigma2_init)))
    if not math.isfinite(value):
        raise LikelihoodError(f"non-finite log-likelihood at {params}")
    return value


# --- unconstrained parameterisation used by the optimiser ----------------------------------------

def _to_unconstrained(phi: float, alpha0: float, alpha1: float, beta1: float) -> np.ndarray:
    persistence = alpha1 + beta1
    return np.array([phi, math.log(alpha0), logit(persistence / PERSISTENCE_CAP), logit(alpha1 / persistence)])


def _from_unconstrained(theta: np.ndarray) -> np.ndarray:
    phi, log_alpha0, u, v = theta
    persistence = PERSISTENCE_CAP * expit(u)
    share = expit(v)
    return np.array([phi, math.exp(min(log_alpha0, 700.0)), persistence * share, persistence * (1.0 - share)])


def fit(series: ReturnSeries, nu: float = 4.0, config: OptimizerConfig | None = None) -> FitResult:
    """Maximum likelihood for (phi, alpha0, alpha1, beta1) with nu held fixed.

    The series is divided by its standard deviation before optimising and alpha0 is
    mapped back afterwards, so the estimates are exactly scale equivariant.
    """
    config = config or OptimizerConfig()
    n = len(series)
    if n < MIN_FIT_LENGTH:
        raise PreconditionError(f"fitting needs at least {MIN_FIT_LENGTH} observations, got {n}")
    if n < WARN_FIT_LENGTH:
        logging.warning("Fitting %s on only %d observations; estimates will be noisy", series.name, n)
    if nu <= 2.0:
        raise PreconditionError(f"nu must be > 2, got {nu}")

    scale = float(np.std(series.values))
    if scale == 0.0:
        raise DegenerateSampleError("constant series: zero variance")
    x = series.values / scale
    sigma2_init = initial_variance(x)

    def objective(theta: np.ndarray) -> float:
        value = -float(np.mean(loglik_terms(_from_unconstrained(theta), nu, x, sigma2_init)))
        return value if math.isfinite(value) else PENALTY

    best = None
    start_values = []
    for alpha1, beta1 in config.starts:
        theta0 = _to_unconstrained(0.0, 1.0 - alpha1 - beta1, alpha1, beta1)
        start_values.append(-objective(theta0))
        result = minimize(objective, theta0, method=config.method,
                          options={'maxiter': config.maxiter, 'ftol': config.ftol, 'gtol': 1e-8})
        logging.debug("Start (%.2f, %.2f): mean loglik %.8f after %d iterations (%s)",
                      alpha1, beta1, -result.fun, result.nit, result.message)
        if best is None or result.fun < best.fun:
            best = result

    if best.fun >= PENALTY:
        raise FitError(f"no finite likelihood found for {series.name}")

    phi, alpha0, alpha1, beta1 = _from_unconstrained(best.x)
    params = GarchParams(phi=float(phi), alpha0=float(alpha0 * scale ** 2), alpha1=float(alpha1),
                         beta1=float(beta1), nu=float(nu))
    n_terms = n - 1
    # loglik of the original series = loglik of the rescaled one - (T - 1) ln(scale)
    loglik = -best.fun * n_terms - n_terms * math.log(scale)
    start_logliks = tuple(v * n_terms - n_terms * math.log(scale) for v in start_values)

    converged = bool(best.success)
    if not converged:
        logging.warning("Optimiser did not converge for %s after %d iterations: %s", series.name, best.nit,
                        best.message)
    boundary = params.persistence > 1.0 - BOUNDARY_TOLERANCE
    if boundary:
        logging.warning("alpha1 + beta1 = %.6f is at the stationarity boundary", params.persistence)

    robust = {name: math.nan for name in PARAM_NAMES}
    if config.compute_se:
        from Garch.diagnostics import robust_se
        try:
            robust = robust_se(params, series)
        except FitError as e:
            logging.warning("Robust standard errors unavailable: %s", e)

    return FitResult(params=params, loglik=float(loglik), robust_se=robust, converged=converged,
                     iterations=int(best.nit), boundary=bool(boundary), n_obs=n, series_name=series.name,
                     start_logliks=start_logliks)


def filter_returns(params: GarchParams, series: ReturnSeries) -> FilterOutput:
    params.validate(require_stationary=False)
    returns = series.values
    sigma2_init = initial_variance(returns)
    if sigma2_init <= 0.0:
        raise DegenerateSampleError("constant series: zero variance")
    mu = mean_path(params.phi, returns)
    sigma = np.sqrt(variance_path(params.alpha0, params.alpha1, params.beta1, returns, sigma2_init))
    return FilterOutput(mu=mu, sigma=sigma, z=(returns - mu) / sigma)


def forecast(params: GarchParams, series: ReturnSeries, filter_output: FilterOutput) -> Forecast:
    """One step ahead: mu = phi R_T, sigma² = alpha0 + alpha1 R_T² + beta1 sigma_T²."""
    if len(filter_output) != len(series):
        raise PreconditionError("filter output does not belong to this series")
    r_last = float(series.values[-1])
    sigma_last = float(filter_output.sigma[-1])
    sigma2_next = params.alpha0 + params.alpha1 * r_last ** 2 + params.beta1 * sigma_last ** 2
    return Forecast(mu_next=params.phi * r_last, sigma_next=math.sqrt(sigma2_next))


def innovation_variance(nu: float, convention: Convention) -> float:
    """1 for standardized t, nu / (nu - 2) for raw t draws."""
    if Convention(convention) == Convention.STANDARDIZED_T:
        return 1.0
    return nu / (nu - 2.0)


def draw_innovations(rng: np.random.Generator, nu: float, size: int, convention: Convention) -> np.ndarray:
    innovations = rng.standard_t(nu, size=size)
    if Convention(convention) == Convention.STANDARDIZED_T:
        innovations *= math.sqrt((nu - 2.0) / nu)
    return innovations


def simulate_arrays(params: GarchParams, n: int, burn_in: int = DEFAULT_BURN_IN, seed: int | None = None,
                    convention: Convention = Convention.STANDARDIZED_T) -> tuple[np.ndarray, np.ndarray]:
    """Simulated returns and conditional variances after discarding the burn-in."""
    params.validate(require_stationary=False)
    if n < 1 or burn_in < 0:
        raise PreconditionError(f"need n >= 1 and burn_in >= 0, got n={n}, burn_in={burn_in}")
    convention = Convention(convention)
    effective = params.alpha1 * innovation_variance(params.nu, convention) + params.beta1
    if effective >= 1.0:
        logging.warning("alpha1 * Var(innovation) + beta1 = %.4f >= 1 under %s innovations: the simulated "
                        "returns have infinite variance and may diverge", effective, convention.value)
    rng = np.random.default_rng(seed)
    innovations = draw_innovations(rng, params.nu, n + burn_in, convention)
    start = params.unconditional_variance if params.persistence < 1.0 else params.alpha0
    returns, sigma2 = simulate_path(params.phi, params.alpha0, params.alpha1, params.beta1, innovations, start)
    if not np.all(np.isfinite(returns)):
        first = int(np.flatnonzero(~np.isfinite(returns))[0])
        raise DegenerateSampleError(f"simulated {convention.value} path diverged at step {first} "
                                    f"(alpha1 * Var(innovation) + beta1 = {effective:.4f})")
    return returns[burn_in:], sigma2[burn_in:]


def simulate(params: GarchParams, n: int, burn_in: int = DEFAULT_BURN_IN, seed: int | None = None,
             convention: Convention = Convention.STANDARDIZED_T) -> ReturnSeries:
    returns, _ = simulate_arrays(params, n, burn_in=burn_in, seed=seed, convention=convention)
    return ReturnSeries.from_values(returns, name=f"simulated_{Convention(convention).value}")
