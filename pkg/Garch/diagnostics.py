"""Ljung-Box portmanteau tests and covariance estimates for a fitted model."""
from __future__ import annotations

import numpy as np
from scipy.stats import chi2

from Domain.RiskDomain import FilterOutput, GarchParams, LjungBoxResult, PARAM_NAMES, ReturnSeries
from Exceptions import DegenerateSampleError, FitError, PreconditionError
from Garch.garch import loglik_terms, initial_variance

DEFAULT_LAGS = 12
MAX_CONDITION = 1e13


def ljung_box(x, lags: int = DEFAULT_LAGS) -> LjungBoxResult:
    """Q = T(T+2) sum_k rho_k² / (T-k), p-value from the chi-square(lags) survival function."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if not 1 <= lags < n:
        raise PreconditionError(f"need 1 <= lags < length, got lags={lags}, length={n}")
    centred = x - x.mean()
    denominator = float(centred @ centred)
    if denominator == 0.0:
        raise DegenerateSampleError("Ljung-Box on a constant sequence")
    k = np.arange(1, lags + 1)
    rho = np.array([centred[j:] @ centred[:-j] for j in k]) / denominator
    statistic = float(n * (n + 2) * np.sum(rho ** 2 / (n - k)))
    pvalue = float(np.clip(chi2.sf(statistic, lags), 0.0, 1.0))
    return LjungBoxResult(statistic=statistic, pvalue=pvalue, lags=lags)


def diagnostics(series: ReturnSeries, filter_output: FilterOutput, lags: int = DEFAULT_LAGS) -> dict[str, LjungBoxResult]:
    """Ljung-Box on the returns, the squared returns and the filtered residuals (plain and squared)."""
    if len(filter_output) != len(series):
        raise PreconditionError("filter output does not belong to this series")
    r = series.values
    z = filter_output.z
    return {
        'R': ljung_box(r, lags),
        'R2': ljung_box(r ** 2, lags),
        'Z': ljung_box(z, lags),
        'Z2': ljung_box(z ** 2, lags),
    }


class _Objective:
    """Per-observation log-likelihood as a function of a subset of the parameters."""

    def __init__(self, params: GarchParams, series: ReturnSeries, names: tuple[str, ...]):
        unknown = set(names) - set(PARAM_NAMES)
        if unknown or not names:
            raise PreconditionError(f"unknown parameter names {sorted(unknown)}; choose from {PARAM_NAMES}")
        if len(series) < 10:
            raise PreconditionError("standard errors need at least 10 observations")
        self.base = params.as_vector()
        self.nu = params.nu
        self.returns = series.values
        self.sigma2_init = initial_variance(series.values)
        if self.sigma2_init <= 0.0:
            raise DegenerateSampleError("constant series: zero variance")
        self.index = [PARAM_NAMES.index(name) for name in names]
        self.theta = self.base[self.index]
        self.steps = 1e-4 * np.maximum(np.abs(self.theta), 1e-2)

    def contributions(self, theta: np.ndarray) -> np.ndarray:
        vector = self.base.copy()
        vector[self.index] = theta
        values = loglik_terms(vector, self.nu, self.returns, self.sigma2_init)
        if not np.all(np.isfinite(values)):
            raise FitError(f"non-finite likelihood while differencing at {vector}")
        return values

    def mean(self, theta: np.ndarray) -> float:
        return float(np.mean(self.contributions(theta)))

    def scores(self) -> np.ndarray:
        """(T-1, k) matrix of per-observation gradients by central differences."""
        columns = []
        for i, step in enumerate(self.steps):
            shift = np.zeros_like(self.theta)
            shift[i] = step
            columns.append((self.contributions(self.theta + shift) - self.contributions(self.theta - shift))
                           / (2.0 * step))
        return np.column_stack(columns)

    def hessian(self) -> np.ndarray:
        k = self.theta.size
        hessian = np.empty((k, k))
        for i in range(k):
            for j in range(i, k):
                ei = np.zeros(k)
                ej = np.zeros(k)
                ei[i] = self.steps[i]
                ej[j] = self.steps[j]
                value = (self.mean(self.theta + ei + ej) - self.mean(self.theta + ei - ej)
                         - self.mean(self.theta - ei + ej) + self.mean(self.theta - ei - ej))
                hessian[i, j] = hessian[j, i] = value / (4.0 * self.steps[i] * self.steps[j])
        return hessian


def _invert(hessian: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(hessian)) or np.linalg.cond(hessian) > MAX_CONDITION:
        raise FitError("singular Hessian; standard errors are not identified at this point")
    try:
        return np.linalg.inv(hessian)
    except np.linalg.LinAlgError as e:
        raise FitError(f"singular Hessian: {e}") from e


def robust_se(params: GarchParams, series: ReturnSeries, names: tuple[str, ...] = PARAM_NAMES) -> dict[str, float]:
    """Bollerslev-Wooldridge sandwich standard errors, H^-1 S H^-1 / n.

    H is the Hessian of the mean log-likelihood and S the mean outer product of the
    per-observation scores. `names` restricts the covariance to a subset of the
    parameters, holding the rest fixed (needed when e.g. alpha1 = beta1 = 0 leaves
    beta1 unidentified).
    """
    objective = _Objective(params, series, names)
    h_inv = _invert(objective.hessian())
    scores = objective.scores()
    n = scores.shape[0]
    outer = scores.T @ scores / n
    covariance = h_inv @ outer @ h_inv / n
    return {name: float(np.sqrt(max(v, 0.0))) for name, v in zip(names, np.diag(covariance))}


def hessian_se(params: GarchParams, series: ReturnSeries, names: tuple[str, ...] = PARAM_NAMES) -> dict[str, float]:
    """Plain inverse-Hessian standard errors, -H^-1 / n."""
    objective = _Objective(params, series, names)
    variances = np.diag(-_invert(objective.hessian())) / (len(series) - 1)
    if np.any(variances <= 0.0):
        raise FitError("Hessian is not negative definite; not at a maximum")
    return {name: float(np.sqrt(v)) for name, v in zip(names, variances)}
