"""Conditional tail probability and quantile measures.

Standardized estimators on the residual tail (T residuals, m tail points,
threshold Z_(m+1)):

    P(Z > z) = (Z_(m+1) / z)^(1/gamma) * m/T        z >= Z_(m+1)
    Q(p)     = Z_(m+1) * (m / (T p))^gamma          p <= m/T

Multi-period values multiply the standardized estimate by q = h^(1/alpha)
before the one-step forecast (mu, sigma) is applied. Lower-tail results are
loss magnitudes: positive numbers for losses.
"""
from __future__ import annotations

import logging
import math
from collections.abc import Iterable

import numpy as np
from scipy.special import ndtr, ndtri

from Domain.RiskDomain import Forecast, RiskEstimate, ScalingFactor, TailRiskModel, TailSample
from Enums import RiskKind, RiskMethod, TailSide
from Exceptions import PreconditionError, ScalingInapplicableError

RELATIVE_SLACK = 1e-12


def tail_probability_std(model: TailRiskModel, z_p: float) -> float:
    if z_p < model.z_threshold:
        raise PreconditionError(f"inside-sample probability requested (z = {z_p:.4f} below the tail threshold "
                                f"{model.z_threshold:.4f}); use empirical frequency")
    return (model.z_threshold / z_p) ** (1.0 / model.tail.gamma) * model.tail_fraction


def tail_quantile_std(model: TailRiskModel, p: float) -> float:
    if not 0.0 < p <= model.tail_fraction * (1.0 + RELATIVE_SLACK):
        raise PreconditionError(f"quantile inside empirical range (p = {p} exceeds m/T = {model.tail_fraction:.6f})")
    return model.z_threshold * (model.tail_fraction / p) ** model.tail.gamma


def empirical_exceedance(sample: TailSample, z: float) -> float:
    """Share of all T residuals whose tail magnitude exceeds z."""
    return int(np.count_nonzero(sample.values > z)) / sample.n_total


def empirical_quantile(sample: TailSample, p: float) -> float:
    """Order statistic Z_(k+1) with k = floor(pT); equals the EVT quantile at p = m/T."""
    if not 0.0 < p < 1.0:
        raise PreconditionError(f"p must lie in (0, 1), got {p}")
    k = math.floor(p * sample.n_total + 1e-9)
    if k >= len(sample):
        raise PreconditionError(f"p = {p} lies beyond the {sample.side.value} tail sample")
    return float(sample.values[k])


def scaling_factor(h: int, alpha: float) -> ScalingFactor:
    """q = h^(1/alpha); the alpha-root law needs a finite variance."""
    if h < 1:
        raise PreconditionError(f"horizon must be >= 1, got {h}")
    if alpha <= 2.0:
        raise ScalingInapplicableError(alpha)
    return ScalingFactor(h=int(h), alpha=float(alpha), q=float(h) ** (1.0 / alpha))


def _scaling(h: int, alpha: float) -> ScalingFactor:
    if h == 1:
        return ScalingFactor(h=1, alpha=float(alpha), q=1.0)
    return scaling_factor(h, alpha)


def _signed_mu(forecast: Forecast, tail_side: TailSide) -> float:
    return -forecast.mu_next if TailSide(tail_side) == TailSide.LOWER else forecast.mu_next


def conditional_quantile(forecast: Forecast, model: TailRiskModel, p: float, h: int = 1,
                         tail_side: TailSide = TailSide.LOWER, sample: TailSample | None = None) -> RiskEstimate:
    """Loss (lower) or level (upper) exceeded with probability p over h periods.

    When p lies inside the empirical range and the tail `sample` is given, the
    empirical order statistic replaces the extrapolated quantile.
    """
    scaling = _scaling(h, model.tail.alpha)
    in_sample = False
    if sample is not None and p > model.tail_fraction * (1.0 + RELATIVE_SLACK):
        standardized = empirical_quantile(sample, p)
        in_sample = True
    else:
        standardized = tail_quantile_std(model, p)
    value = _signed_mu(forecast, tail_side) + forecast.sigma_next * scaling.q * standardized
    return RiskEstimate(value=float(value), kind=RiskKind.QUANTILE, horizon=int(h), method=RiskMethod.EVT,
                        tail_side=tail_side, level=float(p), mu_next=forecast.mu_next,
                        sigma_next=forecast.sigma_next, scaling=scaling.q, in_sample=in_sample)


def conditional_probability(forecast: Forecast, model: TailRiskModel, x_threshold: float, h: int = 1,
                            tail_side: TailSide = TailSide.LOWER, sample: TailSample | None = None) -> RiskEstimate:
    """Probability that the h-period loss (lower) or gain (upper) exceeds x_threshold, capped at 1."""
    scaling = _scaling(h, model.tail.alpha)
    z = (x_threshold - _signed_mu(forecast, tail_side)) / forecast.sigma_next
    in_sample = False
    if sample is not None and z < model.z_threshold:
        standardized = empirical_exceedance(sample, z)
        in_sample = True
    else:
        standardized = tail_probability_std(model, z)
    value = scaling.q * standardized
    capped = value > 1.0
    if capped:
        logging.warning("Probability for threshold %s at h=%d capped at 1 (raw value %.4f)", x_threshold, h, value)
        value = 1.0
    return RiskEstimate(value=float(value), kind=RiskKind.PROBABILITY, horizon=int(h), method=RiskMethod.EVT,
                        tail_side=tail_side, level=float(x_threshold), mu_next=forecast.mu_next,
                        sigma_next=forecast.sigma_next, scaling=scaling.q, capped=capped, in_sample=in_sample)


def gaussian_quantile(forecast: Forecast, p: float, h: int = 1, tail_side: TailSide = TailSide.LOWER) -> RiskEstimate:
    """Conditional-normal benchmark, sqrt(h) scaling: -+mu + sigma sqrt(h) Phi^-1(1 - p)."""
    if not 0.0 < p < 1.0:
        raise PreconditionError(f"p must lie in (0, 1), got {p}")
    if h < 1:
        raise PreconditionError(f"horizon must be >= 1, got {h}")
    root_h = math.sqrt(h)
    value = _signed_mu(forecast, tail_side) + forecast.sigma_next * root_h * float(ndtri(1.0 - p))
    return RiskEstimate(value=float(value), kind=RiskKind.QUANTILE, horizon=int(h), method=RiskMethod.GAUSSIAN,
                        tail_side=tail_side, level=float(p), mu_next=forecast.mu_next,
                        sigma_next=forecast.sigma_next, scaling=root_h)


def gaussian_probability(forecast: Forecast, x_threshold: float, h: int = 1,
                         tail_side: TailSide = TailSide.LOWER) -> RiskEstimate:
    if h < 1:
        raise PreconditionError(f"horizon must be >= 1, got {h}")
    root_h = math.sqrt(h)
    argument = (x_threshold - _signed_mu(forecast, tail_side)) / (forecast.sigma_next * root_h)
    return RiskEstimate(value=float(ndtr(-argument)), kind=RiskKind.PROBABILITY, horizon=int(h),
                        method=RiskMethod.GAUSSIAN, tail_side=tail_side, level=float(x_threshold),
                        mu_next=forecast.mu_next, sigma_next=forecast.sigma_next, scaling=root_h)


def risk_report(forecast: Forecast, model: TailRiskModel, levels: Iterable[float], thresholds: Iterable[float],
                horizons: Iterable[int], benchmark: bool = True, tail_side: TailSide = TailSide.LOWER,
                sample: TailSample | None = None) -> list[RiskEstimate]:
    """Probability rows (per threshold) then quantile rows (per tail probability), every horizon.

    Each EVT row is followed by its Gaussian benchmark when `benchmark` is set.
    """
    horizons = list(horizons)
    if any(h > 1 for h in horizons) and model.tail.alpha <= 2.0:
        raise ScalingInapplicableError(model.tail.alpha)
    rows: list[RiskEstimate] = []
    for x in thresholds:
        rows.extend(conditional_probability(forecast, model, x, h, tail_side, sample) for h in horizons)
        if benchmark:
            rows.extend(gaussian_probability(forecast, x, h, tail_side) for h in horizons)
    for p in levels:
        rows.extend(conditional_quantile(forecast, model, p, h, tail_side, sample) for h in horizons)
        if benchmark:
            rows.extend(gaussian_quantile(forecast, p, h, tail_side) for h in horizons)
    return rows


def report_table(estimates: Iterable[RiskEstimate]) -> list[dict[str, object]]:
    """Lay estimates out with one row per (measure, method) and one column per horizon."""
    rows: dict[tuple, dict[str, object]] = {}
    for estimate in estimates:
        key = (estimate.kind, estimate.level, estimate.method)
        row = rows.setdefault(key, {'measure': estimate.label, 'method': estimate.method.value})
        row[f"h={estimate.horizon}"] = estimate.value
    return list(rows.values())
