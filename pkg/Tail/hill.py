"""Hill tail-index estimation on standardized residuals.

Order statistics are the descending tail magnitudes Z_(1) >= Z_(2) >= ...;
the Hill estimate at m is

    gamma(m) = (1/m) sum_{j<=m} ln Z_(j) - ln Z_(m+1),   alpha = 1 / gamma.
"""
from __future__ import annotations

import logging
import math

import numpy as np

from Domain.RiskDomain import HillCurve, TailEstimate, TailSample
from Enums import TailChoice, TailMethod, TailSide
from Exceptions import DegenerateSampleError, FitError, PreconditionError

MIN_KAPPA = 10
DEFAULT_KAPPA_FRACTION = 0.1
FRACTIONS = {TailChoice.FRACTION1: 0.01, TailChoice.FRACTION5: 0.05}


def _tail(magnitudes: np.ndarray, n_total: int, side: TailSide) -> TailSample:
    if n_total == 0:
        raise PreconditionError("empty residual sequence")
    exceedances = np.sort(magnitudes[magnitudes > 0.0])[::-1]
    if exceedances.size == 0:
        raise DegenerateSampleError(f"no positive exceedances in the {side.value} tail")
    return TailSample(values=exceedances, n_total=n_total, side=side)


def downside_tail(z) -> TailSample:
    """Negated residuals that are strictly positive, sorted descending."""
    z = np.asarray(z, dtype=float)
    return _tail(-z, z.size, TailSide.LOWER)


def upside_tail(z) -> TailSample:
    z = np.asarray(z, dtype=float)
    return _tail(z, z.size, TailSide.UPPER)


def hill(sample: TailSample, m: int) -> TailEstimate:
    if not 1 <= m <= len(sample) - 1:
        raise PreconditionError(f"m must lie in [1, {len(sample) - 1}], got {m}")
    logs = np.log(sample.values[:m + 1])
    gamma = float(np.mean(logs[:m]) - logs[m])
    if gamma <= 0.0:
        raise DegenerateSampleError(f"top {m + 1} order statistics are all equal; Hill estimate is zero")
    return TailEstimate(gamma=gamma, alpha=1.0 / gamma, m=int(m), stderr=gamma / math.sqrt(m),
                        method=TailMethod.FIXED_FRACTION, threshold=float(sample.values[m]),
                        n_total=sample.n_total)


def hill_at_fraction(sample: TailSample, fraction: float) -> TailEstimate:
    if not 0.0 < fraction < 0.5:
        raise PreconditionError(f"tail fraction must lie in (0, 0.5), got {fraction}")
    # small epsilon so that e.g. 0.07 * 100 lands on 7 and not 6
    m = math.floor(fraction * sample.n_total + 1e-9)
    if m < 1:
        raise PreconditionError(f"fraction {fraction} of {sample.n_total} observations leaves no tail (m = {m})")
    return hill(sample, m)


def hill_curve(sample: TailSample, kappa: int) -> HillCurve:
    if not 1 <= kappa <= len(sample) - 1:
        raise PreconditionError(f"kappa must lie in [1, {len(sample) - 1}], got {kappa}")
    logs = np.log(sample.values[:kappa + 1])
    m = np.arange(1, kappa + 1)
    gamma = np.cumsum(logs[:kappa]) / m - logs[1:kappa + 1]
    return HillCurve(m=m, gamma=gamma)


def hill_regression(m, gamma) -> tuple[float, float]:
    """Weighted least squares of gamma(m) = b0 + b1 m with weight sqrt(m) on observation m."""
    m = np.asarray(m, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    root_weight = m ** 0.25
    design = np.column_stack((np.ones_like(m), m)) * root_weight[:, None]
    coefficients, _, rank, _ = np.linalg.lstsq(design, gamma * root_weight, rcond=None)
    if rank < 2 or not np.all(np.isfinite(coefficients)):
        raise FitError("singular Hill regression")
    return float(coefficients[0]), float(coefficients[1])


def default_kappa(sample: TailSample) -> int:
    """floor(0.1 T), clipped to the tail sample.

    Past about a tenth of the residuals the threshold Z_(m+1) drifts towards zero, the
    Hill curve turns up steeply and the regression intercept goes negative.
    """
    return min(math.floor(DEFAULT_KAPPA_FRACTION * sample.n_total), len(sample) - 1)


def modified_hill(sample: TailSample, kappa: int | None = None) -> TailEstimate:
    """Small-sample corrected Hill estimate (Huisman et al.).

    The intercept b0 of the Hill regression is the tail measure. The reported m is
    the point of the Hill curve closest to b0 (ties go to the larger m), and the
    standard error is b0 / sqrt(m).
    """
    if kappa is None:
        kappa = default_kappa(sample)
    if kappa < MIN_KAPPA:
        raise PreconditionError(f"modified Hill needs kappa >= {MIN_KAPPA}, got {kappa}")
    curve = hill_curve(sample, kappa)
    b0, b1 = hill_regression(curve.m, curve.gamma)
    if b0 <= 0.0:
        raise DegenerateSampleError(f"non-positive regression intercept {b0}")
    distance = np.abs(curve.gamma - b0)
    index = int(np.flatnonzero(distance == distance.min())[-1])
    m = int(curve.m[index])
    logging.debug("Modified Hill: kappa=%d, b0=%.6f, b1=%.3e, m=%d", kappa, b0, b1, m)
    return TailEstimate(gamma=b0, alpha=1.0 / b0, m=m, stderr=b0 / math.sqrt(m), method=TailMethod.HUISMAN,
                        threshold=float(sample.values[m]), n_total=sample.n_total, slope=b1, kappa=int(kappa))


def estimate_tail(sample: TailSample, choice: TailChoice = TailChoice.HUISMAN, kappa: int | None = None) -> TailEstimate:
    choice = TailChoice(choice)
    if choice == TailChoice.HUISMAN:
        return modified_hill(sample, kappa)
    return hill_at_fraction(sample, FRACTIONS[choice])


def hill_curve_table(curve: HillCurve) -> list[dict[str, float]]:
    return [{'m': int(m), 'gamma': float(g)} for m, g in zip(curve.m, curve.gamma)]
