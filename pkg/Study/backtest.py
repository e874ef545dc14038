"""Violation counting on non-overlapping h-period blocks."""
from __future__ import annotations

import numpy as np
from scipy.stats import binom

from Exceptions import PreconditionError


def block_sums(returns, h: int) -> np.ndarray:
    """Sums of floor(n/h) consecutive, non-overlapping blocks; a trailing remainder is dropped."""
    returns = np.asarray(returns, dtype=float)
    if h < 1:
        raise PreconditionError(f"h must be >= 1, got {h}")
    if returns.size < h:
        raise PreconditionError(f"series of length {returns.size} holds no block of length {h}")
    n_blocks = returns.size // h
    return returns[:n_blocks * h].reshape(n_blocks, h).sum(axis=1)


def backtest_violations(returns, quantile_loss, h: int) -> int:
    """Number of blocks whose summed return falls below -quantile_loss.

    `quantile_loss` is a scalar or one loss per block.
    """
    sums = block_sums(returns, h)
    losses = np.asarray(quantile_loss, dtype=float)
    if losses.ndim > 0 and losses.size != sums.size:
        raise PreconditionError(f"{losses.size} quantiles for {sums.size} blocks")
    return int(np.count_nonzero(sums < -losses))


def expected_violations(n: int, h: int, level: float) -> float:
    return (n // h) * (1.0 - level)


def binomial_interval(n_blocks: int, level: float, coverage: float = 0.99, replications: int = 1) -> tuple[float, float]:
    """Interval for the mean violation count over `replications` independent backtests."""
    if n_blocks < 1 or replications < 1:
        raise PreconditionError("need at least one block and one replication")
    low, high = binom.interval(coverage, n_blocks * replications, 1.0 - level)
    return float(low) / replications, float(high) / replications


def violation_rate_consistent(mean_violations: float, n_blocks: int, level: float, coverage: float = 0.99,
                              replications: int = 1) -> bool:
    low, high = binomial_interval(n_blocks, level, coverage, replications)
    return low <= mean_violations <= high
