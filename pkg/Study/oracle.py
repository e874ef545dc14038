"""Ground-truth targets from one very long simulated path."""
from __future__ import annotations

import logging
from collections.abc import Iterable

import numpy as np

from Domain.RiskDomain import GarchParams, OracleTarget, OracleTargets
from Enums import Convention, RiskKind
from Exceptions import PreconditionError
from Garch.garch import DEFAULT_BURN_IN, simulate_arrays
from Study.backtest import block_sums

MIN_BIG_N = 1_000_000


def oracle_targets(params: GarchParams, convention: Convention, horizons: Iterable[int], levels: Iterable[float],
                   thresholds: Iterable[float], big_n: int = 10_000_000, seed: int | None = None,
                   burn_in: int = DEFAULT_BURN_IN, allow_small: bool = False) -> OracleTargets:
    """Empirical loss quantiles at `levels` and loss exceedance frequencies at `thresholds`.

    Both are taken over the non-overlapping h-block sums of a single path of
    `big_n` returns.
    """
    if big_n < MIN_BIG_N and not allow_small:
        raise PreconditionError(f"oracle needs big_n >= {MIN_BIG_N}, got {big_n}")
    convention = Convention(convention)
    returns, _ = simulate_arrays(params, big_n, burn_in=burn_in, seed=seed, convention=convention)
    logging.info("Oracle path: %d returns (%s), sample sd %.4f", big_n, convention.value, float(np.std(returns)))

    targets = []
    for h in horizons:
        sums = block_sums(returns, h)
        for level in levels:
            loss = -float(np.quantile(sums, 1.0 - level))
            targets.append(OracleTarget(kind=RiskKind.QUANTILE, level=float(level), horizon=int(h), value=loss))
        for x in thresholds:
            frequency = float(np.count_nonzero(sums < -x)) / sums.size
            targets.append(OracleTarget(kind=RiskKind.PROBABILITY, level=float(x), horizon=int(h), value=frequency))
    return OracleTargets(convention=convention, big_n=int(big_n), seed=seed, targets=tuple(targets))
