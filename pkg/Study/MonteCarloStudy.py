import logging
import math
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field

import numpy as np

from Domain.RiskDomain import (Forecast, GarchParams, OracleTargets, StudyCell, StudyConfig, StudyReport,
                               TailRiskModel, TailSample)
from Enums import RiskKind, StudyTarget
from Exceptions import RiskToolError, StudyError
from Garch.garch import OptimizerConfig, filter_returns, fit, simulate
from Risk.risk_measures import conditional_quantile, scaling_factor
from Study.backtest import backtest_violations, expected_violations
from Tail.hill import downside_tail, modified_hill

UNIT_FORECAST = Forecast(mu_next=0.0, sigma_next=1.0)


@dataclass
class _Replication:
    index: int
    estimates: dict[tuple, float] = field(default_factory=dict)
    violations: dict[tuple, int] = field(default_factory=dict)
    scaling_refused: bool = False


def _probabilities(model: TailRiskModel, sample: TailSample, z: np.ndarray, q: float) -> np.ndarray:
    """Vectorised q * P(Z > z) with the empirical frequency below the tail threshold, capped at 1."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    ascending = sample.values[::-1]
    empirical = (ascending.size - np.searchsorted(ascending, z, side='right')) / sample.n_total
    with np.errstate(divide='ignore'):
        extrapolated = (model.z_threshold / np.maximum(z, model.z_threshold)) ** (1.0 / model.tail.gamma) \
            * model.tail_fraction
    return np.minimum(1.0, q * np.where(z >= model.z_threshold, extrapolated, empirical))


class MonteCarloStudy:
    """Simulate, filter, estimate the residual tail and backtest the scaled measures, per replication."""

    def __init__(self, config: StudyConfig, oracle: OracleTargets | None = None):
        self.config = config
        self.oracle = oracle
        self.optimizer = OptimizerConfig(compute_se=False)

    def run(self) -> StudyReport:
        config = self.config
        results: dict[int, _Replication] = {}
        failed: list[int] = []
        max_workers = max(1, min(config.replications, config.max_workers))
        logging.info("=== Monte Carlo study: %d replication(s) of n=%d (%s, %s, refit=%s) ===", config.replications,
                     config.n, config.convention.value, config.target.value, config.refit)

        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            futures = {executor.submit(self._replication_worker, r): r for r in range(config.replications)}
            for future in as_completed(futures):
                index = futures[future]
                try:
                    results[index] = future.result()
                    logging.debug("Finished replication %d", index)
                except RiskToolError as e:
                    logging.error("Replication %d (seed %d) excluded: %s", index, config.seed + index, e)
                    failed.append(index)

        n_excluded = len(failed)
        if n_excluded > config.max_exclusion_rate * config.replications or not results:
            raise StudyError(f"{n_excluded} of {config.replications} replications failed "
                             f"(allowed: {config.max_exclusion_rate:.0%})")
        if failed:
            logging.warning("%d replication(s) excluded: %s", n_excluded, sorted(failed))

        report = self._aggregate([results[i] for i in sorted(results)], n_excluded)
        logging.info("✅ Study finished: %d used, %d excluded, %d with alpha <= 2", report.n_used, report.n_excluded,
                     report.scaling_refused)
        return report

    def _aggregate(self, replications: list[_Replication], n_excluded: int) -> StudyReport:
        config = self.config
        estimates = defaultdict(list)
        violations = defaultdict(list)
        for replication in replications:
            for key, value in replication.estimates.items():
                estimates[key].append(value)
            for key, value in replication.violations.items():
                violations[key].append(value)

        cells = []
        for kind, level, h in self._cells():
            key = (kind, level, h)
            values = estimates.get(key, [])
            counts = violations.get(key, [])
            cells.append(StudyCell(
                kind=kind, level=level, horizon=h,
                mean_estimate=math.fsum(values) / len(values) if values else math.nan,
                n_used=len(values),
                mean_violations=math.fsum(counts) / len(counts) if counts else None,
                expected_violations=expected_violations(config.n, h, level) if kind == RiskKind.QUANTILE else None,
                oracle_target=self.oracle.value(kind, level, h) if self.oracle is not None else None,
            ))
        return StudyReport(config=config, cells=tuple(cells), n_used=len(replications), n_excluded=n_excluded,
                           scaling_refused=sum(r.scaling_refused for r in replications))

    def _cells(self) -> list[tuple[RiskKind, float, int]]:
        cells = [(RiskKind.QUANTILE, level, h) for level in self.config.quantile_levels for h in self.config.horizons]
        cells += [(RiskKind.PROBABILITY, x, h) for x in self.config.probability_thresholds
                  for h in self.config.horizons]
        return cells

    def _replication_worker(self, index: int) -> _Replication:
        config = self.config
        series = simulate(config.params, config.n, burn_in=config.burn_in, seed=config.seed + index,
                          convention=config.convention)
        replication = _Replication(index=index)

        if config.target == StudyTarget.RETURNS:
            sample = downside_tail(series.values)
            mu = sigma = None
        else:
            params: GarchParams = config.params
            if config.refit:
                params = fit(series, nu=config.params.nu, config=self.optimizer).params
            filtered = filter_returns(params, series)
            sample = downside_tail(filtered.z)
            mu, sigma = filtered.mu, filtered.sigma

        estimate = modified_hill(sample, config.kappa)
        model = TailRiskModel.from_estimate(estimate)

        for h in config.horizons:
            if h > 1 and estimate.alpha <= 2.0:
                replication.scaling_refused = True
                continue
            q = 1.0 if h == 1 else scaling_factor(h, estimate.alpha).q
            starts = np.arange(config.n // h) * h
            for level in config.quantile_levels:
                standardized = conditional_quantile(UNIT_FORECAST, model, 1.0 - level, h, sample=sample).value
                if mu is None:
                    loss = standardized
                    replication.estimates[(RiskKind.QUANTILE, level, h)] = loss
                else:
                    loss = -mu[starts] + sigma[starts] * standardized
                    replication.estimates[(RiskKind.QUANTILE, level, h)] = float(np.mean(loss))
                replication.violations[(RiskKind.QUANTILE, level, h)] = backtest_violations(series.values, loss, h)
            for x in config.probability_thresholds:
                z = x if mu is None else (x + mu[starts]) / sigma[starts]
                replication.estimates[(RiskKind.PROBABILITY, x, h)] = float(np.mean(_probabilities(model, sample, z, q)))

        if replication.scaling_refused:
            logging.debug("Replication %d: alpha = %.3f <= 2, multi-period cells skipped", index, estimate.alpha)
        return replication


def run_study(config: StudyConfig, oracle: OracleTargets | None = None) -> StudyReport:
    return MonteCarloStudy(config, oracle).run()

