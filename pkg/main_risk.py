"""Command-line front end.

    python main_risk.py fit   --input data/synthetic_garch_t.csv --model-out output/model.json
    python main_risk.py risk  --input data/synthetic_garch_t.csv --format json
    python main_risk.py study --quick

Exit codes: 0 success, 2 input error, 3 fit failure, 4 scaling inapplicable
(tail index <= 2), 5 any other domain error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable

from Domain.RiskDomain import PARAM_NAMES, RiskEstimate
from Enums import Convention, ExitCode, OutputFormat, PipelineStep, RiskKind, SeriesFormat, TailChoice, TailSide
from Exceptions import DegenerateSampleError, PreconditionError, RiskToolError
from Garch.garch import simulate
from Risk.risk_measures import report_table
from RiskPipelineController import RiskPipelineController
from Study.MonteCarloStudy import run_study
from Study.backtest import backtest_violations, block_sums, expected_violations
from Study.oracle import oracle_targets
from Tail.hill import hill_curve_table
from utils.report_writers import emit
from utils.series_io import load_series, qq_data, series_table, summary_stats, write_series
from utils.settings import RunConfig, build_run_config, load_settings, resolve_settings_path

Report = tuple[dict[str, list[dict[str, Any]]], Any]


def _study_label(kind: RiskKind, level: float) -> str:
    if kind == RiskKind.QUANTILE:
        return f"Q{round(100.0 * level, 6):g}"
    return f"P{round(level, 6):g}"


def cmd_fit(config: RunConfig) -> Report:
    controller = RiskPipelineController(config).run(until=PipelineStep.FILTER)
    fit_result = controller.fit_result
    stats = summary_stats(controller.series)
    params = [{'parameter': name, 'estimate': float(getattr(fit_result.params, name)),
               'robust_se': fit_result.robust_se.get(name)} for name in PARAM_NAMES]
    params.append({'parameter': 'nu (fixed)', 'estimate': fit_result.params.nu, 'robust_se': None})
    ljung_box = [{'series': key, 'lags': lb.lags, 'statistic': lb.statistic, 'pvalue': lb.pvalue}
                 for key, lb in fit_result.diagnostics.items()]
    fit_info = [{'n_obs': fit_result.n_obs, 'loglik': fit_result.loglik, 'converged': fit_result.converged,
                 'iterations': fit_result.iterations, 'boundary': fit_result.boundary}]
    sheets = {'summary': [stats.asdict()], 'parameters': params, 'fit': fit_info, 'ljung_box': ljung_box}
    return sheets, {'summary': stats.asdict(), 'fit': fit_result.asdict()}


def cmd_filter(config: RunConfig) -> Report:
    controller = RiskPipelineController(config).run(until=PipelineStep.FILTER)
    rows = series_table(controller.series, controller.filter_output)
    theoretical, empirical = qq_data(controller.filter_output.z)
    qq = [{'theoretical': float(t), 'empirical': float(e)} for t, e in zip(theoretical, empirical)]
    forecast = controller.forecast.asdict()
    return {'series': rows, 'qq': qq, 'forecast': [forecast]}, {'series': rows, 'qq': qq, 'forecast': forecast}


def cmd_tail(config: RunConfig) -> Report:
    controller = RiskPipelineController(config).run(until=PipelineStep.TAIL_ESTIMATION)
    rows = [{'estimate': choice.value, **{k: v for k, v in estimate.asdict().items() if k != 'method'}}
            for choice, estimate in controller.tail_estimates.items()]
    sheets = {'tail': rows}
    payload: dict[str, Any] = {'side': controller.sample.side.value, 'n_tail': len(controller.sample),
                               'estimates': rows}
    if controller.hill_curve is not None:
        sheets['hill_curve'] = payload['hill_curve'] = hill_curve_table(controller.hill_curve)
    return sheets, payload


def _estimate_record(estimate: RiskEstimate) -> dict[str, Any]:
    return {'measure': estimate.label, **estimate.asdict()}


def cmd_risk(config: RunConfig) -> Report:
    controller = RiskPipelineController(config).run(until=PipelineStep.RISK_REPORT)
    tail = controller.tail_estimates[config.tail_method]
    payload = {
        'forecast': controller.forecast.asdict(),
        'tail': tail.asdict(),
        'estimates': [_estimate_record(row) for row in controller.risk_rows],
    }
    return {'risk': report_table(controller.risk_rows)}, payload


def cmd_simulate(config: RunConfig) -> Report:
    """Simulate with the study parameters; with --out the returns are written as a date,return CSV."""
    series = simulate(config.study.params, config.n, burn_in=config.burn_in, seed=config.seed,
                      convention=config.convention)
    if config.out is not None:
        write_series(series, config.out)
        logging.info("Wrote %d simulated returns to %s", len(series), config.out)
        written = [{'n': len(series), 'convention': config.convention.value, 'seed': config.seed, 'path': str(config.out)}]
        return {'simulated': written}, written[0]
    rows = series_table(series)
    return {'returns': rows}, {'params': config.study.params.asdict(), 'returns': rows}


def cmd_study(config: RunConfig) -> Report:
    report = run_study(config.study)
    rows = [{'measure': _study_label(cell.kind, cell.level), 'h': cell.horizon, 'mean_estimate': cell.mean_estimate,
             'mean_violations': cell.mean_violations, 'expected_violations': cell.expected_violations,
             'n_used': cell.n_used} for cell in report.cells]
    counts = [{'n_used': report.n_used, 'n_excluded': report.n_excluded, 'scaling_refused': report.scaling_refused}]
    return {'study': rows, 'replications': counts}, report.asdict()


def cmd_backtest(config: RunConfig, quantile: float | None = None) -> Report:
    if quantile is None or quantile <= 0.0:
        raise PreconditionError("backtest needs a positive --quantile loss")
    if config.input is None:
        raise PreconditionError("backtest needs --input")
    series = load_series(config.input, config.input_format, column=config.column,
                         date_column=config.date_column, delimiter=config.delimiter)
    rows = []
    for h in config.horizons:
        row: dict[str, Any] = {'h': h, 'blocks': int(block_sums(series.values, h).size),
                               'violations': backtest_violations(series.values, quantile, h)}
        for level in config.levels:
            row[f"expected_{_study_label(RiskKind.QUANTILE, level)}"] = expected_violations(len(series), h, level)
        rows.append(row)
    return {'backtest': rows}, {'quantile': quantile, 'n': len(series), 'rows': rows}


def cmd_oracle(config: RunConfig, conventions: tuple[Convention, ...] = tuple(Convention)) -> Report:
    study = config.study
    rows = []
    payload = {}
    for convention in conventions:
        try:
            targets = oracle_targets(study.params, convention, study.horizons, study.quantile_levels,
                                     study.probability_thresholds, big_n=config.big_n, seed=config.seed,
                                     burn_in=config.burn_in)
        except DegenerateSampleError as e:
            if len(conventions) == 1:
                raise
            logging.error("No %s targets: %s", convention.value, e)
            payload[convention.value] = {'convention': convention.value, 'error': str(e)}
            continue
        payload[convention.value] = targets.asdict()
        rows.extend({'convention': convention.value, 'measure': _study_label(t.kind, t.level), 'h': t.horizon,
                     'target': t.value} for t in targets.targets)
    return {'oracle': rows}, payload


COMMANDS: dict[str, Callable[..., Report]] = {
    'fit': cmd_fit, 'filter': cmd_filter, 'tail': cmd_tail, 'risk': cmd_risk, 'simulate': cmd_simulate,
    'study': cmd_study, 'backtest': cmd_backtest, 'oracle': cmd_oracle,
}


def _number_list(cast: Callable[[str], Any]) -> Callable[[str], tuple]:
    def parse(text: str) -> tuple:
        try:
            return tuple(cast(part) for part in text.split(',') if part.strip())
        except ValueError as e:
            raise argparse.ArgumentTypeError(f"expected a comma separated list, got '{text}'") from e
    return parse


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="JSON settings file (default: $TAILSCALE_RISK_SETTINGS)")
    common.add_argument("--input", type=Path, default=None, help="Delimited file with prices or returns")
    common.add_argument("--input-format", default=None, choices=[f.value for f in SeriesFormat])
    common.add_argument("--column", default=None, help="Value column name or index (default: last non-date column)")
    common.add_argument("--date-column", default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--format", default=None, choices=[f.value for f in OutputFormat])
    common.add_argument("--out", type=Path, default=None, help="Write the report here instead of stdout")
    common.add_argument("--horizons", type=_number_list(int), default=None, help="e.g. 1,2,4,5")
    common.add_argument("--levels", type=_number_list(float), default=None, help="coverage levels, e.g. 0.95,0.995")
    common.add_argument("--thresholds", type=_number_list(float), default=None, help="loss thresholds in percent")
    common.add_argument("--nu", type=float, default=None, help="Student-t degrees of freedom (fixed)")
    common.add_argument("--tail-method", default=None, choices=[c.value for c in TailChoice])
    common.add_argument("--tail-side", default=None, choices=[s.value for s in TailSide])
    common.add_argument("--kappa", type=int, default=None, help="Hill curve length for the modified Hill estimate")
    common.add_argument("--convention", default=None, choices=[c.value for c in Convention])
    common.add_argument("--model", type=Path, default=None, help="Use a persisted fit instead of fitting")
    common.add_argument("--model-out", type=Path, default=None, help="Persist the fit as JSON")
    common.add_argument("--verbose", action="store_true")

    parser = argparse.ArgumentParser(description="GARCH-EVT conditional tail risk with alpha-root horizon scaling")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("fit", parents=[common], help="Fit AR(1)-GARCH(1,1)-t and print diagnostics")
    sub.add_parser("filter", parents=[common], help="Conditional means, volatilities, residuals and QQ data")
    tail = sub.add_parser("tail", parents=[common], help="Hill and modified Hill tail estimates")
    tail.add_argument("--hill-curve", action="store_true", default=None)
    risk = sub.add_parser("risk", parents=[common], help="Conditional EVT and Gaussian risk report")
    risk.add_argument("--no-benchmark", dest="benchmark", action="store_false", default=None)
    simulate_parser = sub.add_parser("simulate", parents=[common], help="Simulate a GARCH-t return series")
    simulate_parser.add_argument("--n", type=int, default=None)
    study = sub.add_parser("study", parents=[common], help="Monte Carlo study of the scaling procedure")
    study.add_argument("--quick", action="store_true", help="2 replications of 500 observations")
    backtest = sub.add_parser("backtest", parents=[common], help="Count quantile violations in a return file")
    backtest.add_argument("--quantile", type=float, required=True, help="Loss quantile in percent")
    oracle = sub.add_parser("oracle", parents=[common], help="Large-sample targets for both innovation conventions")
    oracle.add_argument("--big-n", type=int, default=None)
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    args = parse_args(argv if argv is not None else sys.argv[1:])
    logging.basicConfig(
        format='%(asctime)s %(levelname)-8s %(message)s',
        level=logging.DEBUG if args.verbose else logging.INFO,
        datefmt='%Y-%m-%d %H:%M:%S')

    overrides = {k: v for k, v in vars(args).items() if k not in ('config', 'command', 'quantile')}
    try:
        config = build_run_config(load_settings(resolve_settings_path(args.config)), overrides)
        extra = {}
        if args.command == 'backtest':
            extra['quantile'] = args.quantile
        if args.command == 'oracle' and args.convention is not None:
            extra['conventions'] = (Convention(args.convention),)
        sheets, payload = COMMANDS[args.command](config, **extra)
        text = emit(sheets, payload, config.format, config.out if args.command != 'simulate' else None)
    except RiskToolError as e:
        logging.error("❌ %s", e)
        return int(e.exit_code)

    sys.stdout.write(text)
    return int(ExitCode.OK)


if __name__ == "__main__":
    raise SystemExit(main())
