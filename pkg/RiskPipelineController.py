import dataclasses
import logging

from Domain.RiskDomain import FilterOutput, FitResult, Forecast, HillCurve, ReturnSeries, RiskEstimate, TailEstimate, \
    TailSample
from Enums import PipelineStep, TailChoice, colorama_table
from Exceptions import PreconditionError
from FitModelStep import FitModelStep
from Garch.diagnostics import diagnostics
from Garch.garch import filter_returns, forecast
from GenericModelFunctions import load_fit_result, save_fit_result
from RiskReportStep import RiskReportStep
from TailEstimationStep import TailEstimationStep
from utils.series_io import load_series
from utils.settings import RunConfig

STEP_ORDER = list(PipelineStep)


class RiskPipelineController:
    """Runs the linear pipeline from loading a series to the risk report, stopping after a chosen step."""

    def __init__(self, config: RunConfig, series: ReturnSeries | None = None):
        self.config = config
        self.series = series
        self.fit_result: FitResult | None = None
        self.filter_output: FilterOutput | None = None
        self.forecast: Forecast | None = None
        self.sample: TailSample | None = None
        self.tail_estimates: dict[TailChoice, TailEstimate] = {}
        self.hill_curve: HillCurve | None = None
        self.risk_rows: list[RiskEstimate] = []
        self.current_step = PipelineStep.LOAD_SERIES

    def run(self, until: PipelineStep = PipelineStep.RISK_REPORT) -> 'RiskPipelineController':
        while True:
            step = self.current_step
            color = colorama_table[step]
            if step == PipelineStep.LOAD_SERIES:
                logging.info("%s[0] Loading the series...", color)
                self._load_series()
            elif step == PipelineStep.FIT_MODEL:
                logging.info("%s[1] Fitting the model...", color)
                self._fit_model()
            elif step == PipelineStep.FILTER:
                logging.info("%s[2] Filtering and forecasting...", color)
                self._filter()
            elif step == PipelineStep.TAIL_ESTIMATION:
                logging.info("%s[3] Estimating the residual tail...", color)
                self._estimate_tail()
            elif step == PipelineStep.RISK_REPORT:
                logging.info("%s[4] Computing risk measures...", color)
                self._risk_report()
            if step in (until, PipelineStep.STOP):
                break
            self.current_step = STEP_ORDER[STEP_ORDER.index(step) + 1]
        return self

    def _load_series(self):
        if self.series is not None:
            return
        if self.config.input is None:
            raise PreconditionError("no input series given (use --input or data.input in the settings)")
        self.series = load_series(self.config.input, self.config.input_format, column=self.config.column,
                                  date_column=self.config.date_column, delimiter=self.config.delimiter)

    def _fit_model(self):
        if self.config.model is not None:
            self.fit_result = load_fit_result(self.config.model)
            if self.fit_result.params.nu != self.config.nu:
                logging.warning("Persisted model uses nu = %s; ignoring nu = %s", self.fit_result.params.nu,
                                self.config.nu)
            return
        self.fit_result, self.filter_output = FitModelStep(self.config, self.series).execute()
        if self.config.model_out is not None:
            save_fit_result(self.fit_result, self.config.model_out)

    def _filter(self):
        if self.filter_output is None:
            self.filter_output = filter_returns(self.fit_result.params, self.series)
            if not self.fit_result.diagnostics:
                # persisted models fitted elsewhere may lack the residual diagnostics
                self.fit_result = dataclasses.replace(self.fit_result,
                                                      diagnostics=diagnostics(self.series, self.filter_output))
        self.forecast = forecast(self.fit_result.params, self.series, self.filter_output)

    def _estimate_tail(self):
        self.sample, self.tail_estimates, self.hill_curve = TailEstimationStep(self.config, self.filter_output).execute()

    def _risk_report(self):
        estimate = self.tail_estimates[self.config.tail_method]
        self.risk_rows = RiskReportStep(self.config, self.forecast, estimate, self.sample).execute()
