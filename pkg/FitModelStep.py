import dataclasses
import logging

from Domain.RiskDomain import FilterOutput, FitResult, ReturnSeries
from Enums import PipelineStep, colorama_table
from Garch.diagnostics import diagnostics
from Garch.garch import OptimizerConfig, filter_returns, fit
from utils.settings import RunConfig


class FitModelStep:
    """Fit the AR(1)-GARCH(1,1)-t model and attach the Ljung-Box diagnostics of the filtered series."""

    def __init__(self, config: RunConfig, series: ReturnSeries):
        self.config = config
        self.series = series
        self.optimizer = OptimizerConfig(maxiter=config.maxiter, ftol=config.ftol)

    def execute(self) -> tuple[FitResult, FilterOutput]:
        color = colorama_table[PipelineStep.FIT_MODEL]
        logging.info("%sFitting AR(1)-GARCH(1,1)-t (nu = %s) on %d returns of %s", color, self.config.nu,
                     len(self.series), self.series.name)
        fit_result = fit(self.series, nu=self.config.nu, config=self.optimizer)
        filter_output = filter_returns(fit_result.params, self.series)
        fit_result = dataclasses.replace(fit_result, diagnostics=diagnostics(self.series, filter_output))

        params = fit_result.params
        logging.info("%sphi=%.4f alpha0=%.4f alpha1=%.4f beta1=%.4f loglik=%.3f (%d iterations%s)", color,
                     params.phi, params.alpha0, params.alpha1, params.beta1, fit_result.loglik, fit_result.iterations,
                     '' if fit_result.converged else ', not converged')
        return fit_result, filter_output
