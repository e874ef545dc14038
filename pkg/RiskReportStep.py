import logging

from Domain.RiskDomain import Forecast, RiskEstimate, TailEstimate, TailRiskModel, TailSample
from Enums import PipelineStep, colorama_table
from Risk.risk_measures import risk_report
from utils.settings import RunConfig


class RiskReportStep:
    def __init__(self, config: RunConfig, forecast: Forecast, estimate: TailEstimate, sample: TailSample):
        self.config = config
        self.forecast = forecast
        self.model = TailRiskModel.from_estimate(estimate)
        self.sample = sample

    def execute(self) -> list[RiskEstimate]:
        color = colorama_table[PipelineStep.RISK_REPORT]
        logging.info("%sForecast mu=%.4f sigma=%.4f; tail alpha=%.4f (m/T=%.4f)", color, self.forecast.mu_next,
                     self.forecast.sigma_next, self.model.tail.alpha, self.model.tail_fraction)
        # coverage level 0.95 is a tail probability of 0.05
        tail_probabilities = [1.0 - level for level in self.config.levels]
        rows = risk_report(self.forecast, self.model, tail_probabilities, self.config.thresholds,
                           self.config.horizons, benchmark=self.config.benchmark, tail_side=self.config.tail_side,
                           sample=self.sample)
        in_sample = sum(row.in_sample for row in rows)
        if in_sample:
            logging.info("%s%d estimate(s) fall inside the empirical tail and use observed frequencies", color,
                         in_sample)
        return rows
