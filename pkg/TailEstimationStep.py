import logging

from Domain.RiskDomain import FilterOutput, HillCurve, TailEstimate, TailSample
from Enums import PipelineStep, TailChoice, TailSide, colorama_table
from Exceptions import FitError, PreconditionError
from Tail.hill import default_kappa, downside_tail, estimate_tail, hill_curve, upside_tail
from utils.settings import RunConfig


class TailEstimationStep:
    """Hill estimates at 1 % and 5 % of the residuals plus the modified Hill estimate.

    The estimate named by `tail_method` drives the risk measures; the others are
    reported alongside it.
    """

    def __init__(self, config: RunConfig, filter_output: FilterOutput):
        self.config = config
        self.filter_output = filter_output

    def execute(self) -> tuple[TailSample, dict[TailChoice, TailEstimate], HillCurve | None]:
        color = colorama_table[PipelineStep.TAIL_ESTIMATION]
        if self.config.tail_side == TailSide.LOWER:
            sample = downside_tail(self.filter_output.z)
        else:
            sample = upside_tail(self.filter_output.z)
        logging.info("%s%d of %d residuals in the %s tail", color, len(sample), sample.n_total, sample.side.value)

        estimates: dict[TailChoice, TailEstimate] = {}
        for choice in TailChoice:
            try:
                estimates[choice] = estimate_tail(sample, choice, self.config.kappa)
            except (PreconditionError, FitError) as e:
                if choice == self.config.tail_method:
                    raise
                logging.warning("%sSkipping %s tail estimate: %s", color, choice.value, e)
                continue
            estimate = estimates[choice]
            logging.info("%s%-10s gamma=%.4f alpha=%.4f m=%d se=%.4f", color, choice.value, estimate.gamma,
                         estimate.alpha, estimate.m, estimate.stderr)

        curve = None
        if self.config.hill_curve:
            curve = hill_curve(sample, self.config.kappa or default_kappa(sample))
        return sample, estimates, curve
