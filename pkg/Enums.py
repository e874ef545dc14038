from enum import Enum, unique

import colorama


class PipelineStep(Enum):
    LOAD_SERIES        = "0_load_series"         # Read prices/returns from disk
    FIT_MODEL          = "1_fit_model"           # AR(1)-GARCH(1,1)-t maximum likelihood
    FILTER             = "2_filter"              # Standardized residuals and forecast
    TAIL_ESTIMATION    = "3_tail_estimation"     # Hill / modified Hill on the residuals
    RISK_REPORT        = "4_risk_report"         # Conditional EVT and Gaussian measures
    STOP               = "5_stop"                # Done


@unique
class SeriesFormat(str, Enum):
    """How the numeric column of an input file is interpreted."""

    PRICE = 'price'
    RETURN = 'return'


@unique
class Convention(str, Enum):
    """Innovation convention of the simulator."""

    STANDARDIZED_T = 'std-t'
    RAW_T = 'raw-t'


@unique
class TailMethod(str, Enum):
    FIXED_FRACTION = 'fixed-fraction'
    HUISMAN = 'huisman'


@unique
class TailChoice(str, Enum):
    """Tail estimate selected on the command line."""

    FRACTION1 = 'fraction1'
    FRACTION5 = 'fraction5'
    HUISMAN = 'huisman'


@unique
class TailSide(str, Enum):
    LOWER = 'lower'
    UPPER = 'upper'


@unique
class RiskKind(str, Enum):
    PROBABILITY = 'probability'
    QUANTILE = 'quantile'


@unique
class RiskMethod(str, Enum):
    EVT = 'evt'
    GAUSSIAN = 'gaussian'


@unique
class StudyTarget(str, Enum):
    """What the Monte Carlo harness feeds to the tail estimator."""

    RESIDUALS = 'residuals'
    RETURNS = 'returns'


@unique
class OutputFormat(str, Enum):
    TABLE = 'table'
    JSON = 'json'
    XLSX = 'xlsx'


class ExitCode(int, Enum):
    OK = 0
    INPUT_ERROR = 2
    FIT_FAILURE = 3
    SCALING_INAPPLICABLE = 4
    DOMAIN_ERROR = 5


colorama_table = {
    PipelineStep.LOAD_SERIES: colorama.Fore.CYAN,
    PipelineStep.FIT_MODEL: colorama.Fore.GREEN,
    PipelineStep.FILTER: colorama.Fore.YELLOW,
    PipelineStep.TAIL_ESTIMATION: colorama.Fore.MAGENTA,
    PipelineStep.RISK_REPORT: colorama.Fore.LIGHTBLUE_EX,
    PipelineStep.STOP: colorama.Fore.LIGHTGREEN_EX,
}
