from Enums import ExitCode


class RiskToolError(Exception):
    """Base class for every error raised on purpose by this package."""

    exit_code: ExitCode = ExitCode.DOMAIN_ERROR


class InputDataError(RiskToolError, ValueError):
    """Unreadable or malformed input data (missing file, bad cell, bad price...)."""

    exit_code = ExitCode.INPUT_ERROR


class PreconditionError(RiskToolError, ValueError):
    """An operation was called outside of its documented domain."""


class DegenerateSampleError(PreconditionError):
    """Zero variance, empty tail or all-equal order statistics."""


class LikelihoodError(RiskToolError, ArithmeticError):
    """The log-likelihood evaluated to a non-finite number."""

    exit_code = ExitCode.FIT_FAILURE


class FitError(RiskToolError, RuntimeError):
    """Optimisation or covariance estimation failed."""

    exit_code = ExitCode.FIT_FAILURE


class ScalingInapplicableError(RiskToolError, ValueError):
    """The α-root law needs a finite variance (α > 2)."""

    exit_code = ExitCode.SCALING_INAPPLICABLE

    def __init__(self, alpha: float):
        self.alpha = alpha
        super().__init__(f"infinite-variance tail; scaling law inapplicable (estimated alpha = {alpha:.4f} <= 2)")


class StudyError(RiskToolError, RuntimeError):
    """Too many Monte Carlo replications had to be excluded."""
