"""Exception hierarchy shared by every module in the package."""


class EllrankError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(EllrankError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class RangeError(DomainError):
    """An argument lies outside the numerically supported range.

    Raised instead of silently extrapolating (e.g. Bessel evaluation beyond
    the validated argument window, or a root search past its hard cap).
    """


class BracketError(EllrankError, ValueError):
    """A root bracket does not actually bracket a sign change."""


class ConvergenceError(EllrankError, RuntimeError):
    """An iterative procedure exhausted its budget before converging.

    Carries the best estimate reached and a bound on its error so callers
    can decide whether the partial result is still usable.
    """

    def __init__(self, message, estimate=None, error_bound=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class DegenerateDataError(EllrankError, ValueError):
    """Input data is degenerate: coincident points or rank-deficient scatter."""


class ModelError(EllrankError, ValueError):
    """A model configuration is invalid (e.g. a singular mixing matrix)."""


class SimulationError(EllrankError, RuntimeError):
    """A simulation failed: too many replicates raised errors."""
