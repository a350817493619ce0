"""Exception hierarchy for the solver stack."""


class NlcauchyError(Exception):
    """Base class for all errors raised by this package."""


class SingularShiftError(NlcauchyError, ZeroDivisionError):
    """The resolvent was requested at (or numerically at) an eigenvalue."""


class ZeroShiftError(NlcauchyError, ZeroDivisionError):
    """The corrected resolvent was requested at z = 0."""


class DimensionMismatchError(NlcauchyError, ValueError):
    pass


class PivotBreakdownError(NlcauchyError, ArithmeticError):
    """A Thomas-algorithm pivot fell below the breakdown threshold."""


class CapabilityMissingError(NlcauchyError, NotImplementedError):
    """The backend does not provide an optional capability (power, pointwise evaluation)."""


class InvalidStripError(NlcauchyError, ValueError):
    """Strip width / sector angle combination leaves no admissible hyperbola."""


class InsufficientDataError(NlcauchyError, ValueError):
    pass


class DivergenceError(NlcauchyError, RuntimeError):
    """Fixed-point residuals grew by more than the allowed factor.

    The partially filled :class:`~nlcauchy.hammerstein.IterationReport` is
    attached as ``report`` so callers can still write it out.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ConfigError(NlcauchyError, ValueError):
    pass
