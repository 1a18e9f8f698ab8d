"""Exception hierarchy shared by all solvers."""


class DRGError(Exception):
    """Base class for every error raised by :mod:`sbdrg`."""


class DomainError(DRGError, ValueError):
    """An argument lies outside the domain of the requested function."""


class UnsupportedConfigurationError(DRGError):
    """The combination of bath parameters is not handled by this operation."""


class SingularFlowError(DRGError):
    """The flow right-hand side hit a vanishing denominator."""


class FlowConvergenceError(DRGError):
    """Adaptive flow integration could not make progress."""


class FixedPointNotFoundError(DRGError):
    """No crossing Delta(Lambda) = Lambda inside the trajectory."""


class ScheduleError(DRGError):
    """A rate schedule does not cover the requested time span."""


class FitError(DRGError):
    """Least-squares fit failed; carries residual diagnostics in the message."""


class NumericalError(DRGError):
    """Quadrature or other numerical routine failed to converge."""


class StabilityError(DRGError):
    """Time step too coarse for the fastest mode."""
