"""Exception hierarchy shared across the solver suite."""


class GfpkError(Exception):
    """Base class for all errors raised by this package."""


class BasisSizeError(GfpkError):
    """Requested basis exceeds the configured size cap."""


class NumericError(GfpkError):
    """A numerical routine failed to converge or produced non-finite values."""


class DegenerateDensityError(GfpkError):
    """Truncated density is too negative to be usable as a measure."""


class BoundViolationError(GfpkError):
    """A drift field violated its declared bound."""


class SolverError(GfpkError):
    """Linear system singular or too ill-conditioned to trust."""


class NonConvergenceError(GfpkError):
    """Fixed-point iteration exhausted its iteration budget.

    Carries the trace accumulated so far in ``self.trace``.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class DomainError(GfpkError):
    """A computational domain was too small for the requested accuracy."""


class InstabilityError(GfpkError):
    """Time stepping blew up; reduce the step size."""


class ConfigError(GfpkError):
    """Run configuration failed strict validation."""
