"""Exception types shared across the solver."""


class GpjError(Exception):
    """Base class for all solver errors."""


class InvalidMeshError(GpjError):
    pass


class DimensionMismatchError(GpjError):
    pass


class ZeroFieldError(GpjError):
    pass


class UnnormalizedFieldError(GpjError):
    pass


class AssemblyError(GpjError):
    pass


class ConfigError(GpjError):
    """Invalid run configuration; the message names the offending key."""


class SolverFailure(GpjError):
    """Iterative linear solve did not reach the requested tolerance.

    Carries the final residual and the last iterate so callers may apply
    a weaker acceptance (e.g. backward error for near-singular shifts).
    """

    def __init__(self, message, residual=None, x=None):
        super().__init__(message)
        self.residual = residual
        self.x = x


class SingularUpdateError(GpjError):
    """Rank-one update denominator vanished (shift at/near an eigenvalue)."""


class DegenerateDirectionError(GpjError):
    """The solver direction is H-orthogonal to the iterate (gamma undefined)."""


class DegenerateCombinationError(GpjError):
    """Line-search combination has vanishing norm."""


class StepRejectedError(GpjError):
    """A shifted step could not be completed at the current shift."""


class SizeCapError(GpjError):
    """Dense oracle invoked above its size cap."""


class AbortedRunError(GpjError):
    """Run aborted (non-finite energy/residual or unrecoverable step)."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history
