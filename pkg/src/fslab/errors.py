"""Exception hierarchy shared by all modules."""


class FinslerLabError(Exception):
    """Base class for every error raised by :mod:`fslab`."""


class NonSmoothEvaluation(FinslerLabError):
    """The metric returned a non-finite value at a sample."""


class SingularMetric(FinslerLabError):
    """``det g <= 0`` or ``F <= 0`` where a regular value was required."""


class DegenerateFiberVector(FinslerLabError, ValueError):
    """A fiber vector too close to the zero section was passed."""


class NoClosure(FinslerLabError):
    """An indicatrix trace failed to return to its seed."""


class RiemannianCase(FinslerLabError):
    """The main scalar is constant along the indicatrix (Riemannian surface).

    Not a failure: callers treat it as a classified outcome.
    """


class InconsistentConstants(FinslerLabError):
    """The integration constants disagree across admissible parameters."""

    def __init__(self, message, spread=None):
        super().__init__(message)
        self.spread = spread


class FiberDependence(FinslerLabError):
    """Connection coefficients recovered at different fibers disagree."""

    def __init__(self, message, spread=None):
        super().__init__(message)
        self.spread = spread


class NotMetrical(FinslerLabError):
    """A connection fails to parallelize the averaged metric."""


class SingularAveragedMetric(FinslerLabError):
    """The averaged metric is not positive definite on the stencil."""


class NotDivergenceFree(FinslerLabError):
    """A 1-form whose rotated dual is not curl free was used for a potential."""


class RootBracketFailure(FinslerLabError):
    """A ray from the origin failed to cross an implicit seed curve."""


class ConfigError(FinslerLabError):
    """Malformed run configuration."""
