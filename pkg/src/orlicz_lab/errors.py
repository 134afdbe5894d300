"""Exception hierarchy shared by all modules."""


class OrliczLabError(Exception):
    """Base class for every error raised by the package."""


class InvariantViolation(OrliczLabError, ValueError):
    """An input object breaks one of its structural invariants."""


class GridResolutionError(OrliczLabError):
    """A numerical grid is too coarse or too short for the requested scan."""


class DomainError(OrliczLabError, ValueError):
    """An operation was asked to evaluate outside its domain."""


class NotApplicableError(OrliczLabError):
    """A construction has no valid parameters for the given input."""


class SpaceMismatchError(OrliczLabError, ValueError):
    """Random variables live on different probability spaces."""


class ConsistencyError(OrliczLabError):
    """Two independent solvers disagree beyond the accepted tolerance."""


class PreconditionError(OrliczLabError):
    """Hypotheses of a procedure could not be verified on the realized data."""


class ConvexityViolation(OrliczLabError):
    """A set declared convex lost membership along a convex combination."""


class ScenarioNotFound(OrliczLabError, KeyError):
    """Unknown scenario name."""
