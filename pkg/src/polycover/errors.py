"""Exception hierarchy shared by all planning stages."""


class PlanningError(Exception):
    """Base class for every error raised by polycover."""

    #: pipeline stage that raised, filled in by the planner
    stage = None


class InvalidInputError(PlanningError, ValueError):
    """Malformed or out-of-range user input."""


class GeometryError(PlanningError):
    """A geometric construction failed (offset, decomposition, ...)."""


class NoPathError(GeometryError):
    """Two free-space points are not connected."""


class IntractableError(PlanningError):
    """The exact solver would exceed its state or time budget."""


class SolverTimeout(IntractableError):
    """The exact solver ran out of wall-clock time."""
