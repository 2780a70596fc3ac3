"""Exception types shared across the package."""


class RadcomError(Exception):
    """Base class for solver and modeling errors."""


class NotPositiveDefinite(RadcomError):
    """A matrix that must be positive definite is singular or indefinite."""


class InfeasibleProblem(RadcomError):
    """The constraint set of an optimization problem is empty."""


class NotConverged(RadcomError):
    """An iterative solver exhausted its iteration budget."""
