"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the domain of an operation."""


class CollisionError(DomainError):
    """A point sits on the collision locus (north pole of the sphere)."""


class DegreeError(ValueError):
    """A divisor polynomial does not have the required degree."""


class DegenerateFrameError(ArithmeticError):
    """The gradient is too small to span a tangent frame."""


class RootBracketError(ArithmeticError):
    """No sign change was found along a sampling ray."""


class ConstructionError(ArithmeticError):
    """A symbolic construction step failed an exactness check."""


class BracketError(ArithmeticError):
    """A bracketing interval has no sign change of the target function."""
