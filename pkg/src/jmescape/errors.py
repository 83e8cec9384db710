"""Exception hierarchy.

Validation problems derive from ``ValueError`` (the CLI maps them to exit
code 2); numerical failures derive from ``RuntimeError`` (exit code 3).
"""


class ShapeError(ValueError):
    """Array does not conform to the mass system or ambient dimension."""


class DomainError(ValueError):
    """Argument outside its mathematical domain."""


class CollisionError(ValueError):
    """Configuration lies on the collision locus where the operation is singular."""


class OutsideConeError(ValueError):
    """Point lies outside a cone beyond the allowed tolerance."""


class DegenerateConeError(ValueError):
    """Cone has empty interior."""


class DegenerateLiftError(ValueError):
    """A hyperplane lift produced coincident hyperplanes."""


class EnumerationLimitError(ValueError):
    """Too many hyperplanes for exhaustive chamber enumeration."""


class SolverError(RuntimeError):
    """An iterative solver or root finder failed to converge."""

    def __init__(self, message, residual=None):
        super().__init__(message if residual is None else f"{message} (residual {residual:.3e})")
        self.residual = residual
