"""Escape-rate machinery and finite-diameter certificates for the
negative-energy N-body problem."""

from .errors import (
    CollisionError,
    DegenerateConeError,
    DegenerateLiftError,
    DomainError,
    EnumerationLimitError,
    OutsideConeError,
    ShapeError,
    SolverError,
)
from .nbody_core import MassSystem
from .cone_geometry import EscapeCertificate, Escaper, PolyhedralCone
from .arrangement_escape import Chamber, HyperplaneArrangement, SubspaceArrangement
from .jm_metric import DiameterCertificate, Polyline, Trajectory

__version__ = "0.1.0"

__all__ = [
    "Chamber",
    "CollisionError",
    "DegenerateConeError",
    "DegenerateLiftError",
    "DiameterCertificate",
    "DomainError",
    "EnumerationLimitError",
    "EscapeCertificate",
    "Escaper",
    "HyperplaneArrangement",
    "MassSystem",
    "OutsideConeError",
    "PolyhedralCone",
    "Polyline",
    "ShapeError",
    "SolverError",
    "SubspaceArrangement",
    "Trajectory",
]
