"""Numerical laboratory for radial Kähler metrics of negative curvature and
the coarse geometry of their products."""

from .errors import (
    DegeneratePlane,
    DomainError,
    DomainExited,
    NegCurvError,
    NoConvergence,
    NotAGeodesic,
    NotPositiveDefinite,
    QuadratureError,
    SingularityError,
    StepTooLarge,
    ZeroVector,
)
from .jets import EXP, FUBINI, LINEAR, LOG_BALL, Jet, RadialPotential, parse_potential

__version__ = "0.1.0"

__all__ = [
    "DegeneratePlane",
    "DomainError",
    "DomainExited",
    "EXP",
    "FUBINI",
    "Jet",
    "LINEAR",
    "LOG_BALL",
    "NegCurvError",
    "NoConvergence",
    "NotAGeodesic",
    "NotPositiveDefinite",
    "QuadratureError",
    "RadialPotential",
    "SingularityError",
    "StepTooLarge",
    "ZeroVector",
    "parse_potential",
]
