"""Diffusion-limited aggregation on the hyperbolic plane.

Particles are unit hyperbolic balls in the upper half-plane chart. Each new
particle attaches at a point of the boundary of ``B(A)``, the union of
radius-2 balls around the current centers, drawn from harmonic measure
seen from infinity and estimated by walk-on-spheres.
"""

from .aggregate import Aggregate, Particle
from .errors import (DegenerateBoundary, EmptyAggregate, HypDLAError, InsufficientData, InvariantViolation,
                     MalformedRecord, NoAcceptanceWithinBudget, SpacingFailure, StartBelowFloor,
                     StartInsideAggregate, StepFailed)
from .geometry import HalfPlanePoint, HypIsometry, hyp_distance, polar_point
from .growth import GrowthConfig, RunRecord, checkpoint_load, checkpoint_save, grow, run, step
from .harmonic import estimate_capacity, sample_attachment
from .walker import ProbeParams

__version__ = "0.1.0"

__all__ = [
    "Aggregate", "Particle", "HalfPlanePoint", "HypIsometry", "hyp_distance", "polar_point",
    "GrowthConfig", "RunRecord", "grow", "run", "step", "checkpoint_load", "checkpoint_save",
    "estimate_capacity", "sample_attachment", "ProbeParams",
    "HypDLAError", "DegenerateBoundary", "EmptyAggregate", "InsufficientData", "InvariantViolation",
    "MalformedRecord", "NoAcceptanceWithinBudget", "SpacingFailure", "StartBelowFloor", "StartInsideAggregate",
    "StepFailed",
]
