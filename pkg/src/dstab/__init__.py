"""Robust and probabilistic D-stability analysis of uncertain polynomial
matrices via truncated moment relaxations, with independent brute-force
verification oracles."""

from .poly import Polynomial, parse_polynomial
from .sets import (
    Relation,
    SemialgebraicSet,
    StabilityRegionComplement,
    box_set,
    custom_region,
    region_preset,
)
from .problem import (
    DStabilityProblem,
    LiftedProblem,
    MomentConstraint,
    UncertainMatrix,
    build_lifted,
    minimal_order,
    spectral_bound,
)
from .relax import SDPProblem, SDPSolution, SolverStatus, assemble_relaxation, problem_stats
from .sdp import SolverSettings, solve

__all__ = [
    "Polynomial",
    "parse_polynomial",
    "Relation",
    "SemialgebraicSet",
    "StabilityRegionComplement",
    "box_set",
    "custom_region",
    "region_preset",
    "DStabilityProblem",
    "LiftedProblem",
    "MomentConstraint",
    "UncertainMatrix",
    "build_lifted",
    "minimal_order",
    "spectral_bound",
    "SDPProblem",
    "SDPSolution",
    "SolverStatus",
    "assemble_relaxation",
    "problem_stats",
    "SolverSettings",
    "solve",
]

__version__ = "0.1.0"
