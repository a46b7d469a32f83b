"""Rotor-router walks, aggregation and harmonic measure on the comb."""

from .engine import (
    EngineState,
    ParticleConfig,
    RotorConfig,
    ToppleMode,
    aggregate,
    apply_Fu,
    halfline_process,
    is_acyclic,
    rotor_walk,
    topple,
    verify_odometer,
)
from .formulas import halfline_h_r, r_of_x, u_m, u_prime, u_tilde
from .geometry import (
    ClusterShape,
    Direction,
    cardinality_Bm,
    h_cluster,
    h_square,
    initial_rotor,
    inner_boundary,
    neighbors,
    rotor_successor,
    shape_contains,
)
from .harmonic import (
    BoundaryMeasure,
    RationalSeq,
    WeightSystem,
    add_particle_Ex,
    dirichlet_odometer,
    estimate_c,
    harmonic_by_montecarlo,
    harmonic_by_recursion,
    harmonic_by_rotor,
    matrix_recursion_step,
    verify_monotone_bounds,
    weight_invariance_check,
)

__version__ = "0.1.0"

__all__ = [
    "add_particle_Ex",
    "aggregate",
    "apply_Fu",
    "BoundaryMeasure",
    "cardinality_Bm",
    "ClusterShape",
    "Direction",
    "dirichlet_odometer",
    "EngineState",
    "estimate_c",
    "h_cluster",
    "h_square",
    "halfline_h_r",
    "halfline_process",
    "harmonic_by_montecarlo",
    "harmonic_by_recursion",
    "harmonic_by_rotor",
    "initial_rotor",
    "inner_boundary",
    "is_acyclic",
    "matrix_recursion_step",
    "neighbors",
    "ParticleConfig",
    "r_of_x",
    "RationalSeq",
    "rotor_successor",
    "rotor_walk",
    "RotorConfig",
    "shape_contains",
    "topple",
    "ToppleMode",
    "u_m",
    "u_prime",
    "u_tilde",
    "verify_monotone_bounds",
    "verify_odometer",
    "weight_invariance_check",
    "WeightSystem",
]
