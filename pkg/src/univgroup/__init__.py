"""Finite stages of a metrically universal abelian group, computed exactly."""

from .errors import *  # noqa: F401,F403
from .vectors import LatticeVector, as_vector, format_rational, parse_rational
from .wordmetric import (
    FinGenMetric,
    OptimalDecomposition,
    StableNormEstimate,
    WeightedGenerator,
    ball,
    d_distance_ball,
    distance,
    evaluate,
    normalize,
    optimal_decomposition,
    stable_norm_lp,
    stable_norm_upper,
)
from .katetov import KatetovFn, densify, katetov_extend, symmetrize, validate_katetov
from .amalgam import AmalgamSpec, amalgamate, extend_over

__version__ = "0.1.0"
