"""Piecewise-linear saw maps and the saturation feedback system that
generates them as first-hit reductions.

Quick start::

    from sawmap import TwoDParams, saw_map, classify_interval

    saw = saw_map(TwoDParams(2.0, -0.8))
    saw.k_star                      # absorbing index
    classify_interval(saw.alpha(1), saw.beta(1))

See README.md for the CLI and the acceptance suite.
"""

from .classify import (
    AttractorStructure,
    IntervalType,
    attractor_intervals,
    classify_interval,
    domain_D_membership,
    renorm_index,
    sigma_permutation,
    skeleton_orbits,
)
from .core import (
    Interval,
    PieceIndex,
    SawMap,
    TabulatedSequences,
    ValidationReport,
    validate,
)
from .errors import (
    DivergenceError,
    DomainError,
    InternalConsistencyError,
    InvalidMapError,
    KStarUndeterminedError,
    MalformedInputError,
    ParameterError,
    SawMapError,
    TruncationError,
    TypeMismatchError,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .system2d import (
    ClosedFormSequences,
    TwoDParams,
    TwoDState,
    analytic_T,
    consistency_check,
    first_hit,
    k_double_star,
    saturation,
    saw_map,
    step,
    stop_apply,
)

__version__ = "0.1.0"

__all__ = [
    "AttractorStructure",
    "ClosedFormSequences",
    "DivergenceError",
    "DomainError",
    "InternalConsistencyError",
    "Interval",
    "IntervalType",
    "InvalidMapError",
    "KERNEL_BACKEND",
    "KStarUndeterminedError",
    "MalformedInputError",
    "ParameterError",
    "PieceIndex",
    "SawMap",
    "SawMapError",
    "TabulatedSequences",
    "TruncationError",
    "TwoDParams",
    "TwoDState",
    "TypeMismatchError",
    "ValidationReport",
    "analytic_T",
    "attractor_intervals",
    "classify_interval",
    "consistency_check",
    "domain_D_membership",
    "first_hit",
    "k_double_star",
    "renorm_index",
    "saturation",
    "saw_map",
    "sigma_permutation",
    "skeleton_orbits",
    "step",
    "stop_apply",
    "validate",
]
