"""Generalized Choi matrices relative to a cyclic vector, and the positivity cones they test."""

from .core import (
    DimensionError,
    QuantumMap,
    ad,
    compose,
    elementary,
    kron,
    map_apply,
    map_from_std_choi,
    map_predual,
    max_unit_gap,
    partial_trace,
    partial_transpose,
    std_choi,
    unvec,
    vec,
)
from .correspondence import (
    CyclicVector,
    NotCyclicError,
    choi_C,
    choi_D,
    commutant_functional,
    map_from_C,
    map_from_D,
    pair,
    tilde_apply,
    tilde_predual,
)
from .positivity import (
    NotCompletelyPositive,
    NotHermitianPreserving,
    SeeSawConfig,
    Status,
    Verdict,
    is_cp,
    is_k_positive,
    is_positive,
    kraus,
)
from .schmidt import (
    DecompositionNotFound,
    NotAState,
    isotropic_state,
    ppt_check,
    schmidt_number_bounds,
    schmidt_rank,
    sn_lower,
    sn_upper,
    witness_map,
)
from .superpos import Answer, DNormValue, d_norm, eb_kraus_rank_one, is_entanglement_breaking, is_k_superpositive
from .truncation import Subspace, compress, convergence_run, diag_cyclic, iota, pi

__all__ = [name for name in dir() if not name.startswith("_")]
