"""Orlicz-space numerics on finite dyadic probability spaces.

Young functions and conjugates, Luxemburg and dual norms, Delta2 indices,
upper q-estimates, subsequence and convex-combination certificates and the
duality layer for monetary utility functions.
"""
from .errors import (
    ConsistencyError,
    ConvexityViolation,
    DomainError,
    GridResolutionError,
    InvariantViolation,
    NotApplicableError,
    OrliczLabError,
    PreconditionError,
    ScenarioNotFound,
    SpaceMismatchError,
)
from .estimates import DisjointFamily, cesaro_disjoint_bounds, forward_convex_shift, verify_upper_q_estimate
from .gallery import build_scenario, list_scenarios, run_scenario
from .komlos import (
    KomlosCertificate,
    RvSequence,
    kp_split,
    komlos_extract,
    non_delta2_counterexample,
    order_bounded_subsequence,
)
from .norms import amemiya_norm, dual_orlicz_norm, holder_check, luxemburg_norm, modular
from .risk import (
    MonetaryUtility,
    closure_certificate,
    continuity_from_above,
    continuity_from_below,
    dual_representation_check,
    monotonicity_check,
    penalty,
)
from .space import DyadicSpace, RandomVariable, l0_metric, ui_modulus
from .young import YoungFunction, conjugate, delta2_index, doubling_oracle, make_truncated_psi

__all__ = [
    "ConsistencyError",
    "ConvexityViolation",
    "DomainError",
    "GridResolutionError",
    "InvariantViolation",
    "NotApplicableError",
    "OrliczLabError",
    "PreconditionError",
    "ScenarioNotFound",
    "SpaceMismatchError",
    "DisjointFamily",
    "cesaro_disjoint_bounds",
    "forward_convex_shift",
    "verify_upper_q_estimate",
    "build_scenario",
    "list_scenarios",
    "run_scenario",
    "KomlosCertificate",
    "RvSequence",
    "kp_split",
    "komlos_extract",
    "non_delta2_counterexample",
    "order_bounded_subsequence",
    "amemiya_norm",
    "dual_orlicz_norm",
    "holder_check",
    "luxemburg_norm",
    "modular",
    "MonetaryUtility",
    "closure_certificate",
    "continuity_from_above",
    "continuity_from_below",
    "dual_representation_check",
    "monotonicity_check",
    "penalty",
    "DyadicSpace",
    "RandomVariable",
    "l0_metric",
    "ui_modulus",
    "YoungFunction",
    "conjugate",
    "delta2_index",
    "doubling_oracle",
    "make_truncated_psi",
]

__version__ = "0.1.0"
