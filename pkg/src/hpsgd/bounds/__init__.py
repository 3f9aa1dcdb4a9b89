"""Bound evaluators, concentration Monte Carlo and auxiliary numeric oracles."""
from .auxiliary import (
    verify_implicit_solvers,
    verify_scalar_inequalities,
    verify_summation_identities,
)
from .evaluators import (
    BoundCheckResult,
    BoundInputs,
    check_lemma2,
    check_lemma3,
    check_theorem1,
    check_theorem2,
    check_theorem2_intermediate,
    lemma2_rhs,
    lemma3_rhs,
    theorem1_rhs,
    theorem2_c_of_t,
    theorem2_explicit_c,
    theorem2_k,
    theorem2_rhs,
)
from .montecarlo import MartingaleSpec, mc_lemma1, mc_max_bound, violation_slack

__all__ = [
    "BoundCheckResult",
    "BoundInputs",
    "MartingaleSpec",
    "check_lemma2",
    "check_lemma3",
    "check_theorem1",
    "check_theorem2",
    "check_theorem2_intermediate",
    "lemma2_rhs",
    "lemma3_rhs",
    "mc_lemma1",
    "mc_max_bound",
    "theorem1_rhs",
    "theorem2_c_of_t",
    "theorem2_explicit_c",
    "theorem2_k",
    "theorem2_rhs",
    "verify_implicit_solvers",
    "verify_scalar_inequalities",
    "verify_summation_identities",
    "violation_slack",
]
