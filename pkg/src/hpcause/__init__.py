"""SAT-based checking of actual causality in binary structural causal models."""

from .checker import (
    CausalityResult,
    CausalQuery,
    NonMinimalityReport,
    Offender,
    Strategy,
    build_F,
    build_G,
    check_ac1,
    check_ac2_brute,
    check_ac2_sat,
    check_ac2_sat_minimal,
    check_ac3_brute,
    check_ac3_sat,
    check_cause,
    check_combined,
    diagnose_non_minimal,
)
from .dsl import parse_model, parse_query, serialize_model
from .generators import generate_abt, generate_binary_tree
from .model import CausalModel, evaluate_model, intervene, satisfies, validate

__all__ = [
    "CausalModel",
    "CausalQuery",
    "CausalityResult",
    "NonMinimalityReport",
    "Offender",
    "Strategy",
    "build_F",
    "build_G",
    "check_ac1",
    "check_ac2_brute",
    "check_ac2_sat",
    "check_ac2_sat_minimal",
    "check_ac3_brute",
    "check_ac3_sat",
    "check_cause",
    "check_combined",
    "diagnose_non_minimal",
    "evaluate_model",
    "generate_abt",
    "generate_binary_tree",
    "intervene",
    "parse_model",
    "parse_query",
    "satisfies",
    "serialize_model",
    "validate",
]
