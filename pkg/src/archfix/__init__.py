"""Architecture conformance checking with repair recommendations."""

from .checker import Violation, can, check
from .dcl import ConstraintSet, ParseError, parse_dcl, print_dcl
from .facts import DependencyKind, FactsDatabase, emit_facts, load_facts, validate
from .recommender import Recommendation, SimilarityReport, jaccard, recommend, suitable_module
from .refactor import PatchPlan, StaleRecommendationError, apply, apply_all

__all__ = [
    "ConstraintSet",
    "DependencyKind",
    "FactsDatabase",
    "ParseError",
    "PatchPlan",
    "Recommendation",
    "SimilarityReport",
    "StaleRecommendationError",
    "Violation",
    "apply",
    "apply_all",
    "can",
    "check",
    "emit_facts",
    "jaccard",
    "load_facts",
    "parse_dcl",
    "print_dcl",
    "recommend",
    "suitable_module",
    "validate",
]
