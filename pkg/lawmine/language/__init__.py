"""
The constraint language: vocabulary, bias, predicates, constraints and their semantics.
"""

from .intervals import Interval, Truth, predicate_truth
from .parser import check_predicate, parse_constraint, parse_constraints
from .semantics import (
    ClauseSet,
    Order,
    Status,
    arity,
    clause_to_constraint,
    clausify,
    compare,
    evaluate,
    evaluate_predicate,
    is_evaluable,
    static_status,
    traversal_key,
)
from .terms import (
    Bias,
    Connective,
    Constraint,
    Kind,
    LinearTerm,
    Literal,
    Op,
    Predicate,
    Provenance,
    Variable,
    Vocabulary,
    format_constraint,
    normalize_value,
)

__all__ = [
    "Bias",
    "ClauseSet",
    "Connective",
    "Constraint",
    "Interval",
    "Kind",
    "LinearTerm",
    "Literal",
    "Op",
    "Order",
    "Predicate",
    "Provenance",
    "Status",
    "Truth",
    "Variable",
    "Vocabulary",
    "arity",
    "check_predicate",
    "clause_to_constraint",
    "clausify",
    "compare",
    "evaluate",
    "evaluate_predicate",
    "format_constraint",
    "is_evaluable",
    "normalize_value",
    "parse_constraint",
    "parse_constraints",
    "predicate_truth",
    "static_status",
    "traversal_key",
]
