"""
Levelwise constraint learner over the bounded-arity lattice.
"""

from .candidates import (
    Candidate,
    CandidateStatus,
    Frontier,
    PredicatePool,
    Side,
    ThresholdSlot,
    build_pool,
    generate_predicates,
    seed_candidates,
)
from .learner import LayerStats, LearnerConfig, LearnResult, generalize, learn
from .oracle import valiant_learn
from .refinement import refine

__all__ = [
    "Candidate",
    "CandidateStatus",
    "Frontier",
    "LayerStats",
    "LearnResult",
    "LearnerConfig",
    "PredicatePool",
    "Side",
    "ThresholdSlot",
    "build_pool",
    "generalize",
    "generate_predicates",
    "learn",
    "refine",
    "seed_candidates",
    "valiant_learn",
]
