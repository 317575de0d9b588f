"""
Exhaustive generate-and-eliminate learner for tiny instances, used as a ground truth in tests
"""

from itertools import combinations
from typing import List, Optional

from lawmine.errors import ConfigurationError, InstanceTooLarge
from lawmine.evaluation import SampleTable, clause_violation_mask
from lawmine.ingest import Dataset
from lawmine.language.intervals import Truth
from lawmine.language.semantics import Status, clause_to_constraint, literal_truth, static_status, traversal_key
from lawmine.language.terms import Bias, Constraint, Literal, Op, Predicate, Provenance, Vocabulary
from lawmine.services.logger_service import get_logger

from .candidates import clause_admissible, ladder_rungs, linear_predicates

logger = get_logger("lattice.oracle")

MAX_VARIABLES = 4
MAX_VALUES = 8


def _literals(vocab: Vocabulary, table: SampleTable, bias: Bias) -> List[Literal]:
    literals = []
    for var in vocab:
        if var.is_nominal:
            atoms = [Predicate(var.name, Op.EQ, v) for v in var.values]
        else:
            atoms = [Predicate(var.name, op, t) for t in ladder_rungs(table, vocab, var.name) for op in (Op.GE, Op.LE)]
        for atom in atoms:
            literals += [Literal(atom, True), Literal(atom, False)]
    literals += [Literal.of(p) for p in linear_predicates(vocab, bias)]
    return [lit for lit in literals if literal_truth(lit, vocab) is Truth.UNKNOWN]


def _placeable(clause) -> bool:
    """A linear literal only sits in a consequent, so it needs a partner that can be an antecedent"""
    if len(clause) == 1 or not any(lit.atom.is_linear for lit in clause):
        return True
    return any(
        not lit.atom.is_linear and (not lit.atom.op.is_ordinal or not lit.positive) for lit in clause
    )


def valiant_learn(d: Dataset, vocab: Vocabulary, a: int, bias: Optional[Bias] = None) -> List[Constraint]:
    """Every contingent clause of the bounded-arity language satisfied by all rows, redundant ones included"""
    if a < 1:
        raise ConfigurationError(f"arity limit must be at least 1, got {a}")
    if len(vocab) > MAX_VARIABLES:
        raise InstanceTooLarge(
            f"exhaustive learning supports at most {MAX_VARIABLES} variables, got {len(vocab)}",
            {"variables": len(vocab), "limit": MAX_VARIABLES},
        )
    bias = bias or Bias()
    table = SampleTable.from_dataset(d)
    for var in vocab:
        size = len(var.values) if var.is_nominal else len(ladder_rungs(table, vocab, var.name))
        if size > MAX_VALUES:
            raise InstanceTooLarge(
                f"exhaustive learning supports at most {MAX_VALUES} values per variable, {var.name} has {size}",
                {"variable": var.name, "values": size, "limit": MAX_VALUES},
            )

    literals = sorted(_literals(vocab, table, bias))
    learned = []
    for size in range(1, 2 * a):
        for clause in combinations(literals, size):
            if not clause_admissible(clause, vocab, a, bias) or not _placeable(clause):
                continue
            if any(lit.negate() in clause for lit in clause):
                continue
            if clause_violation_mask(table, clause).any():
                continue
            constraint = clause_to_constraint(frozenset(clause), Provenance.SEEDED)
            if static_status(constraint, vocab) is Status.CONTINGENT:
                learned.append(constraint)
    learned.sort(key=traversal_key)
    logger.debug("Exhaustive learning completed", constraints=len(learned), literals=len(literals), arity=a)
    return learned
