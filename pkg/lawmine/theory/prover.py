"""
Theories built from constraint sets, and entailment queries answered with a checkable proof
"""

import time
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple, Union

from lawmine.config.settings import get_settings
from lawmine.errors import QueryTooLarge
from lawmine.language.semantics import Clause, ClauseSet, clause_key, clausify
from lawmine.language.terms import Constraint, Literal, Predicate, Vocabulary
from lawmine.services.logger_service import get_logger
from lawmine.services.monitoring_service import get_monitoring_service

from .atoms import AtomTable, saturate
from .fitch import Proof, ProofBuilder, check_steps, disjuncts, obligations
from .formulas import Formula, atoms_of, clause_formula, conjoin, constraint_formula, formula_literal, literal_formula
from .solver import Refutation, Solver

logger = get_logger("theory.prover")

Query = Union[Constraint, Sequence[Constraint]]
Countermodel = Dict[Predicate, bool]


@dataclass(frozen=True)
class Theory:
    """Conjunction of the clausified constraints; immutable once built"""

    constraints: Tuple[Constraint, ...]
    axioms: ClauseSet
    vocab: Optional[Vocabulary] = None

    def __len__(self) -> int:
        return len(self.axioms)

    @property
    def atoms(self) -> FrozenSet[Predicate]:
        return self.axioms.atoms

    @property
    def atom_table(self) -> AtomTable:
        table = AtomTable()
        for atom in sorted(self.atoms):
            table.intern(atom)
        return table

    @cached_property
    def consistent(self) -> bool:
        table, clauses = _compile(self, frozenset(), None)
        model, _ = Solver(_encode(table, clauses)).solve()
        return model is not None


@dataclass(frozen=True)
class ProofResult:
    holds: bool
    proof: Optional[Proof] = None
    countermodel: Optional[Countermodel] = None

    def __bool__(self) -> bool:
        return self.holds


def build_theory(constraints: Iterable[Constraint], vocab: Optional[Vocabulary] = None) -> Theory:
    """Clausify every constraint and keep each clause once"""
    unique = tuple(dict.fromkeys(constraints))
    axioms = ClauseSet(frozenset())
    for constraint in unique:
        axioms = axioms.union(clausify(constraint))
    logger.debug(f"Theory built - constraints: {len(unique)}, clauses: {len(axioms)}", atoms=len(axioms.atoms))
    return Theory(unique, axioms, vocab)


def _compile(th: Theory, query_atoms: FrozenSet[Predicate], budget: Optional[int]) -> Tuple[AtomTable, List[Clause]]:
    pool, background = saturate(th.atoms | query_atoms, th.vocab)
    if budget is not None and len(pool) > budget:
        raise QueryTooLarge(len(pool), budget)
    table = AtomTable()
    for atom in sorted(pool):
        table.intern(atom)
    clauses = sorted(th.axioms.clauses, key=clause_key)
    known = set(clauses)
    clauses += [c for c in background if c not in known]
    return table, clauses


def _encode(table: AtomTable, clauses: Sequence[Clause]) -> List[List[int]]:
    return [[table.literal_id(lit) for lit in clause] for clause in clauses]


def _relevant(clauses: Sequence[Clause], atoms: FrozenSet[Predicate]) -> List[Clause]:
    """Clauses connected to the given atoms through shared atoms"""
    parent: Dict[Predicate, Predicate] = {}

    def find(atom: Predicate) -> Predicate:
        parent.setdefault(atom, atom)
        while parent[atom] != atom:
            parent[atom] = parent[parent[atom]]
            atom = parent[atom]
        return atom

    for clause in clauses:
        members = [lit.atom for lit in clause]
        root = find(members[0])
        for atom in members[1:]:
            parent[find(atom)] = root
    roots: Set[Predicate] = {find(atom) for atom in atoms}
    return [c for c in clauses if find(next(iter(c)).atom) in roots]


def _goal(q: Query) -> Formula:
    queries = [q] if isinstance(q, Constraint) else list(q)
    if not queries:
        raise ValueError("query needs at least one constraint")
    return conjoin([constraint_formula(c) for c in queries])


def prove(th: Theory, q: Query, with_proof: bool = True, atom_budget: Optional[int] = None) -> ProofResult:
    """
    Decide whether the theory entails the query.

    Each obligation of the query (assumed antecedent literals, disjunction to show) is refuted by
    DPLL with the disjunction negated. When all are refuted the refutations are replayed into a
    natural-deduction proof; otherwise the satisfying assignment is returned as a countermodel.
    """
    started = time.time()
    monitoring = get_monitoring_service()
    monitoring.increment_counter("theory.queries")
    budget = atom_budget if atom_budget is not None else get_settings().atom_budget
    goal = _goal(q)
    query_atoms = atoms_of(goal)
    table, clauses = _compile(th, query_atoms, budget)
    if th.consistent:
        clauses = _relevant(clauses, query_atoms)
    solver = Solver(_encode(table, clauses))

    def code(formula: Formula) -> int:
        return table.literal_id(formula_literal(formula))

    refutations: List[Refutation] = []
    for context, target in obligations(goal):
        assumptions = [code(f) for f in context] + [-code(f) for f in disjuncts(target)]
        model, refutation = solver.solve(assumptions)
        if model is not None:
            relevant = {lit.atom for clause in clauses for lit in clause} | query_atoms
            countermodel = {atom: model.get(table.literal_id(Literal(atom, True)), False) for atom in sorted(relevant)}
            monitoring.record_histogram("theory.query.seconds", time.time() - started)
            logger.debug(f"Query refuted - goal: {goal}", clauses=len(clauses))
            return ProofResult(False, countermodel=countermodel)
        refutations.append(refutation)

    proof = None
    if with_proof:
        builder = ProofBuilder(lambda c: literal_formula(table.literal(c)), code)
        used = sorted({index for r in refutations for index in r.clauses_used})
        for index in used:
            builder.premise(index, clause_formula(clauses[index]))
        builder.goal(goal, {}, list(refutations))
        proof = Proof(goal, tuple(builder.steps))
    monitoring.record_histogram("theory.query.seconds", time.time() - started)
    logger.debug(
        f"Query proved - goal: {goal}",
        clauses=len(clauses),
        steps=len(proof) if proof is not None else None,
    )
    return ProofResult(True, proof=proof)


def entails(th: Theory, qs: Query, atom_budget: Optional[int] = None) -> bool:
    return prove(th, qs, with_proof=False, atom_budget=atom_budget).holds


def premises_for(th: Theory, goal: Formula) -> FrozenSet[Formula]:
    """Formulas a proof of `goal` may assume at depth 0"""
    _, clauses = _compile(th, atoms_of(goal), None)
    return frozenset(clause_formula(c) for c in clauses)


def check_proof(th: Theory, proof: Proof) -> bool:
    """Independent verification of a proof against the theory and the background axioms"""
    if not proof.steps:
        return False
    try:
        premises = premises_for(th, proof.goal)
    except (ValueError, KeyError, AttributeError):
        return False
    return check_steps(proof, premises)
