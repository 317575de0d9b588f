"""
Candidates of the constraint lattice and the predicate pool they are built from.

A candidate is clause-shaped: a conjunction of antecedent predicates implying a disjunction of
consequent predicates. At most one ordinal predicate per candidate is a threshold slot whose bound
walks along a ladder of observed values during refinement.
"""

from collections import defaultdict
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from itertools import combinations, permutations
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from lawmine.errors import LanguageError
from lawmine.evaluation import SampleTable
from lawmine.language.intervals import Truth, predicate_truth
from lawmine.language.semantics import Status, static_status
from lawmine.language.terms import (
    Bias,
    Connective,
    Constraint,
    LinearTerm,
    Literal,
    Op,
    Predicate,
    Provenance,
    Value,
    Vocabulary,
    value_sort_key,
)


class Side(str, Enum):
    ANTECEDENT = "antecedent"
    CONSEQUENT = "consequent"


class CandidateStatus(str, Enum):
    LIVE = "live"
    ELIMINATED = "eliminated"
    LEARNED = "learned"


# clause-view literal of each slot template: (side, op) -> printed operator
_SLOT_LITERAL_OP = {
    (Side.CONSEQUENT, Op.GE): ">=",
    (Side.CONSEQUENT, Op.LE): "<=",
    (Side.ANTECEDENT, Op.GE): "<",
    (Side.ANTECEDENT, Op.LE): ">",
}


def walks_down(side: Side, op: Op) -> bool:
    """Consequent lower bounds and antecedent upper bounds relax towards the domain minimum"""
    return (side is Side.CONSEQUENT) == (op is Op.GE)


def thin_ladder(values: Sequence[Value], granularity: int) -> List[Value]:
    """At most `granularity` evenly spaced rungs, keeping both ends; 0 keeps every value"""
    values = list(values)
    if granularity <= 0 or len(values) <= granularity:
        return values
    picks = np.unique(np.linspace(0, len(values) - 1, num=max(granularity, 2)).round().astype(int))
    return [values[i] for i in picks]


@dataclass(frozen=True)
class ThresholdSlot:
    """An ordinal bound `variable op threshold`; `ladder` is in walk order, `cursor` only moves forward"""

    variable: str
    op: Op
    side: Side
    ladder: Tuple[Value, ...]
    cursor: int = 0

    @classmethod
    def start(cls, variable: str, op: Op, side: Side, rungs: Iterable[Value]) -> "ThresholdSlot":
        ascending = sorted(set(rungs), key=value_sort_key)
        ladder = tuple(reversed(ascending)) if walks_down(side, op) else tuple(ascending)
        return cls(variable, op, side, ladder, 0)

    @property
    def threshold(self) -> Value:
        return self.ladder[self.cursor]

    @property
    def predicate(self) -> Predicate:
        return Predicate(self.variable, self.op, self.threshold)

    @property
    def template_key(self) -> str:
        return f"{self.variable}{_SLOT_LITERAL_OP[(self.side, self.op)]}?"

    def extended(self, values: Iterable[Value]) -> "ThresholdSlot":
        """Merge newly observed rungs, keeping the current threshold under the cursor"""
        merged = set(self.ladder) | set(values)
        if len(merged) == len(self.ladder):
            return self
        fresh = ThresholdSlot.start(self.variable, self.op, self.side, merged)
        return replace(fresh, cursor=fresh.ladder.index(self.threshold))

    def advance(self, accept: Callable[[Value], bool]) -> Optional["ThresholdSlot"]:
        """First rung at or after the cursor accepted by `accept`; None when the ladder is exhausted"""
        for index in range(self.cursor, len(self.ladder)):
            if accept(self.ladder[index]):
                return self if index == self.cursor else replace(self, cursor=index)
        return None

    def reset(self) -> "ThresholdSlot":
        return replace(self, cursor=0) if self.cursor else self


@dataclass(frozen=True)
class Candidate:
    """A constraint under consideration; `antecedent` and `consequent` exclude the slot predicate"""

    antecedent: Tuple[Predicate, ...] = ()
    consequent: Tuple[Predicate, ...] = ()
    slot: Optional[ThresholdSlot] = None
    status: CandidateStatus = CandidateStatus.LIVE
    provenance: Provenance = field(default=Provenance.SEEDED, compare=False)

    @property
    def full_antecedent(self) -> Tuple[Predicate, ...]:
        if self.slot is not None and self.slot.side is Side.ANTECEDENT:
            return self.antecedent + (self.slot.predicate,)
        return self.antecedent

    @property
    def full_consequent(self) -> Tuple[Predicate, ...]:
        if self.slot is not None and self.slot.side is Side.CONSEQUENT:
            return self.consequent + (self.slot.predicate,)
        return self.consequent

    @property
    def size(self) -> int:
        return len(self.antecedent) + len(self.consequent) + (1 if self.slot is not None else 0)

    @property
    def variables(self) -> FrozenSet[str]:
        names = set()
        for p in self.antecedent + self.consequent:
            names |= p.variables
        if self.slot is not None:
            names.add(self.slot.variable)
        return frozenset(names)

    @property
    def arity(self) -> int:
        return len(self.variables)

    def fixed_literals(self) -> FrozenSet[Literal]:
        """Clause literals of the non-slot predicates"""
        return frozenset([Literal.of(p).negate() for p in self.antecedent] + [Literal.of(p) for p in self.consequent])

    def clause(self) -> FrozenSet[Literal]:
        """Clause literals with the slot at its current threshold"""
        literals = set(self.fixed_literals())
        if self.slot is not None:
            literal = Literal.of(self.slot.predicate)
            literals.add(literal.negate() if self.slot.side is Side.ANTECEDENT else literal)
        return frozenset(literals)

    def literal_keys(self) -> FrozenSet[str]:
        keys = {str(lit) for lit in self.fixed_literals()}
        if self.slot is not None:
            keys.add(self.slot.template_key)
        return frozenset(keys)

    @property
    def key(self) -> Tuple[str, ...]:
        """Identity up to placement and slot position"""
        return tuple(sorted(self.literal_keys()))

    def to_constraint(self) -> Constraint:
        consequent = self.full_consequent
        connective = Connective.OR if len(consequent) > 1 else Connective.AND
        return Constraint(self.full_antecedent, consequent, connective, self.provenance)

    def emit(self, vocab: Vocabulary) -> Optional[Constraint]:
        """Learned form with statically true antecedent and statically false consequent predicates dropped"""
        antecedent = [p for p in self.full_antecedent if predicate_truth(p, vocab) is not Truth.TRUE]
        consequent = [p for p in self.full_consequent if predicate_truth(p, vocab) is not Truth.FALSE]
        if not consequent:
            return None
        connective = Connective.OR if len(consequent) > 1 else Connective.AND
        return Constraint(tuple(antecedent), tuple(consequent), connective, self.provenance)

    def with_status(self, status: CandidateStatus) -> "Candidate":
        return replace(self, status=status)

    def __str__(self) -> str:
        return str(self.to_constraint())


def clause_admissible(
    literals: Iterable[Literal],
    vocab: Vocabulary,
    arity_limit: int,
    bias: Optional[Bias] = None,
) -> bool:
    """Shape rules shared by the lattice and the exhaustive oracle"""
    literals = list(literals)
    if not literals or len(literals) > 2 * arity_limit - 1:
        return False
    names = set()
    for lit in literals:
        names |= lit.atom.variables
    if len(names) > arity_limit:
        return False
    if bias is not None and bias.excluded_pairs:
        if any(bias.pair_excluded(a, b) for a, b in combinations(sorted(names), 2)):
            return False
    by_subject: Dict[str, List[Literal]] = defaultdict(list)
    thresholds = 0
    linear = 0
    for lit in literals:
        by_subject[lit.atom.subject].append(lit)
        if lit.atom.is_linear:
            linear += 1
            if not lit.positive:
                return False
        elif lit.atom.op.is_ordinal:
            thresholds += 1
    if thresholds > 1 or linear > 1:
        return False
    for subject, group in by_subject.items():
        var = vocab.get(subject)
        if var is None:
            return False
        if var.is_nominal:
            if len(group) > 1 and not all(lit.positive and lit.atom.op is Op.EQ for lit in group):
                return False
        elif len(group) > 1:
            return False
    return True


def is_admissible(candidate: Candidate, vocab: Vocabulary, arity_limit: int, bias: Optional[Bias] = None) -> bool:
    """Shape rules plus side limits and a contingent static status"""
    if not candidate.full_consequent or len(candidate.full_consequent) > arity_limit:
        return False
    if len(candidate.full_antecedent) > arity_limit - 1:
        return False
    clause = candidate.clause()
    if len(clause) != candidate.size or not clause_admissible(clause, vocab, arity_limit, bias):
        return False
    if candidate.slot is not None and len(candidate.slot.ladder) < 2:
        return False
    try:
        return static_status(candidate.to_constraint(), vocab) is Status.CONTINGENT
    except LanguageError:
        return False


def _implies_predicate(p: Predicate, q: Predicate) -> bool:
    """Solution set of p inside that of q, for constant predicates on one subject"""
    if p == q:
        return True
    if p.is_linear or q.is_linear or p.subject != q.subject:
        return False
    a, b = p.obj, q.obj
    if isinstance(a, str) or isinstance(b, str):
        return p.op is Op.EQ and q.op is Op.NE and a != b
    if p.op is Op.EQ:
        return _holds(a, q.op, b)
    if q.op is Op.NE:
        if p.op in (Op.GE, Op.GT):
            return a > b or (a == b and p.op is Op.GT)
        if p.op in (Op.LE, Op.LT):
            return a < b or (a == b and p.op is Op.LT)
        return False
    if p.op in (Op.GE, Op.GT) and q.op in (Op.GE, Op.GT):
        return a > b or (a == b and (q.op is Op.GE or p.op is Op.GT))
    if p.op in (Op.LE, Op.LT) and q.op in (Op.LE, Op.LT):
        return a < b or (a == b and (q.op is Op.LE or p.op is Op.LT))
    return False


def _holds(value: Value, op: Op, bound: Value) -> bool:
    return {
        Op.EQ: value == bound,
        Op.NE: value != bound,
        Op.LT: value < bound,
        Op.LE: value <= bound,
        Op.GT: value > bound,
        Op.GE: value >= bound,
    }[op]


def literal_implies(l1: Literal, l2: Literal) -> bool:
    return _implies_predicate(l1.as_predicate(), l2.as_predicate())


def clause_subsumes(general: Iterable[Literal], specific: Iterable[Literal]) -> bool:
    """Every literal of `general` implies some literal of `specific`, so general entails specific"""
    specific = list(specific)
    return all(any(literal_implies(g, s) for s in specific) for g in general)


class SubsumptionIndex:
    """Learned clauses bucketed by variable set for subsumption lookups"""

    def __init__(self):
        self._buckets: Dict[FrozenSet[str], Dict[str, FrozenSet[Literal]]] = defaultdict(dict)

    @staticmethod
    def _variables(clause: Iterable[Literal]) -> FrozenSet[str]:
        names = set()
        for lit in clause:
            names |= lit.atom.variables
        return frozenset(names)

    def add(self, key: str, clause: FrozenSet[Literal]) -> None:
        self._buckets[self._variables(clause)][key] = clause

    def subsumes(self, literals: FrozenSet[Literal], names: FrozenSet[str]) -> bool:
        if not literals:
            return False
        ordered = sorted(names)
        for size in range(1, len(ordered) + 1):
            for subset in combinations(ordered, size):
                for clause in self._buckets.get(frozenset(subset), {}).values():
                    if clause_subsumes(clause, literals):
                        return True
        return False


@dataclass(frozen=True)
class PredicatePool:
    """Nominal predicates, per-variable threshold rungs and linear predicates"""

    nominal: Tuple[Predicate, ...]
    rungs: Dict[str, Tuple[Value, ...]] = field(hash=False)
    linear: Tuple[Predicate, ...]

    def thresholds(self) -> List[Predicate]:
        return [Predicate(name, op, v) for name, values in self.rungs.items() for v in values for op in (Op.GE, Op.LE)]

    def predicates(self) -> List[Predicate]:
        return list(self.nominal) + self.thresholds() + list(self.linear)


def ladder_rungs(table: SampleTable, vocab: Vocabulary, name: str, granularity: int = 0) -> Tuple[Value, ...]:
    """Observed values inside the domain plus both domain endpoints, ascending"""
    var = vocab[name]
    observed = [v for v in table.distinct(name) if not isinstance(v, str) and var.low <= v <= var.high]
    rungs = set(thin_ladder(observed, granularity)) | {var.low, var.high}
    return tuple(sorted(rungs))


def linear_predicates(vocab: Vocabulary, bias: Bias) -> List[Predicate]:
    ordinal = [v.name for v in vocab if not v.is_nominal]
    result = []
    for x, y in permutations(ordinal, 2):
        if bias.pair_excluded(x, y):
            continue
        for c in bias.coefficients:
            # X >= Y and Y <= X coincide
            if c == 1 and x > y:
                continue
            for op in (Op.GE, Op.LE):
                result.append(Predicate(x, op, LinearTerm(y, Fraction(c))))
    return result


def _contingent(predicate: Predicate, vocab: Vocabulary) -> bool:
    return predicate_truth(predicate, vocab) is Truth.UNKNOWN


def build_pool(vocab: Vocabulary, table: SampleTable, bias: Optional[Bias] = None, granularity: int = 0) -> PredicatePool:
    bias = bias or Bias()
    nominal = []
    rungs = {}
    for var in vocab:
        if var.is_nominal:
            for value in var.values:
                for op in (Op.EQ, Op.NE):
                    p = Predicate(var.name, op, value)
                    if _contingent(p, vocab):
                        nominal.append(p)
        elif var.low != var.high:
            rungs[var.name] = ladder_rungs(table, vocab, var.name, granularity)
    linear = [p for p in linear_predicates(vocab, bias) if _contingent(p, vocab)]
    return PredicatePool(tuple(nominal), rungs, tuple(linear))


def generate_predicates(
    vocab: Vocabulary, table: SampleTable, bias: Optional[Bias] = None, granularity: int = 0
) -> List[Predicate]:
    """Domain-checked predicates over the vocabulary; statically decided ones are dropped"""
    pool = build_pool(vocab, table, bias, granularity)
    return [p for p in pool.predicates() if _contingent(p, vocab)]


@dataclass
class Frontier:
    """The two materialised layers of the lattice"""

    current_layer: List[Candidate]
    next_layer: List[Candidate] = field(default_factory=list)
    layer_index: int = 0

    @property
    def live_layers(self) -> int:
        return int(bool(self.current_layer)) + int(bool(self.next_layer))


def dedupe(candidates: Iterable[Candidate]) -> List[Candidate]:
    """First candidate per clause identity, in input order"""
    seen = set()
    result = []
    for candidate in candidates:
        key = candidate.key
        if key not in seen:
            seen.add(key)
            result.append(candidate)
    return result


def _slot_templates(pool: PredicatePool, side: Side) -> List[ThresholdSlot]:
    return [ThresholdSlot.start(name, op, side, rungs) for name, rungs in pool.rungs.items() for op in (Op.GE, Op.LE)]


def seed_candidates(
    pool: PredicatePool, vocab: Vocabulary, arity_limit: int, bias: Optional[Bias] = None
) -> Frontier:
    """Layer 0 holds bare predicates, layer 1 single-antecedent single-consequent implications"""
    facts = [Candidate(consequent=(p,)) for p in pool.nominal + pool.linear]
    facts += [Candidate(slot=slot) for slot in _slot_templates(pool, Side.CONSEQUENT)]
    layer0 = dedupe(c for c in facts if is_admissible(c, vocab, arity_limit, bias))

    seeds: List[Candidate] = []
    if arity_limit >= 2:
        antecedents: List[Tuple[Optional[Predicate], Optional[ThresholdSlot]]] = [(p, None) for p in pool.nominal]
        antecedents += [(None, s) for s in _slot_templates(pool, Side.ANTECEDENT)]
        consequents: List[Tuple[Optional[Predicate], Optional[ThresholdSlot]]] = [
            (p, None) for p in pool.nominal + pool.linear
        ]
        consequents += [(None, s) for s in _slot_templates(pool, Side.CONSEQUENT)]
        for ante_pred, ante_slot in antecedents:
            ante_vars = ante_pred.variables if ante_pred is not None else frozenset((ante_slot.variable,))
            for cons_pred, cons_slot in consequents:
                if ante_slot is not None and cons_slot is not None:
                    continue
                cons_vars = cons_pred.variables if cons_pred is not None else frozenset((cons_slot.variable,))
                if ante_vars & cons_vars:
                    continue
                candidate = Candidate(
                    antecedent=(ante_pred,) if ante_pred is not None else (),
                    consequent=(cons_pred,) if cons_pred is not None else (),
                    slot=ante_slot or cons_slot,
                )
                if is_admissible(candidate, vocab, arity_limit, bias):
                    seeds.append(candidate)
    return Frontier(current_layer=layer0, next_layer=dedupe(seeds), layer_index=0)
