"""
Meaning of constraints: evaluation on rows, clausal form, static status and the traversal order
"""

from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

from lawmine.errors import TypeMismatch, UnboundVariable

from .intervals import Interval, Truth, constant_pieces, covers, predicate_truth
from .terms import Connective, Constraint, Literal, Op, Predicate, Provenance, Vocabulary, normalize_value, to_rational

Row = Mapping[str, Any]
Clause = FrozenSet[Literal]


class Status(str, Enum):
    TAUTOLOGY = "tautology"
    CONTRADICTION = "contradiction"
    CONTINGENT = "contingent"


class Order(str, Enum):
    MORE_SPECIFIC = "more_specific"
    MORE_GENERAL = "more_general"
    EQUAL = "equal"
    INCOMPARABLE = "incomparable"


def _cell(row: Row, name: str):
    if name not in row:
        raise UnboundVariable(name)
    value = normalize_value(row[name])
    if value is None:
        raise UnboundVariable(name)
    return value


def _compare(left, op: Op, right) -> bool:
    if op is Op.EQ:
        return left == right
    if op is Op.NE:
        return left != right
    if op is Op.LT:
        return left < right
    if op is Op.LE:
        return left <= right
    if op is Op.GT:
        return left > right
    return left >= right


def evaluate_predicate(predicate: Predicate, row: Row) -> bool:
    value = _cell(row, predicate.subject)
    if predicate.is_linear:
        other = _cell(row, predicate.obj.variable)
        if isinstance(value, str) or isinstance(other, str):
            raise TypeMismatch(f"linear comparison on nominal value in {predicate}", predicate.subject)
        return _compare(to_rational(value), predicate.op, predicate.obj.value(other))
    obj = predicate.obj
    if predicate.op.is_ordinal:
        if isinstance(value, str) or isinstance(obj, str):
            raise TypeMismatch(f"nominal value compared ordinally in {predicate}", predicate.subject)
        return _compare(value, predicate.op, obj)
    if isinstance(value, str) != isinstance(obj, str):
        # "53" cells against 53 constants: compare printed forms
        return _compare(str(value), predicate.op, str(obj))
    return _compare(value, predicate.op, obj)


def is_evaluable(constraint: Constraint, row: Row) -> bool:
    """Every variable of the constraint is present and non-null"""
    return all(normalize_value(row.get(name)) is not None for name in constraint.variables)


def evaluate(constraint: Constraint, row: Row) -> bool:
    """Truth of the constraint on one row; a false antecedent makes it true"""
    for name in sorted(constraint.variables):
        _cell(row, name)
    if not all(evaluate_predicate(p, row) for p in constraint.antecedent):
        return True
    if constraint.connective is Connective.OR:
        return any(evaluate_predicate(p, row) for p in constraint.consequent)
    return all(evaluate_predicate(p, row) for p in constraint.consequent)


def arity(constraint: Constraint) -> int:
    return constraint.arity


@dataclass(frozen=True)
class ClauseSet:
    """CNF: a set of non-empty, non-tautological disjunctions"""

    clauses: FrozenSet[Clause]

    def __iter__(self):
        return iter(sorted(self.clauses, key=clause_key))

    def __len__(self) -> int:
        return len(self.clauses)

    @property
    def atoms(self) -> FrozenSet[Predicate]:
        return frozenset(lit.atom for clause in self.clauses for lit in clause)

    def union(self, other: "ClauseSet") -> "ClauseSet":
        return ClauseSet(self.clauses | other.clauses)

    def evaluate(self, row: Row) -> bool:
        return all(any(_literal_holds(lit, row) for lit in clause) for clause in self.clauses)


def clause_key(clause: Clause) -> Tuple[int, str]:
    return (len(clause), " | ".join(sorted(str(lit) for lit in clause)))


def _literal_holds(literal: Literal, row: Row) -> bool:
    return evaluate_predicate(literal.atom, row) == literal.positive


def _clause(literals: Iterable[Literal]) -> Optional[Clause]:
    clause = frozenset(literals)
    if any(lit.negate() in clause for lit in clause):
        return None
    return clause


def clausify(constraint: Constraint) -> ClauseSet:
    """A1 & ... & Ak -> C  becomes  one clause per conjunct of C (or one clause for a disjunction)"""
    negated_antecedent = [Literal.of(p).negate() for p in constraint.antecedent]
    if constraint.connective is Connective.OR:
        groups = [constraint.consequent]
    else:
        groups = [(p,) for p in constraint.consequent]
    clauses = set()
    for group in groups:
        clause = _clause(negated_antecedent + [Literal.of(p) for p in group])
        if clause is not None:
            clauses.add(clause)
    return ClauseSet(frozenset(clauses))


def clause_to_constraint(clause: Clause, provenance: Provenance = Provenance.USER_QUERY) -> Constraint:
    """Disjunctive fact equivalent to the clause"""
    return Constraint.fact(*(lit.as_predicate() for lit in clause), connective=Connective.OR, provenance=provenance)


def literal_truth(literal: Literal, vocab: Vocabulary) -> Truth:
    truth = predicate_truth(literal.atom, vocab)
    if truth is Truth.UNKNOWN or literal.positive:
        return truth
    return Truth.FALSE if truth is Truth.TRUE else Truth.TRUE


def _single_variable(literal: Literal) -> bool:
    return not literal.atom.is_linear


def _clause_covers_domain(clause: Clause, vocab: Vocabulary) -> bool:
    """Literals over one variable whose solution sets jointly cover its domain"""
    by_variable: Dict[str, List[Predicate]] = defaultdict(list)
    for lit in clause:
        if _single_variable(lit):
            by_variable[lit.atom.subject].append(lit.as_predicate())
    for name, predicates in by_variable.items():
        var = vocab.get(name)
        if var is None or len(predicates) < 2:
            continue
        if var.is_nominal:
            allowed = set()
            for p in predicates:
                if p.op is Op.EQ:
                    allowed.add(var.coerce(p.obj))
                elif p.op is Op.NE:
                    allowed |= set(var.values) - {var.coerce(p.obj)}
            if allowed >= set(var.values):
                return True
        elif all(not isinstance(p.obj, str) for p in predicates):
            pieces = [piece for p in predicates for piece in constant_pieces(p)]
            if covers(Interval.of(var), pieces):
                return True
    return False


def _units_conflict(units: List[Literal], vocab: Vocabulary) -> bool:
    """Unit clauses over a single variable with an empty joint solution set"""
    bounds: Dict[str, Interval] = {}
    allowed: Dict[str, set] = {}
    strict: Dict[str, List[Predicate]] = defaultdict(list)
    for lit in units:
        if not _single_variable(lit):
            continue
        p = lit.as_predicate()
        var = vocab.get(p.subject)
        if var is None:
            continue
        if var.is_nominal:
            if p.op.is_ordinal:
                continue
            current = allowed.setdefault(var.name, set(var.values))
            value = var.coerce(p.obj)
            current &= {value} if p.op is Op.EQ else current - {value}
            if not current:
                return True
            continue
        if isinstance(p.obj, str):
            continue
        t = to_rational(p.obj)
        interval = bounds.get(var.name, Interval.of(var))
        lo, hi = interval.lo, interval.hi
        if p.op in (Op.GE, Op.GT, Op.EQ):
            lo = t if lo is None else max(lo, t)
        if p.op in (Op.LE, Op.LT, Op.EQ):
            hi = t if hi is None else min(hi, t)
        if p.op in (Op.GT, Op.LT):
            strict[var.name].append(p)
        if lo is not None and hi is not None and lo > hi:
            return True
        bounds[var.name] = Interval(lo, hi)
    for name, predicates in strict.items():
        interval = bounds[name]
        if interval.lo is None or interval.hi is None or interval.lo != interval.hi:
            continue
        point = {p.subject: interval.lo for p in predicates}
        if not all(evaluate_predicate(p, point) for p in predicates):
            return True
    return False


def static_status(constraint: Constraint, vocab: Vocabulary) -> Status:
    """Tautology/contradiction from structure, domains and interval bounds alone"""
    clauses = clausify(constraint).clauses
    tautology = True
    units: List[Literal] = []
    for clause in clauses:
        truths = [literal_truth(lit, vocab) for lit in clause]
        if all(t is Truth.FALSE for t in truths):
            return Status.CONTRADICTION
        if not (any(t is Truth.TRUE for t in truths) or _clause_covers_domain(clause, vocab)):
            tautology = False
        live = [lit for lit, t in zip(clause, truths) if t is not Truth.FALSE]
        if len(live) == 1:
            units.append(live[0])
    if tautology:
        return Status.TAUTOLOGY
    if _units_conflict(units, vocab):
        return Status.CONTRADICTION
    return Status.CONTINGENT


def traversal_key(constraint: Constraint) -> Tuple[int, str]:
    """Succinct first, then printed form"""
    return (constraint.arity, str(constraint))


def compare(c1: Constraint, c2: Constraint, atom_budget: Optional[int] = None) -> Order:
    """Augmented order: smaller arity first; equal arity decided by entailment"""
    if c1.arity != c2.arity:
        return Order.MORE_SPECIFIC if c1.arity < c2.arity else Order.MORE_GENERAL
    if c1 == c2:
        return Order.EQUAL

    from lawmine.theory.prover import build_theory, entails

    forward = entails(build_theory([c1]), [c2], atom_budget=atom_budget)
    backward = entails(build_theory([c2]), [c1], atom_budget=atom_budget)
    if forward and backward:
        return Order.EQUAL
    if forward:
        return Order.MORE_SPECIFIC
    if backward:
        return Order.MORE_GENERAL
    return Order.INCOMPARABLE