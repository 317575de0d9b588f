"""
Atom numbering and the background axioms that tie threshold, equality and domain atoms together
"""

from collections import defaultdict
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Set, Tuple

from lawmine.language.intervals import Truth, predicate_truth
from lawmine.language.semantics import Clause, clause_key
from lawmine.language.terms import Literal, Op, Predicate, Vocabulary, is_numeric, value_sort_key


class AtomTable:
    """Dense 1-based ids for canonical atoms; a literal is +id or -id"""

    def __init__(self):
        self._ids: Dict[Predicate, int] = {}
        self._atoms: List[Predicate] = []

    def intern(self, atom: Predicate) -> int:
        code = self._ids.get(atom)
        if code is None:
            self._atoms.append(atom)
            code = self._ids[atom] = len(self._atoms)
        return code

    def __len__(self) -> int:
        return len(self._atoms)

    def __contains__(self, atom: object) -> bool:
        return atom in self._ids

    def __iter__(self) -> Iterator[Predicate]:
        return iter(self._atoms)

    def atom(self, code: int) -> Predicate:
        return self._atoms[abs(code) - 1]

    def literal_id(self, literal: Literal) -> int:
        code = self._ids[literal.atom]
        return code if literal.positive else -code

    def literal(self, code: int) -> Literal:
        return Literal(self.atom(code), code > 0)


def _neg(atom: Predicate) -> Literal:
    return Literal(atom, False)


def _pos(atom: Predicate) -> Literal:
    return Literal(atom, True)


def _close_domains(atoms: Set[Predicate], vocab: Vocabulary) -> List[Clause]:
    """Every mentioned nominal variable takes one of its domain values"""
    clauses = []
    mentioned = sorted({a.subject for a in atoms if a.op is Op.EQ and not a.is_linear})
    for name in mentioned:
        var = vocab.get(name)
        if var is None or not var.is_nominal:
            continue
        domain = [Predicate(name, Op.EQ, v) for v in var.values]
        atoms.update(domain)
        clauses.append(frozenset(_pos(a) for a in domain))
    return clauses


def _is_ordinal_subject(name: str, atoms: Set[Predicate], vocab: Optional[Vocabulary]) -> bool:
    if vocab is not None and name in vocab:
        return not vocab[name].is_nominal
    return any(a.subject == name and a.op is not Op.EQ and not a.is_linear for a in atoms)


def _link_equalities(atoms: Set[Predicate], vocab: Optional[Vocabulary]) -> List[Clause]:
    """X=v iff X>=v and X<=v, for equalities against a numeric or linear right-hand side on ordinal subjects"""
    clauses = []
    for eq in sorted(a for a in atoms if a.op is Op.EQ):
        if not eq.is_linear and not (is_numeric(eq.obj) and _is_ordinal_subject(eq.subject, atoms, vocab)):
            continue
        ge, le = Predicate(eq.subject, Op.GE, eq.obj), Predicate(eq.subject, Op.LE, eq.obj)
        if eq.is_linear and (ge not in atoms or le not in atoms):
            continue
        atoms.update((ge, le))
        clauses.append(frozenset((_neg(eq), _pos(ge))))
        clauses.append(frozenset((_neg(eq), _pos(le))))
        clauses.append(frozenset((_pos(eq), _neg(ge), _neg(le))))
    return clauses


def _threshold_axioms(subject: str, ge: List, le: List) -> List[Clause]:
    """Ladders within each direction plus the exclusion and covering links across them"""
    clauses = []
    up = [Predicate(subject, Op.GE, t) for t in ge]
    down = [Predicate(subject, Op.LE, t) for t in le]
    for lower, higher in zip(up, up[1:]):
        clauses.append(frozenset((_neg(higher), _pos(lower))))
    for lower, higher in zip(down, down[1:]):
        clauses.append(frozenset((_neg(lower), _pos(higher))))
    for g, atom in zip(ge, up):
        below = [i for i, t in enumerate(le) if t < g]
        if below:
            clauses.append(frozenset((_neg(atom), _neg(down[below[-1]]))))
        above = [i for i, t in enumerate(le) if t >= g]
        if above:
            clauses.append(frozenset((_pos(atom), _pos(down[above[0]]))))
    return clauses


def saturate(atoms: Iterable[Predicate], vocab: Optional[Vocabulary] = None) -> Tuple[FrozenSet[Predicate], List[Clause]]:
    """
    Background clauses valid in every row for the given atoms, and the atom set they range over.

    Ordinal reasoning is over the reals, so integer-only consequences (X>2 entails X>=3) are not
    derived. With a vocabulary, declared domains contribute closure and bound axioms.
    """
    pool: Set[Predicate] = set(atoms)
    clauses: List[Clause] = []
    if vocab is not None:
        clauses += _close_domains(pool, vocab)
    clauses += _link_equalities(pool, vocab)

    thresholds: Dict[str, Dict[Op, Set]] = defaultdict(lambda: {Op.GE: set(), Op.LE: set()})
    linear: Dict[Tuple[str, object], Set[Op]] = defaultdict(set)
    equalities: Dict[str, List[Predicate]] = defaultdict(list)
    for atom in pool:
        if atom.is_linear:
            linear[(atom.subject, atom.obj)].add(atom.op)
        elif atom.op is Op.EQ:
            equalities[atom.subject].append(atom)
        elif is_numeric(atom.obj):
            thresholds[atom.subject][atom.op].add(atom.obj)

    for subject in sorted(thresholds):
        ops = thresholds[subject]
        clauses += _threshold_axioms(subject, sorted(ops[Op.GE]), sorted(ops[Op.LE]))
    for subject in sorted(equalities):
        values = sorted(equalities[subject], key=lambda a: value_sort_key(a.obj))
        for a, b in combinations(values, 2):
            clauses.append(frozenset((_neg(a), _neg(b))))
    for (subject, term), ops in sorted(linear.items(), key=lambda item: (item[0][0], str(item[0][1]))):
        if Op.GE in ops and Op.LE in ops:
            ge, le = Predicate(subject, Op.GE, term), Predicate(subject, Op.LE, term)
            clauses.append(frozenset((_pos(ge), _pos(le))))

    if vocab is not None:
        for atom in sorted(pool):
            truth = predicate_truth(atom, vocab)
            if truth is Truth.TRUE:
                clauses.append(frozenset((_pos(atom),)))
            elif truth is Truth.FALSE:
                clauses.append(frozenset((_neg(atom),)))

    unique = sorted(set(clauses), key=clause_key)
    return frozenset(pool), unique
