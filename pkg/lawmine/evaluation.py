"""
Vectorised evaluation of predicates and constraints over row tables
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from lawmine.errors import TypeMismatch, UnboundVariable
from lawmine.ingest import Dataset
from lawmine.language.terms import Connective, Constraint, Literal, Op, Predicate, Value, to_rational, value_sort_key

_INT64_LIMIT = 2**62


@dataclass(frozen=True)
class Column:
    """Cells of one variable: object values, a defined mask and an int64 view when all cells are integers"""

    values: np.ndarray
    defined: np.ndarray
    ints: Optional[np.ndarray]
    numeric: bool
    textual: bool

    @classmethod
    def build(cls, cells: Sequence) -> "Column":
        defined = np.fromiter((c is not None for c in cells), dtype=bool, count=len(cells))
        present = [c for c in cells if c is not None]
        textual = any(isinstance(c, str) for c in present)
        numeric = not textual
        ints = None
        if numeric and all(isinstance(c, int) and abs(c) < _INT64_LIMIT for c in present):
            ints = np.fromiter((c if c is not None else 0 for c in cells), dtype=np.int64, count=len(cells))
        fill = "" if textual else 0
        values = np.empty(len(cells), dtype=object)
        values[:] = [c if c is not None else fill for c in cells]
        return cls(values, defined, ints, numeric, textual)


class SampleTable:
    """Column-oriented view of a set of rows; predicate masks are memoised"""

    def __init__(self, columns: Dict[str, Column], row_count: int, indices: Optional[np.ndarray] = None):
        self.columns = columns
        self.row_count = row_count
        self.indices = indices if indices is not None else np.arange(row_count)
        self._cache: Dict[Predicate, Tuple[np.ndarray, np.ndarray]] = {}
        self._distinct: Dict[str, Tuple[Value, ...]] = {}

    @classmethod
    def from_dataset(cls, d: Dataset, indices: Optional[Sequence[int]] = None) -> "SampleTable":
        frame = d.frame if indices is None else d.frame.iloc[list(indices)]
        columns = {}
        for name in frame.columns:
            cells = [None if (v is None or (isinstance(v, float) and v != v)) else v for v in frame[name].tolist()]
            columns[name] = Column.build(cells)
        idx = np.arange(len(frame)) if indices is None else np.asarray(list(indices), dtype=np.int64)
        return cls(columns, len(frame), idx)

    @classmethod
    def from_rows(cls, rows: Iterable[Dict], names: Iterable[str]) -> "SampleTable":
        rows = list(rows)
        names = list(names)
        columns = {n: Column.build([r.get(n) for r in rows]) for n in names}
        return cls(columns, len(rows))

    def column(self, name: str) -> Column:
        try:
            return self.columns[name]
        except KeyError:
            raise UnboundVariable(name) from None

    def predicate_mask(self, predicate: Predicate) -> Tuple[np.ndarray, np.ndarray]:
        """(truth, defined); truth is False wherever a cell is null"""
        cached = self._cache.get(predicate)
        if cached is None:
            cached = _predicate_mask(self, predicate)
            self._cache[predicate] = cached
        return cached

    def literal_mask(self, literal: Literal) -> Tuple[np.ndarray, np.ndarray]:
        truth, defined = self.predicate_mask(literal.atom)
        if literal.positive:
            return truth, defined
        return defined & ~truth, defined

    def defined_mask(self, names: Iterable[str]) -> np.ndarray:
        mask = np.ones(self.row_count, dtype=bool)
        for name in names:
            mask &= self.column(name).defined
        return mask

    def distinct(self, name: str) -> Tuple[Value, ...]:
        """Sorted distinct non-null values of a column"""
        cached = self._distinct.get(name)
        if cached is None:
            column = self.column(name)
            cached = tuple(sorted(set(column.values[column.defined].tolist()), key=value_sort_key))
            self._distinct[name] = cached
        return cached


def _compare(left, op: Op, right) -> np.ndarray:
    if op is Op.EQ:
        result = left == right
    elif op is Op.NE:
        result = left != right
    elif op is Op.LT:
        result = left < right
    elif op is Op.LE:
        result = left <= right
    elif op is Op.GT:
        result = left > right
    else:
        result = left >= right
    return np.asarray(result, dtype=bool)


def _int_threshold(ints: np.ndarray, op: Op, t: Fraction) -> np.ndarray:
    """Integer column against a rational threshold without leaving int64"""
    if op is Op.GE:
        return ints >= math.ceil(t)
    if op is Op.GT:
        return ints > math.floor(t)
    if op is Op.LE:
        return ints <= math.floor(t)
    if op is Op.LT:
        return ints < math.ceil(t)
    if t.denominator != 1:
        return np.full(len(ints), op is Op.NE)
    return _compare(ints, op, int(t))


def _scaled_fits(left: np.ndarray, right: np.ndarray, scale: int, factor: int, shift: int) -> bool:
    """Whether both scaled sides of a linear comparison stay inside int64"""
    bound = max(_abs_max(left), _abs_max(right)) * max(abs(scale), abs(factor)) + abs(shift)
    return bound < 2**63


def _abs_max(ints: np.ndarray) -> int:
    if not len(ints):
        return 0
    return max(abs(int(ints.max())), abs(int(ints.min())))


def _predicate_mask(table: SampleTable, predicate: Predicate) -> Tuple[np.ndarray, np.ndarray]:
    subject = table.column(predicate.subject)
    if predicate.is_linear:
        term = predicate.obj
        other = table.column(term.variable)
        if subject.textual or other.textual:
            raise TypeMismatch(f"linear comparison on nominal column in {predicate}", predicate.subject)
        defined = subject.defined & other.defined
        c, c0 = term.coefficient, term.offset
        scale = c.denominator * c0.denominator
        factor, shift = c.numerator * c0.denominator, c0.numerator * c.denominator
        exact = subject.ints is not None and other.ints is not None
        if exact and _scaled_fits(subject.ints, other.ints, scale, factor, shift):
            lhs = subject.ints * scale
            rhs = other.ints * factor + shift
            truth = _compare(lhs, predicate.op, rhs)
        else:
            rhs = np.array([term.value(v) for v in other.values], dtype=object)
            truth = _compare(subject.values, predicate.op, rhs)
        return truth & defined, defined

    obj = predicate.obj
    defined = subject.defined
    if predicate.op.is_ordinal:
        if subject.textual or isinstance(obj, str):
            raise TypeMismatch(f"nominal column compared ordinally in {predicate}", predicate.subject)
        if subject.ints is not None:
            truth = _int_threshold(subject.ints, predicate.op, to_rational(obj))
        else:
            truth = _compare(subject.values, predicate.op, obj)
        return truth & defined, defined

    if subject.ints is not None and not isinstance(obj, str):
        truth = _int_threshold(subject.ints, predicate.op, to_rational(obj))
    elif subject.textual != isinstance(obj, str):
        shown = str(obj)
        truth = np.fromiter((str(v) == shown for v in subject.values), dtype=bool, count=table.row_count)
        if predicate.op is Op.NE:
            truth = ~truth
    else:
        truth = _compare(subject.values, predicate.op, obj)
    return truth & defined, defined


def constraint_masks(table: SampleTable, constraint: Constraint) -> Tuple[np.ndarray, np.ndarray]:
    """(satisfied, evaluable) per row; rows that cannot be evaluated count as satisfied"""
    evaluable = table.defined_mask(sorted(constraint.variables))
    antecedent = np.ones(table.row_count, dtype=bool)
    for p in constraint.antecedent:
        antecedent &= table.predicate_mask(p)[0]
    if constraint.connective is Connective.OR:
        consequent = np.zeros(table.row_count, dtype=bool)
        for p in constraint.consequent:
            consequent |= table.predicate_mask(p)[0]
    else:
        consequent = np.ones(table.row_count, dtype=bool)
        for p in constraint.consequent:
            consequent &= table.predicate_mask(p)[0]
    satisfied = ~antecedent | consequent | ~evaluable
    return satisfied, evaluable


def violation_mask(table: SampleTable, constraint: Constraint) -> np.ndarray:
    satisfied, evaluable = constraint_masks(table, constraint)
    return evaluable & ~satisfied


def clause_violation_mask(table: SampleTable, literals: Iterable[Literal]) -> np.ndarray:
    """Rows where every literal of the clause is defined and false"""
    defined = np.ones(table.row_count, dtype=bool)
    any_true = np.zeros(table.row_count, dtype=bool)
    for lit in literals:
        truth, lit_defined = table.literal_mask(lit)
        defined &= lit_defined
        any_true |= truth
    return defined & ~any_true
