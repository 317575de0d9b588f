"""
Interval arithmetic over declared ordinal domains, used to decide predicates without data.
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, List, Optional, Tuple

from .terms import LinearTerm, Op, Predicate, Value, Variable, Vocabulary, to_rational

# None stands for an unbounded side
Bound = Optional[Fraction]


class Truth(Enum):
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Interval:
    """Closed rational interval [lo, hi]"""

    lo: Bound
    hi: Bound

    def __post_init__(self):
        if self.lo is not None and self.hi is not None and self.lo > self.hi:
            raise ValueError(f"Invalid interval: lo={self.lo} > hi={self.hi}")

    @classmethod
    def of(cls, variable: Optional[Variable]) -> "Interval":
        if variable is None or variable.is_nominal:
            return cls(None, None)
        return cls(to_rational(variable.low), to_rational(variable.high))

    @classmethod
    def point(cls, value: Value) -> "Interval":
        v = to_rational(value)
        return cls(v, v)

    def __add__(self, other: "Interval") -> "Interval":
        lo = None if self.lo is None or other.lo is None else self.lo + other.lo
        hi = None if self.hi is None or other.hi is None else self.hi + other.hi
        return Interval(lo, hi)

    def __neg__(self) -> "Interval":
        return Interval(None if self.hi is None else -self.hi, None if self.lo is None else -self.lo)

    def __sub__(self, other: "Interval") -> "Interval":
        return self + (-other)

    def scale(self, c: Fraction) -> "Interval":
        if c >= 0:
            return Interval(None if self.lo is None else self.lo * c, None if self.hi is None else self.hi * c)
        return (-self).scale(-c)

    def shift(self, c: Fraction) -> "Interval":
        return self + Interval(c, c)

    def contains(self, value: Fraction) -> bool:
        return (self.lo is None or self.lo <= value) and (self.hi is None or value <= self.hi)


def linear_interval(term: LinearTerm, vocab: Vocabulary) -> Interval:
    return Interval.of(vocab.get(term.variable)).scale(term.coefficient).shift(term.offset)


def _sign_truth(diff: Interval, op: Op) -> Truth:
    """Truth of `diff op 0` over every point of diff"""
    lo, hi = diff.lo, diff.hi
    if op is Op.GE:
        if lo is not None and lo >= 0:
            return Truth.TRUE
        if hi is not None and hi < 0:
            return Truth.FALSE
    elif op is Op.GT:
        if lo is not None and lo > 0:
            return Truth.TRUE
        if hi is not None and hi <= 0:
            return Truth.FALSE
    elif op is Op.LE:
        if hi is not None and hi <= 0:
            return Truth.TRUE
        if lo is not None and lo > 0:
            return Truth.FALSE
    elif op is Op.LT:
        if hi is not None and hi < 0:
            return Truth.TRUE
        if lo is not None and lo >= 0:
            return Truth.FALSE
    elif op is Op.EQ:
        if lo is not None and lo == hi == 0:
            return Truth.TRUE
        if not diff.contains(Fraction(0)):
            return Truth.FALSE
    elif op is Op.NE:
        if not diff.contains(Fraction(0)):
            return Truth.TRUE
        if lo is not None and lo == hi == 0:
            return Truth.FALSE
    return Truth.UNKNOWN


def predicate_truth(predicate: Predicate, vocab: Vocabulary) -> Truth:
    """Decide a predicate from declared domains alone"""
    subject = vocab.get(predicate.subject)
    if subject is None:
        return Truth.UNKNOWN

    if subject.is_nominal:
        if predicate.is_linear or predicate.op.is_ordinal:
            return Truth.UNKNOWN
        value = subject.coerce(predicate.obj)
        if value not in subject.values:
            return Truth.FALSE if predicate.op is Op.EQ else Truth.TRUE
        if len(subject.values) == 1:
            return Truth.TRUE if predicate.op is Op.EQ else Truth.FALSE
        return Truth.UNKNOWN

    if predicate.is_linear:
        other = vocab.get(predicate.obj.variable)
        if other is None or other.is_nominal:
            return Truth.UNKNOWN
        rhs = linear_interval(predicate.obj, vocab)
    else:
        if isinstance(predicate.obj, str):
            return Truth.UNKNOWN
        rhs = Interval.point(predicate.obj)
    return _sign_truth(Interval.of(subject) - rhs, predicate.op)


# Pieces of the real line: (lo, lo_closed, hi, hi_closed); None bounds are infinite
Piece = Tuple[Optional[Fraction], bool, Optional[Fraction], bool]


def constant_pieces(predicate: Predicate) -> List[Piece]:
    """Solution set of a single-variable ordinal predicate"""
    t = to_rational(predicate.obj)
    op = predicate.op
    if op is Op.GE:
        return [(t, True, None, False)]
    if op is Op.GT:
        return [(t, False, None, False)]
    if op is Op.LE:
        return [(None, False, t, True)]
    if op is Op.LT:
        return [(None, False, t, False)]
    if op is Op.EQ:
        return [(t, True, t, True)]
    return [(None, False, t, False), (t, False, None, False)]


def _reaches(piece: Piece, x: Optional[Fraction], inclusive: bool) -> bool:
    """Does the piece contain x (inclusive) or a right-neighbourhood of x?"""
    lo, lo_closed, hi, hi_closed = piece
    if x is None:
        return lo is None
    if lo is not None and (lo > x or (lo == x and inclusive and not lo_closed)):
        return False
    if hi is None or hi > x:
        return True
    return hi == x and hi_closed and inclusive


def covers(domain: Interval, pieces: Iterable[Piece]) -> bool:
    """True when the union of pieces contains every point of the domain"""
    pieces = list(pieces)
    x, inclusive = domain.lo, True
    while True:
        reaching = [p for p in pieces if _reaches(p, x, inclusive)]
        if not reaching:
            return False
        if any(p[2] is None for p in reaching):
            return True
        hi, hi_closed = max(((p[2], p[3]) for p in reaching), key=lambda b: (b[0], b[1]))
        if domain.hi is not None and (hi > domain.hi or (hi == domain.hi and hi_closed)):
            return True
        if x is not None and hi == x and inclusive == (not hi_closed):
            return False
        x, inclusive = hi, not hi_closed
