"""
Core vocabulary and formula types: variables, bias, predicates, literals and constraints
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from numbers import Integral, Real
from typing import Any, Dict, FrozenSet, Iterable, Iterator, Mapping, Optional, Tuple, Union

from lawmine.errors import ConfigurationError, DomainViolation, MalformedConstraint, UnknownVariable

Value = Union[int, Fraction, str]

DEFAULT_COEFFICIENTS: Tuple[Fraction, ...] = (Fraction(1), Fraction(20), Fraction(64), Fraction(65535))


def normalize_value(value: Any) -> Optional[Value]:
    """Map a raw cell to int, Fraction or str; None and NaN become None"""
    if value is None:
        return None
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, str):
        return value
    if isinstance(value, Integral):
        return int(value)
    if isinstance(value, Fraction):
        return int(value) if value.denominator == 1 else value
    if isinstance(value, Real):
        number = float(value)
        if number != number:
            return None
        if number.is_integer():
            return int(number)
        return Fraction(str(number))
    return str(value)


def to_rational(value: Any) -> Fraction:
    if isinstance(value, str):
        raise TypeError(f"{value!r} is not numeric")
    return Fraction(str(value)) if isinstance(value, float) else Fraction(value)


def is_numeric(value: Any) -> bool:
    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)


def format_value(value: Value) -> str:
    """Surface-syntax rendering of a constant"""
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    return str(value)


def value_sort_key(value: Value) -> Tuple[int, Any]:
    """Numbers before strings, each in natural order"""
    if isinstance(value, str):
        return (1, value)
    return (0, value)


class Kind(str, Enum):
    NOMINAL = "nominal"
    ORDINAL = "ordinal"


@dataclass(frozen=True)
class Variable:
    """A column of the vocabulary with its kind and domain"""

    name: str
    kind: Kind
    values: Tuple[Value, ...] = ()
    low: Optional[Value] = None
    high: Optional[Value] = None
    unit: Optional[str] = None

    def __post_init__(self):
        if self.kind is Kind.NOMINAL:
            if not self.values:
                raise DomainViolation(f"nominal variable {self.name!r} has an empty domain", self.name)
            normalized = tuple(normalize_value(v) for v in self.values)
            if len(set(normalized)) != len(normalized):
                raise DomainViolation(f"nominal variable {self.name!r} has duplicate values", self.name)
            object.__setattr__(self, "values", tuple(sorted(normalized, key=value_sort_key)))
        else:
            if self.low is None or self.high is None:
                raise DomainViolation(f"ordinal variable {self.name!r} needs both bounds", self.name)
            low, high = normalize_value(self.low), normalize_value(self.high)
            if not (is_numeric(low) and is_numeric(high)):
                raise DomainViolation(f"ordinal variable {self.name!r} has non-numeric bounds", self.name)
            if low > high:
                raise DomainViolation(f"ordinal variable {self.name!r} has min {low} > max {high}", self.name)
            object.__setattr__(self, "low", low)
            object.__setattr__(self, "high", high)

    @classmethod
    def nominal(cls, name: str, values: Iterable[Any], unit: Optional[str] = None) -> "Variable":
        return cls(name=name, kind=Kind.NOMINAL, values=tuple(values), unit=unit)

    @classmethod
    def ordinal(cls, name: str, low: Any, high: Any, unit: Optional[str] = None) -> "Variable":
        return cls(name=name, kind=Kind.ORDINAL, low=low, high=high, unit=unit)

    @property
    def is_nominal(self) -> bool:
        return self.kind is Kind.NOMINAL

    def contains(self, value: Any) -> bool:
        value = normalize_value(value)
        if value is None:
            return False
        if self.is_nominal:
            return value in self.values
        return is_numeric(value) and self.low <= value <= self.high

    def coerce(self, value: Value) -> Value:
        """Match a literal to a domain value that prints the same (53 vs "53")"""
        if not self.is_nominal or value in self.values:
            return value
        text = value if isinstance(value, str) else format_value(value)
        for candidate in self.values:
            shown = candidate if isinstance(candidate, str) else format_value(candidate)
            if shown == text:
                return candidate
        return value

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"name": self.name, "kind": self.kind.value}
        if self.is_nominal:
            data["values"] = [format_value(v) if isinstance(v, Fraction) else v for v in self.values]
        else:
            data["min"] = format_value(self.low) if isinstance(self.low, Fraction) else self.low
            data["max"] = format_value(self.high) if isinstance(self.high, Fraction) else self.high
        if self.unit:
            data["unit"] = self.unit
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Variable":
        kind = Kind(data["kind"])
        if kind is Kind.NOMINAL:
            return cls.nominal(data["name"], data["values"], data.get("unit"))
        return cls.ordinal(data["name"], _number(data["min"]), _number(data["max"]), data.get("unit"))


def _number(raw: Any) -> Value:
    if isinstance(raw, str):
        return normalize_value(Fraction(raw))
    return normalize_value(raw)


@dataclass(frozen=True)
class Vocabulary:
    """Ordered set of variables addressable by name"""

    variables: Tuple[Variable, ...]

    def __post_init__(self):
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ConfigurationError("vocabulary has duplicate variable names")
        object.__setattr__(self, "_index", {v.name: v for v in self.variables})

    def __getitem__(self, name: str) -> Variable:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownVariable(name) from None

    def __contains__(self, name: object) -> bool:
        return name in self._index

    def __iter__(self) -> Iterator[Variable]:
        return iter(self.variables)

    def __len__(self) -> int:
        return len(self.variables)

    def get(self, name: str) -> Optional[Variable]:
        return self._index.get(name)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def to_dict(self) -> Dict[str, Any]:
        return {"variables": [v.to_dict() for v in self.variables]}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Vocabulary":
        return cls(tuple(Variable.from_dict(v) for v in data["variables"]))


@dataclass(frozen=True)
class Bias:
    """Background knowledge restricting the language"""

    excluded_variables: FrozenSet[str] = frozenset()
    excluded_pairs: FrozenSet[FrozenSet[str]] = frozenset()
    domain_overrides: Mapping[str, Variable] = field(default_factory=dict, hash=False)
    arity_limit: int = 3
    enable_aggregates: bool = False
    coefficients: Tuple[Fraction, ...] = DEFAULT_COEFFICIENTS
    nominal: FrozenSet[str] = frozenset()
    nominal_threshold: int = 32

    def __post_init__(self):
        if self.arity_limit < 1:
            raise ConfigurationError(f"arity limit must be at least 1, got {self.arity_limit}")
        if self.nominal_threshold < 1:
            raise ConfigurationError(f"nominal threshold must be positive, got {self.nominal_threshold}")
        for pair in self.excluded_pairs:
            if len(pair) != 2:
                raise ConfigurationError(f"excluded pair must name two variables, got {sorted(pair)}")
        coefficients = tuple(sorted({to_rational(c) for c in self.coefficients}))
        if any(c <= 0 for c in coefficients):
            raise ConfigurationError("coefficients must be positive")
        object.__setattr__(self, "coefficients", coefficients)

    def pair_excluded(self, a: str, b: str) -> bool:
        return frozenset((a, b)) in self.excluded_pairs

    def referenced_names(self) -> FrozenSet[str]:
        names = set(self.excluded_variables) | set(self.domain_overrides) | set(self.nominal)
        for pair in self.excluded_pairs:
            names |= pair
        return frozenset(names)

    def check_names(self, known: Iterable[str]) -> None:
        """Every identifier the bias mentions must be a declared variable"""
        known = set(known)
        for name in sorted(self.referenced_names()):
            if name not in known:
                raise UnknownVariable(name)

    @classmethod
    def from_mapping(
        cls,
        data: Mapping[str, Any],
        arity_limit: Optional[int] = None,
        nominal_threshold: Optional[int] = None,
    ) -> "Bias":
        """Build a bias from a parsed TOML document; explicit arguments win over file values"""
        try:
            domains: Dict[str, Variable] = {}
            for name, spec in dict(data.get("domains", {})).items():
                if "values" in spec:
                    domains[name] = Variable.nominal(name, spec["values"], spec.get("unit"))
                else:
                    domains[name] = Variable.ordinal(name, spec["min"], spec["max"], spec.get("unit"))
            pairs = frozenset(frozenset(p) for p in data.get("exclude_pairs", []))
            return cls(
                excluded_variables=frozenset(data.get("exclude", [])),
                excluded_pairs=pairs,
                domain_overrides=domains,
                arity_limit=arity_limit if arity_limit is not None else int(data.get("arity", 3)),
                enable_aggregates=bool(data.get("enable_aggregates", False)),
                coefficients=tuple(_number(c) for c in data.get("coefficients", DEFAULT_COEFFICIENTS)),
                nominal=frozenset(data.get("nominal", [])),
                nominal_threshold=(
                    nominal_threshold if nominal_threshold is not None else int(data.get("nominal_threshold", 32))
                ),
            )
        except (KeyError, TypeError, ValueError, DomainViolation) as e:
            raise ConfigurationError(f"invalid bias: {e}") from e

    def to_dict(self) -> Dict[str, Any]:
        return {
            "arity": self.arity_limit,
            "coefficients": [format_value(c) for c in self.coefficients],
            "enable_aggregates": self.enable_aggregates,
            "exclude": sorted(self.excluded_variables),
            "exclude_pairs": sorted(sorted(p) for p in self.excluded_pairs),
            "nominal": sorted(self.nominal),
            "nominal_threshold": self.nominal_threshold,
            "domains": {name: _domain_dict(var) for name, var in sorted(self.domain_overrides.items())},
        }


def _domain_dict(var: Variable) -> Dict[str, Any]:
    data = var.to_dict()
    data.pop("name")
    data.pop("kind")
    return data


class Op(str, Enum):
    EQ = "="
    NE = "!="
    LT = "<"
    LE = "<="
    GT = ">"
    GE = ">="

    @property
    def is_ordinal(self) -> bool:
        return self not in (Op.EQ, Op.NE)

    def negate(self) -> "Op":
        return _NEGATION[self]


_NEGATION = {Op.EQ: Op.NE, Op.NE: Op.EQ, Op.LT: Op.GE, Op.GE: Op.LT, Op.LE: Op.GT, Op.GT: Op.LE}


@dataclass(frozen=True)
class LinearTerm:
    """coefficient * variable + offset"""

    variable: str
    coefficient: Fraction = Fraction(1)
    offset: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "coefficient", to_rational(self.coefficient))
        object.__setattr__(self, "offset", to_rational(self.offset))
        if self.coefficient == 0:
            raise MalformedConstraint(f"zero coefficient on {self.variable}")

    def value(self, x: Value) -> Fraction:
        return self.coefficient * to_rational(x) + self.offset

    def __str__(self) -> str:
        text = self.variable if self.coefficient == 1 else f"{format_value(self.coefficient)}*{self.variable}"
        if self.offset > 0:
            text += f" + {format_value(self.offset)}"
        elif self.offset < 0:
            text += f" - {format_value(-self.offset)}"
        return text


@dataclass(frozen=True)
class Predicate:
    subject: str
    op: Op
    obj: Union[Value, LinearTerm]

    def __post_init__(self):
        if not isinstance(self.obj, LinearTerm):
            obj = normalize_value(self.obj)
            if obj is None:
                raise MalformedConstraint(f"predicate on {self.subject} compares against null")
            object.__setattr__(self, "obj", obj)
        elif self.obj.variable == self.subject:
            raise MalformedConstraint(f"linear predicate compares {self.subject} with itself")

    @property
    def is_linear(self) -> bool:
        return isinstance(self.obj, LinearTerm)

    @property
    def variables(self) -> FrozenSet[str]:
        if self.is_linear:
            return frozenset((self.subject, self.obj.variable))
        return frozenset((self.subject,))

    def negate(self) -> "Predicate":
        return Predicate(self.subject, self.op.negate(), self.obj)

    def canonical(self) -> Tuple["Predicate", bool]:
        """Atom with op in {=, >=, <=} and the polarity that recovers this predicate"""
        if self.op in (Op.EQ, Op.GE, Op.LE):
            return self, True
        return self.negate(), False

    def __str__(self) -> str:
        obj = str(self.obj) if self.is_linear else format_value(self.obj)
        return f"{self.subject}{self.op.value}{obj}"

    def __lt__(self, other: "Predicate") -> bool:
        return str(self) < str(other)


@dataclass(frozen=True)
class Literal:
    """Canonical predicate with a polarity"""

    atom: Predicate
    positive: bool = True

    @classmethod
    def of(cls, predicate: Predicate) -> "Literal":
        atom, positive = predicate.canonical()
        return cls(atom, positive)

    def negate(self) -> "Literal":
        return Literal(self.atom, not self.positive)

    def as_predicate(self) -> Predicate:
        return self.atom if self.positive else self.atom.negate()

    def __str__(self) -> str:
        return str(self.as_predicate())

    def __lt__(self, other: "Literal") -> bool:
        return str(self) < str(other)


class Connective(str, Enum):
    AND = "&"
    OR = "|"


class Provenance(str, Enum):
    SEEDED = "seeded"
    GENERALIZED = "generalized"
    REFINED = "refined"
    USER_QUERY = "user-query"


def _canonical_side(predicates: Iterable[Predicate], side: str) -> Tuple[Predicate, ...]:
    unique = {str(p): p for p in predicates}
    ordered = tuple(unique[k] for k in sorted(unique))
    seen = set()
    for p in ordered:
        literal = Literal.of(p)
        if literal.negate() in seen:
            raise MalformedConstraint(f"{side} contains both {p} and its negation")
        seen.add(literal)
    return ordered


@dataclass(frozen=True)
class Constraint:
    """antecedent conjunction -> consequent joined by connective; empty antecedent is a fact"""

    antecedent: Tuple[Predicate, ...]
    consequent: Tuple[Predicate, ...]
    connective: Connective = Connective.AND
    provenance: Provenance = field(default=Provenance.USER_QUERY, compare=False)

    def __post_init__(self):
        if not self.consequent:
            raise MalformedConstraint("constraint needs a non-empty consequent")
        object.__setattr__(self, "antecedent", _canonical_side(self.antecedent, "antecedent"))
        object.__setattr__(self, "consequent", _canonical_side(self.consequent, "consequent"))
        if len(self.consequent) == 1:
            object.__setattr__(self, "connective", Connective.AND)

    @classmethod
    def fact(cls, *predicates: Predicate, connective: Connective = Connective.AND, **kwargs) -> "Constraint":
        return cls((), tuple(predicates), connective, **kwargs)

    @classmethod
    def implies(
        cls,
        antecedent: Iterable[Predicate],
        consequent: Iterable[Predicate],
        connective: Connective = Connective.AND,
        **kwargs,
    ) -> "Constraint":
        return cls(tuple(antecedent), tuple(consequent), connective, **kwargs)

    @property
    def predicates(self) -> Tuple[Predicate, ...]:
        return self.antecedent + self.consequent

    @property
    def variables(self) -> FrozenSet[str]:
        names = set()
        for p in self.predicates:
            names |= p.variables
        return frozenset(names)

    @property
    def arity(self) -> int:
        return len(self.variables)

    @property
    def is_fact(self) -> bool:
        return not self.antecedent

    @property
    def is_disjunctive(self) -> bool:
        return self.connective is Connective.OR

    def with_provenance(self, provenance: Provenance) -> "Constraint":
        return replace(self, provenance=provenance)

    def __str__(self) -> str:
        return format_constraint(self)

    def __lt__(self, other: "Constraint") -> bool:
        return str(self) < str(other)


def format_constraint(constraint: Constraint) -> str:
    """Pretty-print in surface syntax; parse_constraint inverts it"""
    joiner = f" {constraint.connective.value} "
    consequent = joiner.join(str(p) for p in constraint.consequent)
    if constraint.is_fact:
        return consequent
    return " & ".join(str(p) for p in constraint.antecedent) + " -> " + consequent
