"""
Surface syntax for constraints.

    Proto="TCP" -> DstPort!=53 | SrcPort!=80
    Bytes >= 20*Packets
    SrcPort=68 <-> DstPort=67
    DstPort in {137, 138} -> Proto="UDP"

Operators: = != < <= > >= ; connectives & | ! -> <-> ; `in {..}` and `not in {..}`
desugar to equalities. Comments start with `#`; `;` or a newline ends a constraint.
"""

import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import List, Optional, Sequence, Tuple, Union

from lawmine.errors import ConstraintSyntaxError, DomainViolation, MalformedConstraint, TypeMismatch, UnknownVariable

from .terms import (
    Connective,
    Constraint,
    LinearTerm,
    Op,
    Predicate,
    Provenance,
    Vocabulary,
    format_constraint,
    normalize_value,
)

_SYNONYMS = (
    ("⟺", "<->"),
    ("⇔", "<->"),
    ("⟹", "->"),
    ("⇒", "->"),
    ("→", "->"),
    ("∧", "&"),
    ("∨", "|"),
    ("¬", "!"),
    ("≠", "!="),
    ("≤", "<="),
    ("≥", ">="),
    ("∈", " in "),
    ("∉", " not in "),
)

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<sep>[;\n])
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<number>\d+(?:\.\d+)?)
  | (?P<op><->|->|!=|==|<=|>=|<|>|=)
  | (?P<punct>[&|!()*+\-/{},])
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    position: int


def _normalize_text(text: str) -> str:
    """ASCII spelling of unicode connectives; error positions refer to this text"""
    for symbol, replacement in _SYNONYMS:
        text = text.replace(symbol, replacement)
    return text


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    position = 0
    while position < len(text):
        match = _TOKEN.match(text, position)
        if match is None:
            raise ConstraintSyntaxError(f"unexpected character {text[position]!r}", position)
        kind = match.lastgroup
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, match.group(), position))
        position = match.end()
    tokens.append(Token("end", "", position))
    return tokens


# Formula tree: ("atom", Predicate) | ("not", f) | ("and", [f..]) | ("or", [f..]) | ("imp", a, b) | ("iff", a, b)
Formula = tuple


class _Parser:
    def __init__(self, tokens: Sequence[Token], vocab: Optional[Vocabulary]):
        self.tokens = tokens
        self.index = 0
        self.vocab = vocab

    # token helpers

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def _at(self, *texts: str) -> bool:
        token = self.current
        return token.kind in ("op", "punct", "ident") and token.text in texts

    def _advance(self) -> Token:
        token = self.current
        self.index += 1
        return token

    def _expect(self, text: str) -> Token:
        if not self._at(text):
            raise ConstraintSyntaxError(f"expected {text!r}, found {self.current.text or 'end of input'!r}", self.current.position)
        return self._advance()

    def at_separator(self) -> bool:
        return self.current.kind in ("sep", "end")

    # grammar

    def statement(self) -> Formula:
        formula = self.implication()
        if not self.at_separator():
            raise ConstraintSyntaxError(f"unexpected {self.current.text!r}", self.current.position)
        return formula

    def implication(self) -> Formula:
        left = self.disjunction()
        if self._at("->", "<->"):
            arrow = self._advance().text
            right = self.disjunction()
            if self._at("->", "<->"):
                raise ConstraintSyntaxError("chained implications need parentheses", self.current.position)
            return ("imp", left, right) if arrow == "->" else ("iff", left, right)
        return left

    def disjunction(self) -> Formula:
        parts = [self.conjunction()]
        while self._at("|"):
            self._advance()
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else ("or", parts)

    def conjunction(self) -> Formula:
        parts = [self.unary()]
        while self._at("&"):
            self._advance()
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else ("and", parts)

    def unary(self) -> Formula:
        if self._at("!"):
            self._advance()
            return ("not", self.unary())
        if self._at("("):
            self._advance()
            inner = self.implication()
            self._expect(")")
            return inner
        return self.comparison()

    def comparison(self) -> Formula:
        token = self.current
        if token.kind != "ident" or token.text in ("in", "not"):
            raise ConstraintSyntaxError(f"expected a variable, found {token.text or 'end of input'!r}", token.position)
        subject = self._advance().text
        self._check_variable(subject, token.position)

        if self._at("in") or self._at("not"):
            negated = self._advance().text == "not"
            if negated:
                self._expect("in")
            values = self.value_set()
            op = Op.NE if negated else Op.EQ
            atoms = [("atom", self._predicate(subject, op, v, token.position)) for v in values]
            if len(atoms) == 1:
                return atoms[0]
            return ("and", atoms) if negated else ("or", atoms)

        if self.current.kind != "op" or self.current.text in ("->", "<->"):
            raise ConstraintSyntaxError(f"expected a comparison after {subject}", self.current.position)
        op_text = self._advance().text
        op = Op.EQ if op_text == "==" else Op(op_text)
        obj = self.operand()
        return ("atom", self._predicate(subject, op, obj, token.position))

    def value_set(self) -> List:
        self._expect("{")
        values = [self.constant()]
        while self._at(","):
            self._advance()
            values.append(self.constant())
        self._expect("}")
        return values

    def constant(self):
        token = self.current
        if token.kind == "string":
            self._advance()
            return _unquote(token.text)
        sign = 1
        if self._at("-"):
            self._advance()
            sign = -1
        if self.current.kind != "number":
            raise ConstraintSyntaxError(f"expected a constant, found {self.current.text or 'end of input'!r}", self.current.position)
        return sign * self.rational()

    def rational(self) -> Fraction:
        value = Fraction(self._advance().text)
        if self._at("/") and self.tokens[self.index + 1].kind == "number":
            self._advance()
            denominator = Fraction(self._advance().text)
            if denominator == 0:
                raise ConstraintSyntaxError("division by zero", self.tokens[self.index - 1].position)
            value /= denominator
        return value

    def operand(self) -> Union[Fraction, str, LinearTerm]:
        """Constant, or c*Var + c0"""
        token = self.current
        if token.kind == "string":
            self._advance()
            return _unquote(token.text)

        sign = Fraction(1)
        if self._at("-"):
            self._advance()
            sign = Fraction(-1)

        if self.current.kind == "number":
            number = sign * self.rational()
            if not self._at("*"):
                return number
            self._advance()
            coefficient = number
        else:
            coefficient = sign

        if self.current.kind != "ident":
            raise ConstraintSyntaxError(f"expected a variable, found {self.current.text or 'end of input'!r}", self.current.position)
        var_token = self._advance()
        self._check_variable(var_token.text, var_token.position)
        if self._at("*"):
            self._advance()
            if self.current.kind != "number":
                raise ConstraintSyntaxError("expected a coefficient", self.current.position)
            coefficient *= self.rational()

        offset = Fraction(0)
        if self._at("+", "-"):
            negative = self._advance().text == "-"
            if self.current.kind != "number":
                raise ConstraintSyntaxError("expected a constant offset", self.current.position)
            offset = self.rational()
            if negative:
                offset = -offset
        try:
            return LinearTerm(var_token.text, coefficient, offset)
        except MalformedConstraint:
            raise ConstraintSyntaxError("zero coefficient", var_token.position) from None

    # vocabulary checks

    def _check_variable(self, name: str, position: int) -> None:
        if self.vocab is not None and name not in self.vocab:
            raise UnknownVariable(name)

    def _predicate(self, subject: str, op: Op, obj, position: int) -> Predicate:
        if isinstance(obj, Fraction):
            obj = normalize_value(obj)
        try:
            predicate = Predicate(subject, op, obj)
        except MalformedConstraint as e:
            raise ConstraintSyntaxError(e.message, position) from None
        if self.vocab is None:
            return predicate
        return check_predicate(predicate, self.vocab)


def check_predicate(predicate: Predicate, vocab: Vocabulary) -> Predicate:
    """Kind and domain checks; nominal constants are coerced to the matching domain value"""
    subject = vocab[predicate.subject]
    if predicate.is_linear:
        other = vocab[predicate.obj.variable]
        if subject.is_nominal or other.is_nominal:
            raise TypeMismatch(f"linear comparison needs two ordinal variables: {predicate}", predicate.subject)
        return predicate
    if subject.is_nominal:
        if predicate.op.is_ordinal:
            raise TypeMismatch(f"nominal variable {subject.name} compared with {predicate.op.value}", subject.name)
        value = subject.coerce(predicate.obj)
        if value not in subject.values:
            raise DomainViolation(f"{value!r} is not in the domain of {subject.name}", subject.name)
        return Predicate(predicate.subject, predicate.op, value)
    if isinstance(predicate.obj, str):
        raise TypeMismatch(f"ordinal variable {subject.name} compared with a string", subject.name)
    if not subject.contains(predicate.obj):
        raise DomainViolation(
            f"{predicate.obj} lies outside [{subject.low}, {subject.high}] of {subject.name}", subject.name
        )
    return predicate


def _unquote(text: str) -> str:
    return re.sub(r"\\(.)", r"\1", text[1:-1])


# Lowering the formula tree to constraint shape


def _nnf(formula: Formula, negate: bool = False) -> Formula:
    kind = formula[0]
    if kind == "atom":
        return ("atom", formula[1].negate()) if negate else formula
    if kind == "not":
        return _nnf(formula[1], not negate)
    if kind in ("and", "or"):
        parts = [_nnf(f, negate) for f in formula[1]]
        flipped = {"and": "or", "or": "and"}[kind] if negate else kind
        return (flipped, parts)
    if kind == "imp":
        # a -> b  ==  !a | b
        return _nnf(("or", [("not", formula[1]), formula[2]]), negate)
    # iff inside a larger formula: (a -> b) & (b -> a)
    a, b = formula[1], formula[2]
    return _nnf(("and", [("imp", a, b), ("imp", b, a)]), negate)


def _dnf(formula: Formula) -> List[List[Predicate]]:
    """NNF formula as a list of conjunctions"""
    kind = formula[0]
    if kind == "atom":
        return [[formula[1]]]
    if kind == "or":
        return [conj for part in formula[1] for conj in _dnf(part)]
    combined: List[List[Predicate]] = [[]]
    for part in formula[1]:
        combined = [left + right for left, right in product(combined, _dnf(part))]
    return combined


def _cnf(formula: Formula) -> List[List[Predicate]]:
    """NNF formula as a list of disjunctions"""
    kind = formula[0]
    if kind == "atom":
        return [[formula[1]]]
    if kind == "and":
        return [clause for part in formula[1] for clause in _cnf(part)]
    combined: List[List[Predicate]] = [[]]
    for part in formula[1]:
        combined = [left + right for left, right in product(combined, _cnf(part))]
    return combined


def _unique(predicates: List[Predicate]) -> Tuple[Predicate, ...]:
    return tuple({str(p): p for p in predicates}.values())


def _is_complementary(predicates: Sequence[Predicate]) -> bool:
    texts = {str(p) for p in predicates}
    return any(str(p.negate()) in texts for p in predicates)


def _consequent_constraints(antecedent: Tuple[Predicate, ...], consequent: Formula, provenance: Provenance) -> List[Constraint]:
    clauses = [_unique(c) for c in _cnf(consequent)]
    units = [c[0] for c in clauses if len(c) == 1]
    groups = [c for c in clauses if len(c) > 1 and not _is_complementary(c)]
    constraints = []
    if units:
        constraints.append(Constraint(antecedent, _unique(units), Connective.AND, provenance))
    for group in groups:
        constraints.append(Constraint(antecedent, group, Connective.OR, provenance))
    if not constraints:
        raise MalformedConstraint("consequent is trivially true")
    return constraints


def lower(formula: Formula, provenance: Provenance = Provenance.USER_QUERY) -> List[Constraint]:
    """Rewrite one parsed statement into implication-anchored constraints"""
    kind = formula[0]
    if kind == "iff":
        return lower(("imp", formula[1], formula[2]), provenance) + lower(("imp", formula[2], formula[1]), provenance)
    if kind == "imp":
        constraints = []
        for conjunction in _dnf(_nnf(formula[1])):
            antecedent = _unique(conjunction)
            if _is_complementary(antecedent):
                continue
            constraints.extend(_consequent_constraints(antecedent, _nnf(formula[2]), provenance))
        return constraints
    return _consequent_constraints((), _nnf(formula), provenance)


def parse_constraints(
    text: str, vocab: Optional[Vocabulary] = None, provenance: Provenance = Provenance.USER_QUERY
) -> List[Constraint]:
    """Every constraint in a document, in order, duplicates dropped"""
    parser = _Parser(tokenize(_normalize_text(text)), vocab)
    constraints: List[Constraint] = []
    seen = set()
    while parser.current.kind != "end":
        if parser.current.kind == "sep":
            parser._advance()
            continue
        start = parser.current.position
        formula = parser.statement()
        try:
            lowered = lower(formula, provenance)
        except MalformedConstraint as e:
            raise ConstraintSyntaxError(e.message, start) from None
        for constraint in lowered:
            if constraint not in seen:
                seen.add(constraint)
                constraints.append(constraint)
    return constraints


def parse_constraint(text: str, vocab: Optional[Vocabulary] = None, provenance: Provenance = Provenance.USER_QUERY) -> Constraint:
    """Exactly one constraint"""
    constraints = parse_constraints(text, vocab, provenance)
    if len(constraints) != 1:
        raise ConstraintSyntaxError(f"expected one constraint, text yields {len(constraints)}", 0)
    return constraints[0]


__all__ = ["format_constraint", "parse_constraint", "parse_constraints", "check_predicate", "tokenize", "lower"]
