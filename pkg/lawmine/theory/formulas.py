"""
Propositional formulas over canonical predicate atoms, as used in natural-deduction proofs
"""

from dataclasses import dataclass
from functools import reduce
from typing import FrozenSet, Iterable, Sequence, Union

from lawmine.language.terms import Connective, Constraint, Literal, Predicate


@dataclass(frozen=True)
class Atom:
    predicate: Predicate

    def __str__(self) -> str:
        return str(self.predicate)


@dataclass(frozen=True)
class Not:
    operand: "Formula"

    def __str__(self) -> str:
        return f"¬{_wrap(self.operand)}"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return f"{_wrap(self.left)} ∧ {_wrap(self.right)}"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return f"{_wrap(self.left)} ∨ {_wrap(self.right)}"


@dataclass(frozen=True)
class Implies:
    antecedent: "Formula"
    consequent: "Formula"

    def __str__(self) -> str:
        return f"{_wrap(self.antecedent)} → {_wrap(self.consequent)}"


Formula = Union[Atom, Not, And, Or, Implies]


def _wrap(formula: Formula) -> str:
    if isinstance(formula, (Atom, Not)):
        return str(formula)
    return f"({formula})"


def literal_formula(literal: Literal) -> Formula:
    atom = Atom(literal.atom)
    return atom if literal.positive else Not(atom)


def formula_literal(formula: Formula) -> Literal:
    """Inverse of literal_formula; raises ValueError on anything but a literal"""
    if isinstance(formula, Atom):
        return Literal(formula.predicate, True)
    if isinstance(formula, Not) and isinstance(formula.operand, Atom):
        return Literal(formula.operand.predicate, False)
    raise ValueError(f"{formula} is not a literal")


def is_literal(formula: Formula) -> bool:
    return isinstance(formula, Atom) or (isinstance(formula, Not) and isinstance(formula.operand, Atom))


def conjoin(formulas: Sequence[Formula]) -> Formula:
    """Right-nested conjunction"""
    return reduce(lambda acc, f: And(f, acc), reversed(formulas[:-1]), formulas[-1])


def disjoin(formulas: Sequence[Formula]) -> Formula:
    """Right-nested disjunction"""
    return reduce(lambda acc, f: Or(f, acc), reversed(formulas[:-1]), formulas[-1])


def clause_formula(clause: Iterable[Literal]) -> Formula:
    """Disjunction of the clause's literals in a fixed order"""
    return disjoin([literal_formula(lit) for lit in sorted(clause, key=_literal_order)])


def _literal_order(literal: Literal):
    return (str(literal.atom), not literal.positive)


def constraint_formula(constraint: Constraint) -> Formula:
    """A1 ∧ ... ∧ Ak → C, with C a conjunction or disjunction of the consequent"""
    consequent = [literal_formula(Literal.of(p)) for p in constraint.consequent]
    body = disjoin(consequent) if constraint.connective is Connective.OR else conjoin(consequent)
    if constraint.is_fact:
        return body
    return Implies(conjoin([literal_formula(Literal.of(p)) for p in constraint.antecedent]), body)


def atoms_of(formula: Formula) -> FrozenSet[Predicate]:
    if isinstance(formula, Atom):
        return frozenset((formula.predicate,))
    if isinstance(formula, Not):
        return atoms_of(formula.operand)
    if isinstance(formula, Implies):
        return atoms_of(formula.antecedent) | atoms_of(formula.consequent)
    return atoms_of(formula.left) | atoms_of(formula.right)
