"""
Fitch-style natural deduction: proof steps, reconstruction from DPLL refutations, and a checker

Only ten rules are used. A contradiction is never a formula of its own: negation introduction
closes a subproof in which some formula and its negation both appear.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .formulas import And, Atom, Formula, Implies, Not, Or, is_literal
from .solver import Refutation


class Rule(str, Enum):
    ASSUMPTION = "Assumption"
    REPETITION = "Repetition"
    MODUS_PONENS = "Modus Ponens"
    AND_INTRO = "∧I"
    AND_ELIM = "∧E"
    OR_INTRO = "∨I"
    OR_ELIM = "∨E"
    NOT_INTRO = "¬I"
    NOT_ELIM = "¬E"
    CONDITIONAL_PROOF = "Conditional Proof"


@dataclass(frozen=True)
class Step:
    formula: Formula
    rule: Rule
    refs: Tuple[int, ...] = ()
    depth: int = 0


@dataclass(frozen=True)
class Proof:
    """Numbered steps; depth-0 assumptions are the premises drawn from the theory"""

    goal: Formula
    steps: Tuple[Step, ...]

    @property
    def conclusion(self) -> Optional[Formula]:
        return self.steps[-1].formula if self.steps else None

    @property
    def premises(self) -> List[Formula]:
        return [s.formula for s in self.steps if s.rule is Rule.ASSUMPTION and s.depth == 0]

    def __len__(self) -> int:
        return len(self.steps)

    def render(self) -> str:
        width = len(str(len(self.steps)))
        lines = []
        for number, step in enumerate(self.steps, start=1):
            bars = "| " * step.depth
            refs = ",".join(str(r + 1) for r in step.refs)
            justification = f"{step.rule.value} {refs}".rstrip()
            lines.append(f"{number:>{width}}  {bars}{step.formula}    [{justification}]")
        return "\n".join(lines)


# Literal codes are +atom / -atom; the builder maps them to and from formulas through these
LiteralFormula = Callable[[int], Formula]
FormulaLiteral = Callable[[Formula], int]


class ProofBuilder:
    """Writes steps while replaying refutations; `context` maps literal codes to the lines holding them"""

    def __init__(self, literal_formula: LiteralFormula, formula_literal: FormulaLiteral):
        self.to_formula = literal_formula
        self.to_literal = formula_literal
        self.steps: List[Step] = []
        self.scopes: List[int] = []
        self.premise_lines: Dict[int, int] = {}
        self.premise_formulas: Dict[int, Formula] = {}

    @property
    def depth(self) -> int:
        return len(self.scopes)

    def emit(self, formula: Formula, rule: Rule, refs: Sequence[int] = ()) -> int:
        self.steps.append(Step(formula, rule, tuple(refs), self.depth))
        return len(self.steps) - 1

    def premise(self, index: int, formula: Formula) -> int:
        line = self.emit(formula, Rule.ASSUMPTION)
        self.premise_lines[index] = line
        self.premise_formulas[index] = formula
        return line

    def open(self, formula: Formula) -> int:
        self.scopes.append(len(self.steps))
        return self.emit(formula, Rule.ASSUMPTION)

    def close(self) -> int:
        return self.scopes.pop()

    def here(self, line: int) -> int:
        """The line itself when it sits in the current subproof, else a repetition of it"""
        if not self.scopes or line >= self.scopes[-1]:
            return line
        return self.emit(self.steps[line].formula, Rule.REPETITION, (line,))

    def pair(self, context: Dict[int, int], code: int) -> Tuple[int, int]:
        """Lines (φ, ¬φ) for an atom the context holds both ways"""
        atom = abs(code)
        return context[atom], context[-atom]

    def ex_falso(self, positive: int, negative: int, target: Formula) -> int:
        for line in (positive, negative):
            if self.steps[line].formula == target:
                return self.here(line)
        start = self.open(Not(target))
        a = self.emit(self.steps[positive].formula, Rule.REPETITION, (positive,))
        b = self.emit(self.steps[negative].formula, Rule.REPETITION, (negative,))
        self.close()
        twice = self.emit(Not(Not(target)), Rule.NOT_INTRO, (start, a, b))
        return self.emit(target, Rule.NOT_ELIM, (twice,))

    def from_clause(self, line: int, clause: Formula, target: Formula, context: Dict[int, int]) -> int:
        """
        Derive `target` from a disjunction whose other disjuncts the context refutes, by splitting
        it with ∨E; a refuted literal yields anything.
        """
        if clause == target:
            return self.here(line)
        if is_literal(clause):
            code = self.to_literal(clause)
            context = dict(context)
            context[code] = line
            return self.ex_falso(*self.pair(context, code), target)
        branches = []
        for side in (clause.left, clause.right):
            start = self.open(side)
            end = self.here(self.from_clause(start, side, target, context))
            self.close()
            branches.append(self.emit(Implies(side, target), Rule.CONDITIONAL_PROOF, (start, end)))
        return self.emit(target, Rule.OR_ELIM, (line, *branches))

    def replay(self, node: Refutation, context: Dict[int, int]) -> Tuple[int, int]:
        """Lines (φ, ¬φ) reachable from the current subproof once the node's refutation is written"""
        context = dict(context)
        for index, code in node.propagated:
            target = self.to_formula(code)
            context[code] = self.from_clause(self.premise_lines[index], self.premise_formulas[index], target, context)
        if node.clash is not None:
            return self.pair(context, node.clash)
        if node.conflict is not None:
            formula = self.premise_formulas[node.conflict]
            first = formula.left if isinstance(formula, Or) else formula
            code = self.to_literal(first)
            context[code] = self.from_clause(self.premise_lines[node.conflict], formula, first, context)
            return self.pair(context, code)

        atom = node.branch
        closed = []
        for code, child in ((atom, node.positive), (-atom, node.negative)):
            assumption = self.to_formula(code)
            start = self.open(assumption)
            inner = dict(context)
            inner[code] = start
            refs = self.replay(child, inner)
            self.close()
            closed.append(self.emit(Not(assumption), Rule.NOT_INTRO, (start, *refs)))
        return closed[0], closed[1]

    def assume_conjuncts(self, line: int, formula: Formula, context: Dict[int, int]) -> None:
        if isinstance(formula, And):
            left = self.emit(formula.left, Rule.AND_ELIM, (line,))
            self.assume_conjuncts(left, formula.left, context)
            right = self.emit(formula.right, Rule.AND_ELIM, (line,))
            self.assume_conjuncts(right, formula.right, context)
        else:
            context[self.to_literal(formula)] = line

    def refute_disjuncts(self, line: int, formula: Formula, context: Dict[int, int]) -> None:
        """From ¬(a ∨ b) at `line`, put the complement of every disjunct into the context"""
        if isinstance(formula, Or):
            for side in (formula.left, formula.right):
                start = self.open(side)
                widened = self.emit(formula, Rule.OR_INTRO, (start,))
                self.close()
                negated = self.emit(Not(side), Rule.NOT_INTRO, (start, widened, line))
                self.refute_disjuncts(negated, side, context)
            return
        if isinstance(formula, Atom):
            context[-self.to_literal(formula)] = line
            return
        atom = formula.operand
        context[self.to_literal(atom)] = self.emit(atom, Rule.NOT_ELIM, (line,))

    def goal(self, formula: Formula, context: Dict[int, int], refutations: List[Refutation]) -> int:
        """Derive `formula` in the current subproof, consuming one refutation per disjunctive obligation"""
        if isinstance(formula, And):
            left = self.goal(formula.left, context, refutations)
            right = self.goal(formula.right, context, refutations)
            return self.emit(formula, Rule.AND_INTRO, (left, right))
        if isinstance(formula, Implies):
            start = self.open(formula.antecedent)
            inner = dict(context)
            self.assume_conjuncts(start, formula.antecedent, inner)
            end = self.here(self.goal(formula.consequent, inner, refutations))
            self.close()
            return self.emit(formula, Rule.CONDITIONAL_PROOF, (start, end))
        start = self.open(Not(formula))
        inner = dict(context)
        self.refute_disjuncts(start, formula, inner)
        refs = self.replay(refutations.pop(0), inner)
        self.close()
        twice = self.emit(Not(Not(formula)), Rule.NOT_INTRO, (start, *refs))
        return self.emit(formula, Rule.NOT_ELIM, (twice,))


def obligations(formula: Formula, context: Tuple[Formula, ...] = ()) -> List[Tuple[Tuple[Formula, ...], Formula]]:
    """(assumed literals, disjunction to show) pairs whose joint validity is the formula's, in proof order"""
    if isinstance(formula, And):
        return obligations(formula.left, context) + obligations(formula.right, context)
    if isinstance(formula, Implies):
        return obligations(formula.consequent, context + tuple(_conjuncts(formula.antecedent)))
    return [(context, formula)]


def _conjuncts(formula: Formula) -> List[Formula]:
    if isinstance(formula, And):
        return _conjuncts(formula.left) + _conjuncts(formula.right)
    return [formula]


def disjuncts(formula: Formula) -> List[Formula]:
    if isinstance(formula, Or):
        return disjuncts(formula.left) + disjuncts(formula.right)
    return [formula]


# Checking


def _chains(steps: Sequence[Step]) -> Optional[List[Tuple[int, ...]]]:
    """Open-subproof chain (assumption lines) per step, or None when depths are malformed"""
    chains: List[Tuple[int, ...]] = []
    stack: List[int] = []
    previous = 0
    for index, step in enumerate(steps):
        if step.depth < 0:
            return None
        if step.rule is Rule.ASSUMPTION and step.depth > 0:
            if step.depth > previous + 1:
                return None
            del stack[step.depth - 1:]
            if len(stack) != step.depth - 1:
                return None
            stack.append(index)
        else:
            if step.depth > len(stack):
                return None
            del stack[step.depth:]
        chains.append(tuple(stack))
        previous = step.depth
    return chains


def _is_prefix(prefix: Tuple[int, ...], chain: Tuple[int, ...]) -> bool:
    return chain[: len(prefix)] == prefix


class _Checker:
    def __init__(self, steps: Sequence[Step], premises: FrozenSet[Formula], chains: List[Tuple[int, ...]]):
        self.steps = steps
        self.premises = premises
        self.chains = chains

    def accessible(self, ref: int, at: int) -> bool:
        return 0 <= ref < at and _is_prefix(self.chains[ref], self.chains[at])

    def subproof(self, start: int, end: int, at: int) -> bool:
        """Lines start..end form a subproof closed just before line `at`"""
        if not (0 <= start <= end < at):
            return False
        if self.steps[start].rule is not Rule.ASSUMPTION or self.steps[start].depth == 0:
            return False
        opened = self.chains[start]
        return (
            opened[-1] == start
            and self.chains[at] + (start,) == opened
            and self.chains[end] == opened
            and _is_prefix(opened, self.chains[at - 1])
        )

    def visible_from(self, ref: int, start: int) -> bool:
        """Line usable at the top level of the subproof opened at `start`"""
        return 0 <= ref and _is_prefix(self.chains[ref], self.chains[start])

    def valid(self, index: int) -> bool:
        step = self.steps[index]
        f, refs = step.formula, step.refs
        rule = step.rule
        if rule is Rule.ASSUMPTION:
            return not refs and (step.depth > 0 or f in self.premises)
        if rule is Rule.CONDITIONAL_PROOF:
            if len(refs) != 2 or not self.subproof(refs[0], refs[1], index):
                return False
            return f == Implies(self.steps[refs[0]].formula, self.steps[refs[1]].formula)
        if rule is Rule.NOT_INTRO:
            if len(refs) != 3:
                return False
            start, a, b = refs
            if not self.subproof(start, start, index):
                return False
            if not all(r < index and self.visible_from(r, start) for r in (a, b)):
                return False
            if self.steps[b].formula != Not(self.steps[a].formula):
                return False
            return f == Not(self.steps[start].formula)
        if not all(self.accessible(r, index) for r in refs):
            return False
        cited = [self.steps[r].formula for r in refs]
        if rule is Rule.REPETITION:
            return len(cited) == 1 and f == cited[0]
        if rule is Rule.MODUS_PONENS:
            return len(cited) == 2 and cited[1] == Implies(cited[0], f)
        if rule is Rule.AND_INTRO:
            return len(cited) == 2 and f == And(cited[0], cited[1])
        if rule is Rule.AND_ELIM:
            return len(cited) == 1 and isinstance(cited[0], And) and f in (cited[0].left, cited[0].right)
        if rule is Rule.OR_INTRO:
            return len(cited) == 1 and isinstance(f, Or) and cited[0] in (f.left, f.right)
        if rule is Rule.OR_ELIM:
            if len(cited) != 3 or not isinstance(cited[0], Or):
                return False
            return cited[1] == Implies(cited[0].left, f) and cited[2] == Implies(cited[0].right, f)
        if rule is Rule.NOT_ELIM:
            return len(cited) == 1 and cited[0] == Not(Not(f))
        return False


def check_steps(proof: Proof, premises: Iterable[Formula]) -> bool:
    """Every step a legal use of its rule, premises drawn from `premises`, ending on the goal at depth 0"""
    steps = proof.steps
    if not steps or steps[-1].depth != 0 or steps[-1].formula != proof.goal:
        return False
    chains = _chains(steps)
    if chains is None:
        return False
    checker = _Checker(steps, frozenset(premises), chains)
    return all(checker.valid(i) for i in range(len(steps)))
