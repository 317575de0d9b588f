"""
DPLL over integer clauses that keeps the refutation it found, so a proof can be replayed from it
"""

from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Deque, Dict, List, Optional, Sequence, Tuple

# (literal, index of the clause that forced it; None for assumptions and decisions)
Pending = Tuple[int, Optional[int]]


@dataclass
class Refutation:
    """
    One node of a closed DPLL tree.

    `propagated` lists the literals unit propagation forced here, with their reason clauses, in the
    order they were assigned. The node closes on a falsified clause (`conflict`), on an atom the
    assumptions fix both ways (`clash`), or by branching on `branch` with both children closed.
    """

    propagated: List[Tuple[int, int]] = field(default_factory=list)
    conflict: Optional[int] = None
    clash: Optional[int] = None
    branch: Optional[int] = None
    positive: Optional["Refutation"] = None
    negative: Optional["Refutation"] = None

    @property
    def clauses_used(self) -> List[int]:
        used = {ci for ci, _ in self.propagated}
        if self.conflict is not None:
            used.add(self.conflict)
        for child in (self.positive, self.negative):
            if child is not None:
                used |= set(child.clauses_used)
        return sorted(used)

    @property
    def size(self) -> int:
        children = sum(child.size for child in (self.positive, self.negative) if child is not None)
        return 1 + children


@dataclass
class _Frame:
    node: Refutation
    assignment: Dict[int, bool]
    queue: Deque[Pending]
    start: int = 0
    stage: int = 0


class Solver:
    """Clause database with occurrence lists; `solve` is reentrant"""

    def __init__(self, clauses: Sequence[Sequence[int]]):
        self.clauses: List[Tuple[int, ...]] = [tuple(sorted(set(c), key=abs)) for c in clauses]
        self.occurrences: Dict[int, List[int]] = defaultdict(list)
        for index, clause in enumerate(self.clauses):
            for lit in clause:
                self.occurrences[lit].append(index)

    def _value(self, assignment: Dict[int, bool], lit: int) -> Optional[bool]:
        value = assignment.get(abs(lit))
        if value is None:
            return None
        return value if lit > 0 else not value

    def _propagate(self, frame: _Frame) -> None:
        assignment, node, queue = frame.assignment, frame.node, frame.queue
        while queue:
            lit, reason = queue.popleft()
            current = self._value(assignment, lit)
            if current is True:
                continue
            if current is False:
                if reason is None:
                    node.clash = abs(lit)
                else:
                    node.conflict = reason
                return
            assignment[abs(lit)] = lit > 0
            if reason is not None:
                node.propagated.append((reason, lit))
            for index in self.occurrences.get(-lit, ()):
                open_literals = []
                satisfied = False
                for other in self.clauses[index]:
                    value = self._value(assignment, other)
                    if value is True:
                        satisfied = True
                        break
                    if value is None:
                        open_literals.append(other)
                if satisfied:
                    continue
                if not open_literals:
                    node.conflict = index
                    return
                if len(open_literals) == 1:
                    queue.append((open_literals[0], index))

    def _pick(self, frame: _Frame) -> Optional[int]:
        """First open atom of the first clause not yet satisfied; satisfied clauses stay so deeper down"""
        assignment = frame.assignment
        for index in range(frame.start, len(self.clauses)):
            clause = self.clauses[index]
            values = [self._value(assignment, lit) for lit in clause]
            if any(v is True for v in values):
                continue
            frame.start = index
            return next(abs(lit) for lit, v in zip(clause, values) if v is None)
        return None

    def solve(self, assumptions: Sequence[int] = ()) -> Tuple[Optional[Dict[int, bool]], Optional[Refutation]]:
        """(model, None) when the clauses and assumptions are satisfiable, else (None, refutation)"""
        queue: Deque[Pending] = deque((lit, None) for lit in assumptions)
        queue.extend((clause[0], index) for index, clause in enumerate(self.clauses) if len(clause) == 1)
        root = Refutation()
        stack = [_Frame(root, {}, queue)]
        while stack:
            frame = stack[-1]
            if frame.stage == 0:
                self._propagate(frame)
                if frame.node.conflict is not None or frame.node.clash is not None:
                    stack.pop()
                    continue
                atom = self._pick(frame)
                if atom is None:
                    return dict(frame.assignment), None
                frame.node.branch = atom
                frame.node.positive = Refutation()
                frame.stage = 1
                stack.append(_Frame(frame.node.positive, dict(frame.assignment), deque([(atom, None)]), frame.start))
            elif frame.stage == 1:
                frame.node.negative = Refutation()
                frame.stage = 2
                atom = frame.node.branch
                stack.append(_Frame(frame.node.negative, dict(frame.assignment), deque([(-atom, None)]), frame.start))
            else:
                stack.pop()
        return None, root
