"""
Domain Counting sampler: draws the row holding the least-sampled (then rarest) value of each
variable in turn, so rare values reach the learner early. Also the uniform sampler used for
certification and baselines.
"""

import heapq
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Any, Deque, Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from lawmine.errors import ConfigurationError, EmptyDataset, Exhausted, SampleTooLarge
from lawmine.evaluation import SampleTable, violation_mask
from lawmine.ingest import Dataset
from lawmine.language.terms import Constraint, Value, value_sort_key
from lawmine.services.logger_service import get_logger
from lawmine.services.monitoring_service import get_monitoring_service

logger = get_logger("sampler")

# heap entry: (times_sampled, rarity_rank, value)
HeapEntry = Tuple[int, int, Value]


@dataclass
class DcState:
    """Mutable Domain Counting state; one sampling sequence per instance"""

    variables: Tuple[str, ...]
    rows: Sequence[Dict[str, Any]]
    heaps: Dict[str, List[HeapEntry]] = field(default_factory=dict)
    times: Dict[str, Dict[Value, int]] = field(default_factory=dict)
    ranks: Dict[str, Dict[Value, int]] = field(default_factory=dict)
    index_sets: Dict[str, Dict[Value, Deque[int]]] = field(default_factory=dict)
    visited: Set[int] = field(default_factory=set)
    cursor: int = 0

    @property
    def remaining(self) -> int:
        return len(self.rows) - len(self.visited)

    def _top(self, var: str) -> Optional[HeapEntry]:
        """Least-sampled live value, discarding stale heap entries"""
        heap = self.heaps[var]
        while heap:
            times, rank, value = heap[0]
            if value in self.times[var] and self.times[var][value] == times:
                return heap[0]
            heapq.heappop(heap)
        return None

    def _remove(self, var: str, value: Value) -> None:
        del self.times[var][value]
        del self.index_sets[var][value]

    def _pop_fresh(self, var: str) -> Optional[int]:
        while True:
            entry = self._top(var)
            if entry is None:
                return None
            value = entry[2]
            queue = self.index_sets[var][value]
            while queue and queue[0] in self.visited:
                queue.popleft()
            if not queue:
                self._remove(var, value)
                continue
            index = queue.popleft()
            if not queue:
                self._remove(var, value)
            return index

    def _record(self, index: int) -> None:
        self.visited.add(index)
        row = self.rows[index]
        for var in self.variables:
            value = row.get(var)
            if value is None or value not in self.times[var]:
                continue
            self.times[var][value] += 1
            heapq.heappush(self.heaps[var], (self.times[var][value], self.ranks[var][value], value))


def dc_init(d: Dataset, variables: Optional[Sequence[str]] = None) -> DcState:
    """Counters at zero, rarity ranks from raw frequencies, one index queue per (variable, value)"""
    if d.row_count == 0:
        raise EmptyDataset("cannot sample from an empty dataset")
    names = tuple(variables) if variables is not None else d.columns
    rows = list(d.rows)
    state = DcState(variables=names, rows=rows)
    for var in names:
        queues: Dict[Value, Deque[int]] = {}
        for index, row in enumerate(rows):
            value = row.get(var)
            if value is not None:
                queues.setdefault(value, deque()).append(index)
        frequency = Counter({value: len(queue) for value, queue in queues.items()})
        ordered = sorted(frequency, key=lambda v: (frequency[v], value_sort_key(v)))
        state.ranks[var] = {value: rank for rank, value in enumerate(ordered)}
        state.times[var] = {value: 0 for value in ordered}
        state.index_sets[var] = queues
        state.heaps[var] = [(0, rank, value) for rank, value in enumerate(ordered)]
        heapq.heapify(state.heaps[var])
    return state


def dc_order(state: DcState, var: str) -> List[Value]:
    """Live values of a variable in draw priority order"""
    return sorted(state.times[var], key=lambda v: (state.times[var][v], state.ranks[var][v]))


def dc_next(state: DcState) -> int:
    """Next unvisited row, trying variables round-robin from the cursor"""
    count = len(state.variables)
    for step in range(count):
        var = state.variables[(state.cursor + step) % count]
        index = state._pop_fresh(var)
        if index is not None:
            state.cursor = (state.cursor + 1) % count
            state._record(index)
            get_monitoring_service().increment_counter("sampler.rows_drawn")
            return index
    # rows whose every cell is null are reachable through no variable
    for index in range(len(state.rows)):
        if index not in state.visited:
            state._record(index)
            get_monitoring_service().increment_counter("sampler.rows_drawn")
            return index
    raise Exhausted("every row has been drawn", {"rows": len(state.rows)})


def dc_draw(state: DcState, limit: int) -> List[int]:
    """Up to `limit` rows; stops early when the dataset is exhausted"""
    drawn: List[int] = []
    while len(drawn) < limit:
        try:
            drawn.append(dc_next(state))
        except Exhausted:
            if not drawn:
                raise
            break
    return drawn


def dc_evaluate(
    d: Dataset, limit: int, candidates: Sequence[Constraint], state: Optional[DcState] = None
) -> Tuple[List[bool], List[int]]:
    """Violation flag per candidate over up to `limit` DC-drawn rows, plus the drawn indices"""
    if limit < 1:
        raise ConfigurationError(f"sample limit must be at least 1, got {limit}")
    state = state if state is not None else dc_init(d)
    drawn = dc_draw(state, limit)
    table = SampleTable.from_dataset(d, drawn)
    flags = [bool(violation_mask(table, c).any()) for c in candidates]
    logger.debug("DC batch evaluated", drawn=len(drawn), candidates=len(candidates), flagged=sum(flags))
    return flags, drawn


def uniform_sample(d: Dataset, n: int, seed: int, exclude: Optional[Set[int]] = None) -> List[int]:
    """n distinct row indices drawn uniformly without replacement"""
    if n < 1:
        raise ConfigurationError(f"sample size must be at least 1, got {n}")
    available = np.arange(d.row_count)
    if exclude:
        available = available[~np.isin(available, np.fromiter(exclude, dtype=np.int64))]
    if n > len(available):
        raise SampleTooLarge(n, len(available))
    rng = np.random.default_rng(seed)
    chosen = rng.choice(available, size=n, replace=False)
    get_monitoring_service().increment_counter("sampler.rows_drawn", n)
    return [int(i) for i in chosen]
