"""
Applying a theory to data: violation reports, entailment-aware theory differences and the
rejection filter
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from lawmine.errors import SchemaMismatch
from lawmine.evaluation import SampleTable, constraint_masks
from lawmine.ingest import Dataset
from lawmine.language.terms import Constraint, Vocabulary
from lawmine.services.logger_service import get_logger, log_execution_time
from lawmine.services.monitoring_service import get_monitoring_service
from lawmine.theory.prover import build_theory, entails

logger = get_logger("audit")


def check_schema(constraints: Sequence[Constraint], columns: Iterable[str]) -> None:
    known = set(columns)
    missing = sorted({name for c in constraints for name in c.variables} - known)
    if missing:
        raise SchemaMismatch(
            f"data lacks columns the theory uses: {', '.join(missing)}", {"missing": missing}
        )


def _masks(constraint: Constraint, table: SampleTable) -> Tuple[np.ndarray, np.ndarray]:
    satisfied, evaluable = constraint_masks(table, constraint)
    return evaluable & ~satisfied, evaluable


def _matrix(constraints: Sequence[Constraint], table: SampleTable, workers: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    """(violated, evaluable) as rows x constraints boolean matrices"""
    step = partial(_masks, table=table)
    if workers > 1 and len(constraints) >= 2 * workers:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            columns = list(pool.map(step, constraints))
    else:
        columns = [step(c) for c in constraints]
    shape = (table.row_count, len(constraints))
    violated = np.zeros(shape, dtype=bool)
    evaluable = np.zeros(shape, dtype=bool)
    for j, (v, e) in enumerate(columns):
        violated[:, j] = v
        evaluable[:, j] = e
    return violated, evaluable


@dataclass(frozen=True)
class ViolationReport:
    """Per-row violations of a theory; every aggregate is derived from the matrix"""

    constraints: Tuple[Constraint, ...]
    violated: np.ndarray
    evaluable: np.ndarray
    row_indices: np.ndarray

    @property
    def row_count(self) -> int:
        return int(self.violated.shape[0])

    @property
    def counts(self) -> np.ndarray:
        return self.violated.sum(axis=0).astype(int)

    @property
    def not_evaluable(self) -> np.ndarray:
        return (~self.evaluable).sum(axis=0).astype(int)

    @property
    def per_row(self) -> np.ndarray:
        return self.violated.sum(axis=1).astype(int)

    @property
    def distinct_violated(self) -> int:
        return int((self.counts > 0).sum())

    @property
    def violation_rate(self) -> float:
        """Fraction of rows violating at least one constraint"""
        if not self.row_count:
            return 0.0
        return float((self.per_row > 0).mean())

    def constraint_rate(self, j: int) -> float:
        """Violations over rows where the constraint could be evaluated"""
        evaluated = int(self.evaluable[:, j].sum())
        return float(self.counts[j] / evaluated) if evaluated else 0.0

    def violated_by_row(self) -> Dict[int, List[int]]:
        rows, cols = np.nonzero(self.violated)
        result: Dict[int, List[int]] = {}
        for r, c in zip(rows.tolist(), cols.tolist()):
            result.setdefault(int(self.row_indices[r]), []).append(c)
        return result

    def cdf(self) -> List[Tuple[int, float]]:
        """(k, share of rows violating at most k constraints) for k = 0..max"""
        if not self.row_count:
            return []
        per_row = self.per_row
        tally = np.bincount(per_row)
        cumulative = np.cumsum(tally) / self.row_count
        return [(k, float(share)) for k, share in enumerate(cumulative)]


@log_execution_time("audit.check_violations")
def check_violations(constraints: Sequence[Constraint], d: Dataset, workers: int = 1) -> ViolationReport:
    """Evaluate every constraint on every row; rows missing a needed value count as not evaluable"""
    constraints = tuple(dict.fromkeys(constraints))
    check_schema(constraints, d.columns)
    table = SampleTable.from_dataset(d)
    violated, evaluable = _matrix(constraints, table, workers)
    report = ViolationReport(constraints, violated, evaluable, table.indices)
    get_monitoring_service().increment_counter("audit.violations", int(violated.sum()))
    logger.info(
        f"Violation check completed - rows: {report.row_count}, constraints: {len(constraints)}, "
        f"violation rate: {report.violation_rate:.4f}",
        distinct_violated=report.distinct_violated,
    )
    return report


def diff(
    unknown: Sequence[Constraint],
    normal: Sequence[Constraint],
    vocab: Optional[Vocabulary] = None,
    atom_budget: Optional[int] = None,
) -> List[Constraint]:
    """Constraints of `unknown` that the theory of `normal` does not entail, in their original order"""
    theory = build_theory(normal, vocab)
    suspicious = [c for c in dict.fromkeys(unknown) if not entails(theory, [c], atom_budget=atom_budget)]
    logger.info(f"Theory diff completed - unknown: {len(unknown)}, normal: {len(normal)}, suspicious: {len(suspicious)}")
    return suspicious


@dataclass(frozen=True)
class FilterResult:
    accepted: Dataset
    total: int
    rejected_by: Dict[Constraint, int]

    @property
    def accepted_count(self) -> int:
        return self.accepted.row_count

    @property
    def rejected_count(self) -> int:
        return self.total - self.accepted_count

    @property
    def acceptance_rate(self) -> float:
        return self.accepted_count / self.total if self.total else 1.0


@log_execution_time("audit.filter_rows")
def filter_rows(
    rows: Union[Dataset, Iterable[Mapping]],
    constraints: Sequence[Constraint],
    columns: Optional[Sequence[str]] = None,
    workers: int = 1,
) -> FilterResult:
    """
    Rejection filter: rows violating no constraint pass through unchanged. Each rejected row is
    attributed to every constraint it violates.
    """
    d = rows if isinstance(rows, Dataset) else Dataset.from_rows(rows, columns)
    constraints = tuple(dict.fromkeys(constraints))
    check_schema(constraints, d.columns)
    table = SampleTable.from_dataset(d)
    violated, _ = _matrix(constraints, table, workers)
    rejected = violated.any(axis=1)
    accepted = d.take(np.flatnonzero(~rejected).tolist())
    attribution = {c: int(n) for c, n in zip(constraints, violated.sum(axis=0)) if n}
    result = FilterResult(accepted, d.row_count, attribution)
    logger.info(
        f"Filter completed - rows: {result.total}, accepted: {result.accepted_count}, "
        f"acceptance rate: {result.acceptance_rate:.4f}"
    )
    return result
