"""
Certification of learned constraints on uniformly drawn test rows, with the zero-violation
Clopper-Pearson bound on each survivor's violation rate
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from lawmine.config.settings import get_settings
from lawmine.errors import ConfigurationError, NoSurvivors, SampleTooLarge, StatsDomainError
from lawmine.evaluation import SampleTable, violation_mask
from lawmine.ingest import Dataset
from lawmine.language.terms import Constraint
from lawmine.sampler import uniform_sample
from lawmine.services.logger_service import get_logger, log_execution_time
from lawmine.services.monitoring_service import get_monitoring_service

logger = get_logger("stats")

# Learning draws rows with Domain Counting and testing draws them uniformly, so the bound is
# reported for the least favourable of the two distributions.
WORST_CASE_NOTE = "bound holds under the uniform test distribution; DC learning only shifts mass toward rare values"


def clopper_upper(n: int, confidence: float) -> float:
    """
    Upper confidence bound on a violation rate after n clean trials: 1 - (1 - confidence)^(1/n).

    Computed as -expm1(log1p(-confidence) / n) so large n keeps its precision.
    """
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise StatsDomainError(f"sample size must be a positive integer, got {n!r}", {"n": n})
    if not 0 < confidence < 1:
        raise StatsDomainError(f"confidence must lie strictly between 0 and 1, got {confidence}", {"confidence": confidence})
    return -math.expm1(math.log1p(-confidence) / int(n))


@dataclass(frozen=True)
class CertificationConfig:
    n: int = 1000
    confidence: float = 0.95
    max_rounds: int = 3
    seed: int = 0
    workers: int = 1
    exhaustive_fallback: bool = False

    def __post_init__(self):
        errors = {}
        if self.n < 1:
            errors["n"] = f"must be at least 1, got {self.n}"
        if not 0 < self.confidence < 1:
            errors["confidence"] = f"must lie strictly between 0 and 1, got {self.confidence}"
        if self.max_rounds < 1:
            errors["max_rounds"] = f"must be at least 1, got {self.max_rounds}"
        if self.workers < 1:
            errors["workers"] = f"must be at least 1, got {self.workers}"
        if errors:
            raise ConfigurationError("invalid certification configuration", errors)

    @property
    def p_max(self) -> float:
        return clopper_upper(self.n, self.confidence)

    @property
    def z_star(self) -> float:
        return 1 - self.p_max

    @classmethod
    def from_settings(cls, **overrides) -> "CertificationConfig":
        settings = get_settings()
        values = {
            "n": settings.cert_n,
            "confidence": settings.confidence,
            "max_rounds": settings.cert_rounds,
            "seed": settings.seed,
            "workers": settings.workers,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(frozen=True)
class ConstraintRecord:
    constraint: Constraint
    rounds_survived: int
    violations: int
    removed_in_round: Optional[int] = None
    first_violation_row: Optional[int] = None

    @property
    def survived(self) -> bool:
        return self.removed_in_round is None


@dataclass(frozen=True)
class CertifiedTheory:
    """Survivors, per-constraint history and the bound certified for the survivors"""

    constraints: Tuple[Constraint, ...]
    records: Tuple[ConstraintRecord, ...]
    p_max: float
    z_star: float
    rounds_used: int
    converged: bool
    exhaustive: bool
    tested_rows: int
    note: str = WORST_CASE_NOTE

    @property
    def removed(self) -> List[ConstraintRecord]:
        return [r for r in self.records if not r.survived]

    def __len__(self) -> int:
        return len(self.constraints)


def _violations(constraint: Constraint, table: SampleTable) -> Tuple[int, Optional[int]]:
    mask = violation_mask(table, constraint)
    hits = np.flatnonzero(mask)
    if not len(hits):
        return 0, None
    return int(len(hits)), int(table.indices[hits[0]])


def _test(constraints: Sequence[Constraint], table: SampleTable, workers: int) -> List[Tuple[int, Optional[int]]]:
    step = partial(_violations, table=table)
    if workers <= 1 or len(constraints) < 2 * workers:
        return [step(c) for c in constraints]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(step, constraints))


@log_execution_time("stats.certify")
def certify(constraints: Sequence[Constraint], d: Dataset, cfg: Optional[CertificationConfig] = None) -> CertifiedTheory:
    """
    Test the constraints on rounds of n fresh uniform rows, removing every constraint a test row
    violates, until a round is clean or the round budget runs out.

    Rounds are disjoint while enough untested rows remain. With fewer than n rows in the dataset
    the run either fails or, with `exhaustive_fallback`, checks every row once and certifies z* = 1.
    """
    cfg = cfg or CertificationConfig()
    if not constraints:
        raise ConfigurationError("nothing to certify: the constraint set is empty")
    monitoring = get_monitoring_service()
    live: Dict[Constraint, Dict] = {
        c: {"rounds": 0, "violations": 0, "removed": None, "first": None} for c in dict.fromkeys(constraints)
    }
    exhaustive = d.row_count < cfg.n
    if exhaustive and not cfg.exhaustive_fallback:
        raise SampleTooLarge(cfg.n, d.row_count)

    tested: Set[int] = set()
    rounds_used = 0
    converged = False
    for round_index in range(1, (1 if exhaustive else cfg.max_rounds) + 1):
        survivors = [c for c, s in live.items() if s["removed"] is None]
        if exhaustive:
            indices = list(range(d.row_count))
        else:
            fresh = d.row_count - len(tested) >= cfg.n
            indices = uniform_sample(d, cfg.n, cfg.seed + round_index - 1, exclude=tested if fresh else None)
        tested.update(indices)
        table = SampleTable.from_dataset(d, indices)
        results = _test(survivors, table, cfg.workers)
        rounds_used = round_index
        removed = 0
        for constraint, (count, first) in zip(survivors, results):
            state = live[constraint]
            if count:
                state.update(violations=state["violations"] + count, removed=round_index, first=first)
                removed += 1
            else:
                state["rounds"] += 1
        monitoring.increment_counter("stats.removed", removed)
        logger.info(
            f"Certification round completed - round: {round_index}, tested: {len(survivors)}, removed: {removed}",
            rows=len(indices),
        )
        if removed == 0:
            converged = True
            break

    records = tuple(
        ConstraintRecord(c, s["rounds"], s["violations"], s["removed"], s["first"]) for c, s in live.items()
    )
    survivors = tuple(r.constraint for r in records if r.survived)
    if not survivors:
        raise NoSurvivors(
            f"every one of {len(records)} constraints was violated during certification",
            {"constraints": len(records), "rounds": rounds_used},
        )
    p_max = 0.0 if exhaustive else cfg.p_max
    return CertifiedTheory(
        constraints=survivors,
        records=records,
        p_max=p_max,
        z_star=1 - p_max,
        rounds_used=rounds_used,
        converged=converged,
        exhaustive=exhaustive,
        tested_rows=len(tested),
    )
