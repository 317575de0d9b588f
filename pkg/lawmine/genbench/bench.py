"""
Benchmark curves: rule coverage and runtime against the example budget, and the lattice-size ratio
between Domain Counting and uniform sampling
"""

import math
import time
from dataclasses import dataclass, replace
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import stats as scipy_stats

from lawmine.errors import ConfigurationError, NoSurvivors, QueryTooLarge
from lawmine.ingest import Dataset
from lawmine.language.terms import Constraint, Variable, Vocabulary
from lawmine.lattice.learner import LearnerConfig, LearnResult, learn
from lawmine.services.logger_service import get_logger, log_execution_time
from lawmine.stats import CertificationConfig, certify
from lawmine.theory.prover import Theory, build_theory, entails

from .plant import PlantRule, PlantSpec, plant

logger = get_logger("genbench.bench")

BENCH_KINDS = ("coverage", "runtime", "efficiency")


def coverage(
    theory: Union[Theory, Sequence[Constraint]],
    rules: Sequence[Constraint],
    vocab: Optional[Vocabulary] = None,
    atom_budget: Optional[int] = None,
) -> float:
    """Share of benchmark rules the theory proves; an empty benchmark counts as fully covered"""
    if not rules:
        return 1.0
    th = theory if isinstance(theory, Theory) else build_theory(theory, vocab)
    covered = 0
    for rule in rules:
        try:
            covered += entails(th, [rule], atom_budget=atom_budget)
        except QueryTooLarge as e:
            logger.warning(f"Coverage query skipped - rule: {rule}", **e.details)
    return covered / len(rules)


@dataclass(frozen=True)
class BenchPoint:
    budget: int
    seed: int
    value: float
    rows_seen: int
    candidates: int
    seconds: float


def _budget_config(cfg: LearnerConfig, budget: int, seed: int, sampling: Optional[str] = None) -> LearnerConfig:
    """A budget of b examples spreads over the layers as batches of ceil(b / max_iterations)"""
    if budget < 1:
        raise ConfigurationError(f"example budget must be at least 1, got {budget}", {"budget": budget})
    batch_size = max(1, math.ceil(budget / cfg.max_iterations))
    return replace(cfg, batch_size=batch_size, seed=seed, sampling=sampling or cfg.sampling)


def _timed_learn(d: Dataset, vocab: Vocabulary, cfg: LearnerConfig) -> Tuple[LearnResult, float]:
    started = time.perf_counter()
    result = learn(d, vocab, cfg)
    return result, time.perf_counter() - started


@log_execution_time("genbench.coverage_curve")
def coverage_curve(
    d: Dataset,
    vocab: Vocabulary,
    rules: Sequence[Constraint],
    budgets: Iterable[int],
    cfg: Optional[LearnerConfig] = None,
    seeds: Iterable[int] = (0,),
    certification: Optional[CertificationConfig] = None,
) -> List[BenchPoint]:
    """Coverage of the benchmark rules by the theory learned at each budget and seed"""
    cfg = cfg or LearnerConfig()
    points = []
    for budget in budgets:
        for seed in seeds:
            result, seconds = _timed_learn(d, vocab, _budget_config(cfg, budget, seed))
            constraints = list(result.constraints)
            if certification is not None:
                try:
                    constraints = list(certify(constraints, d, replace(certification, seed=seed)).constraints)
                except NoSurvivors:
                    constraints = []
            value = coverage(constraints, rules, vocab, cfg.atom_budget)
            points.append(BenchPoint(budget, seed, value, result.rows_seen, result.candidates_materialized, seconds))
            logger.info(f"Coverage point - budget: {budget}, seed: {seed}, coverage: {value:.3f}")
    return points


@log_execution_time("genbench.runtime_curve")
def runtime_curve(
    d: Dataset,
    vocab: Vocabulary,
    budgets: Iterable[int],
    cfg: Optional[LearnerConfig] = None,
    seeds: Iterable[int] = (0,),
) -> List[BenchPoint]:
    cfg = cfg or LearnerConfig()
    points = []
    for budget in budgets:
        for seed in seeds:
            result, seconds = _timed_learn(d, vocab, _budget_config(cfg, budget, seed))
            points.append(BenchPoint(budget, seed, seconds, result.rows_seen, result.candidates_materialized, seconds))
            logger.info(f"Runtime point - budget: {budget}, seed: {seed}, seconds: {seconds:.3f}")
    return points


def loglog_slope(points: Sequence[BenchPoint]) -> Optional[float]:
    """Slope of log(value) against log(budget); None without two distinct budgets"""
    usable = [(p.budget, p.value) for p in points if p.value > 0]
    if len({b for b, _ in usable}) < 2:
        return None
    x = np.log([b for b, _ in usable])
    y = np.log([v for _, v in usable])
    return float(scipy_stats.linregress(x, y).slope)


@dataclass(frozen=True)
class EfficiencyResult:
    budget: int
    dc: List[int]
    uniform: List[int]

    @property
    def ratios(self) -> List[float]:
        return [a / b for a, b in zip(self.dc, self.uniform) if b]

    @property
    def ratio(self) -> Optional[float]:
        ratios = self.ratios
        return float(np.mean(ratios)) if ratios else None


@log_execution_time("genbench.efficiency")
def efficiency(
    d: Dataset,
    vocab: Vocabulary,
    budget: int,
    cfg: Optional[LearnerConfig] = None,
    seeds: Iterable[int] = range(5),
) -> EfficiencyResult:
    """Candidates materialized under DC and uniform sampling at the same example budget"""
    cfg = cfg or LearnerConfig()
    dc, uniform = [], []
    for seed in seeds:
        dc.append(learn(d, vocab, _budget_config(cfg, budget, seed, "dc")).candidates_materialized)
        uniform.append(learn(d, vocab, _budget_config(cfg, budget, seed, "uniform")).candidates_materialized)
    result = EfficiencyResult(budget, dc, uniform)
    ratio = result.ratio
    logger.info(f"Efficiency completed - budget: {budget}, seeds: {len(dc)}, ratio: {ratio if ratio is None else round(ratio, 3)}")
    return result


def points_frame(points: Sequence[BenchPoint]) -> pd.DataFrame:
    """Curve points as a table, one row per (budget, seed)"""
    columns = ["budget", "seed", "value", "rows_seen", "candidates", "seconds"]
    return pd.DataFrame([[getattr(p, c) for c in columns] for p in points], columns=columns)


def skewed_spec(rows: int = 20000, rare_share: float = 0.01, seed: int = 0) -> PlantSpec:
    """Service/port table where one service value appears in rare_share of the rows"""
    common = (1 - rare_share) / 3
    vocab = Vocabulary(
        (
            Variable.nominal("Service", ["web", "mail", "dns", "rare"]),
            Variable.nominal("Port", [25, 53, 80, 443, 9999]),
            Variable.ordinal("Size", 0, 100),
        )
    )
    rules = (
        PlantRule('Service="web" -> Port in {80, 443}'),
        PlantRule('Service="mail" -> Port=25'),
        PlantRule('Service="dns" -> Port=53 & Size <= 40'),
        PlantRule('Service="rare" -> Port=9999 & Size <= 10'),
    )
    # domain order: dns, mail, rare, web
    weights = {"Service": (common, common, rare_share, common)}
    return PlantSpec(vocab, rules, rows=rows, seed=seed, weights=weights)


def skewed_dataset(rows: int = 20000, rare_share: float = 0.01, seed: int = 0) -> Dataset:
    d, _ = plant(skewed_spec(rows, rare_share, seed))
    return d
