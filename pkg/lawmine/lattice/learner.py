"""
Levelwise lattice learner.

Layer 0 holds bare predicates, layer 1 the seeded implications; every later layer is built from the
candidates eliminated in the previous one. Only the layer being refined and the one being built are
ever materialised.
"""

import time
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from itertools import combinations
from typing import Callable, Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from lawmine.config.settings import get_settings
from lawmine.errors import ConfigurationError, EmptyDataset, Exhausted
from lawmine.evaluation import SampleTable, violation_mask
from lawmine.ingest import Dataset
from lawmine.language.semantics import traversal_key
from lawmine.language.terms import Bias, Constraint, Literal, Op, Predicate, Provenance, Vocabulary
from lawmine.sampler import dc_draw, dc_init, uniform_sample
from lawmine.services.logger_service import get_logger, log_execution_time
from lawmine.services.monitoring_service import get_monitoring_service

from .candidates import (
    Candidate,
    CandidateStatus,
    Frontier,
    Side,
    SubsumptionIndex,
    ThresholdSlot,
    build_pool,
    clause_subsumes,
    dedupe,
    is_admissible,
    seed_candidates,
)
from .refinement import refine

logger = get_logger("lattice")

SAMPLING_MODES = ("dc", "uniform")
# entailment pruning issues one prover call per learned constraint
ENTAILMENT_PRUNING_LIMIT = 2000


@dataclass(frozen=True)
class LearnerConfig:
    arity_limit: int = 3
    batch_size: int = 256
    max_iterations: int = 8
    ladder_granularity: int = 0
    seed: int = 0
    sampling: str = "dc"
    workers: int = 1
    entailment_pruning: bool = True
    atom_budget: Optional[int] = None
    bias: Bias = field(default_factory=Bias)

    def __post_init__(self):
        errors = {}
        if self.arity_limit < 1:
            errors["arity_limit"] = f"must be at least 1, got {self.arity_limit}"
        if self.batch_size < 1:
            errors["batch_size"] = f"must be at least 1, got {self.batch_size}"
        if self.max_iterations < 1:
            errors["max_iterations"] = f"must be at least 1, got {self.max_iterations}"
        if self.ladder_granularity < 0:
            errors["ladder_granularity"] = f"must not be negative, got {self.ladder_granularity}"
        if self.sampling not in SAMPLING_MODES:
            errors["sampling"] = f"must be one of {', '.join(SAMPLING_MODES)}, got {self.sampling!r}"
        if self.workers < 1:
            errors["workers"] = f"must be at least 1, got {self.workers}"
        if errors:
            raise ConfigurationError("invalid learner configuration", errors)

    @classmethod
    def from_settings(cls, **overrides) -> "LearnerConfig":
        settings = get_settings()
        values = {
            "arity_limit": settings.arity,
            "batch_size": settings.batch_size,
            "max_iterations": settings.max_iterations,
            "seed": settings.seed,
            "workers": settings.workers,
            "atom_budget": settings.atom_budget,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(frozen=True)
class LayerStats:
    layer: int
    live: int
    learned: int
    eliminated: int
    retracted: int
    rows_seen: int
    seconds: float


@dataclass(frozen=True)
class LearnResult:
    constraints: Tuple[Constraint, ...]
    candidates_materialized: int
    layers: int
    rows_seen: int
    max_live_layers: int
    layer_stats: Tuple[LayerStats, ...] = ()
    sample_indices: Tuple[int, ...] = ()
    restarts: int = 0
    unspent_batches: int = 0

    def __iter__(self):
        return iter(self.constraints)

    def __len__(self) -> int:
        return len(self.constraints)


# Generalisation


@dataclass(frozen=True)
class _Item:
    """One literal of a candidate with its placement"""

    key: str
    side: Side
    predicate: Optional[Predicate] = None
    slot: Optional[ThresholdSlot] = None


def _items(candidate: Candidate) -> Tuple[List[_Item], List[_Item]]:
    antecedent = [_Item(str(Literal.of(p).negate()), Side.ANTECEDENT, p) for p in candidate.antecedent]
    consequent = [_Item(str(Literal.of(p)), Side.CONSEQUENT, p) for p in candidate.consequent]
    if candidate.slot is not None:
        item = _Item(candidate.slot.template_key, candidate.slot.side, slot=candidate.slot)
        (antecedent if candidate.slot.side is Side.ANTECEDENT else consequent).append(item)
    return antecedent, consequent


def _join(base: Candidate, extra: _Item) -> Optional[Candidate]:
    slot = base.slot.reset() if base.slot is not None else None
    if extra.slot is not None:
        if slot is not None:
            return None
        slot = extra.slot.reset()
    antecedent, consequent = base.antecedent, base.consequent
    if extra.predicate is not None:
        if extra.side is Side.ANTECEDENT:
            antecedent = antecedent + (extra.predicate,)
        else:
            consequent = consequent + (extra.predicate,)
    return Candidate(
        antecedent=tuple(sorted(antecedent)),
        consequent=tuple(sorted(consequent)),
        slot=slot,
        provenance=Provenance.GENERALIZED,
    )


def _sub_keys(candidate: Candidate) -> List[Tuple[str, ...]]:
    """Identities of the candidates one literal smaller; facts only count when the join is a fact"""
    antecedent, consequent = _items(candidate)
    keys = candidate.literal_keys()
    dropped = []
    if len(antecedent) > 1:
        dropped += antecedent
    if len(consequent) > 1:
        dropped += consequent
    return [tuple(sorted(keys - {item.key})) for item in dropped]


def generalize(
    eliminated: Sequence[Candidate],
    vocab: Vocabulary,
    arity_limit: int,
    bias: Optional[Bias] = None,
    learned: Optional[SubsumptionIndex] = None,
) -> List[Candidate]:
    """
    Join eliminated candidates that differ in one literal: under a shared antecedent the consequents
    are disjoined, under a shared consequent the antecedents are conjoined. A join survives when all
    of its well-formed sub-candidates were eliminated, no learned constraint subsumes it, and it obeys
    the shape rules.
    """
    eliminated_keys = {c.key for c in eliminated}
    buckets: Dict[Tuple, List[Tuple[int, _Item]]] = defaultdict(list)
    for index, candidate in enumerate(eliminated):
        antecedent, consequent = _items(candidate)
        ante_keys = frozenset(i.key for i in antecedent)
        cons_keys = frozenset(i.key for i in consequent)
        for item in consequent:
            buckets[("consequent", ante_keys, cons_keys - {item.key})].append((index, item))
        for item in antecedent:
            buckets[("antecedent", ante_keys - {item.key}, cons_keys)].append((index, item))

    joined: Dict[Tuple[str, ...], Candidate] = {}
    for bucket_key in sorted(buckets, key=lambda k: (k[0], sorted(k[1]), sorted(k[2]))):
        members = buckets[bucket_key]
        for (i, first), (_, second) in combinations(members, 2):
            if first.key == second.key:
                continue
            candidate = _join(eliminated[i], second)
            if candidate is None or candidate.key in joined:
                continue
            if not all(k in eliminated_keys for k in _sub_keys(candidate)):
                continue
            if learned is not None and learned.subsumes(candidate.fixed_literals(), candidate.variables):
                continue
            if not is_admissible(candidate, vocab, arity_limit, bias):
                continue
            joined[candidate.key] = candidate
    return list(joined.values())


def _fact_joins(eliminated: Sequence[Candidate], vocab: Vocabulary, arity_limit: int, bias: Optional[Bias]) -> List[Candidate]:
    """Set-membership facts: disjunctions of eliminated equality facts over one nominal variable"""
    by_subject: Dict[str, List[Candidate]] = defaultdict(list)
    for c in eliminated:
        if c.slot is None and not c.antecedent and len(c.consequent) == 1:
            p = c.consequent[0]
            if not p.is_linear and p.op is Op.EQ:
                by_subject[p.subject].append(c)
    joins: List[Candidate] = []
    for subject in sorted(by_subject):
        joins += generalize(by_subject[subject], vocab, arity_limit, bias)
    return joins


# Learning loop


@dataclass
class _Learned:
    constraint: Constraint
    clause: FrozenSet[Literal]
    layer: int


def _batch_source(d: Dataset, vocab: Vocabulary, cfg: LearnerConfig) -> Callable[[int, Set[int]], List[int]]:
    if cfg.sampling == "dc":
        state = dc_init(d, vocab.names)
        return lambda n, seen: dc_draw(state, n)

    rounds = [0]

    def uniform(n: int, seen: Set[int]) -> List[int]:
        available = d.row_count - len(seen)
        if available <= 0:
            raise Exhausted("every row has been drawn", {"rows": d.row_count})
        rounds[0] += 1
        return uniform_sample(d, min(n, available), cfg.seed + rounds[0], exclude=seen)

    return uniform


def _refine_layer(candidates: List[Candidate], table: SampleTable, vocab: Vocabulary, workers: int) -> List[Candidate]:
    step = partial(refine, table=table, vocab=vocab)
    if workers <= 1 or len(candidates) < 2 * workers:
        return [step(c) for c in candidates]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(step, candidates))


def prune_subsumed(constraints: Sequence[Tuple[Constraint, FrozenSet[Literal]]]) -> List[Tuple[Constraint, FrozenSet[Literal]]]:
    """Drop clauses entailed literal-by-literal by another kept clause; shorter clauses are kept first"""
    ordered = sorted(constraints, key=lambda item: (len(item[1]),) + traversal_key(item[0]))
    kept: List[Tuple[Constraint, FrozenSet[Literal]]] = []
    for constraint, clause in ordered:
        if any(clause_subsumes(other, clause) for _, other in kept):
            continue
        kept.append((constraint, clause))
    return kept


def prune_entailed(
    constraints: Sequence[Constraint], vocab: Optional[Vocabulary] = None, atom_budget: Optional[int] = None
) -> List[Constraint]:
    """Greedily drop constraints entailed by the rest, most general first"""
    from lawmine.theory.prover import build_theory, entails

    kept = sorted(constraints, key=traversal_key)
    for candidate in sorted(constraints, key=traversal_key, reverse=True):
        rest = [c for c in kept if c is not candidate]
        if len(rest) == len(kept):
            continue
        if entails(build_theory(rest, vocab), [candidate], atom_budget=atom_budget):
            kept = rest
    return kept


@log_execution_time("lattice.learn")
def learn(d: Dataset, vocab: Vocabulary, cfg: Optional[LearnerConfig] = None) -> LearnResult:
    """
    Levelwise traversal: each layer draws a fresh batch, re-validates what was learned on the new
    rows, refines the live candidates against every row seen so far, and generalises the
    eliminated ones into the next layer.

    A fresh batch that retracts a learned constraint restarts the traversal from the seeds on
    every row seen so far: the retracted constraint and whatever it pruned must be revisited.
    Each restart spends at least one batch, so a pass that completes without a retraction is a
    complete traversal of the sample. The loop stops once the frontier is empty even when
    ``max_iterations`` is not used up; the unspent count is reported on the result.
    """
    cfg = cfg or LearnerConfig()
    if d.row_count == 0:
        raise EmptyDataset("cannot learn from an empty dataset")
    if not len(vocab):
        raise ConfigurationError("vocabulary is empty")
    cfg.bias.check_names(d.columns)
    monitoring = get_monitoring_service()
    draw = _batch_source(d, vocab, cfg)
    seen: List[int] = []
    seen_set: Set[int] = set()
    budget = [cfg.max_iterations]

    def next_batch() -> List[int]:
        if budget[0] == 0:
            return []
        budget[0] -= 1
        try:
            batch = draw(cfg.batch_size, seen_set)
        except Exhausted:
            return []
        seen.extend(batch)
        seen_set.update(batch)
        return batch

    def seed() -> Frontier:
        pool = build_pool(vocab, table, cfg.bias, cfg.ladder_granularity)
        seeded = seed_candidates(pool, vocab, cfg.arity_limit, cfg.bias)
        monitoring.increment_counter("lattice.candidates_materialized", len(seeded.current_layer))
        monitoring.set_gauge("lattice.live_layers", seeded.live_layers)
        return seeded

    next_batch()
    table = SampleTable.from_dataset(d, seen)
    frontier = seed()

    learned: Dict[str, _Learned] = {}
    index = SubsumptionIndex()
    materialized = len(frontier.current_layer)
    max_live = frontier.live_layers
    stats: List[LayerStats] = []
    restarts = 0

    while frontier.current_layer:
        started = time.perf_counter()
        layer = frontier.layer_index
        retracted = 0
        if layer > 0:
            batch = next_batch()
            if batch:
                fresh = SampleTable.from_dataset(d, batch)
                retracted = sum(1 for item in learned.values() if violation_mask(fresh, item.constraint).any())
                table = SampleTable.from_dataset(d, seen)
        if retracted:
            # the abandoned layer counts as live so materialized == sum of live stays true
            stats.append(
                LayerStats(
                    layer=layer,
                    live=len(frontier.current_layer),
                    learned=0,
                    eliminated=0,
                    retracted=retracted,
                    rows_seen=len(seen),
                    seconds=round(time.perf_counter() - started, 6),
                )
            )
            logger.info(
                f"Layer {layer} retracted {retracted} learned constraints - restarting from the seeds",
                layer=layer,
                retracted=retracted,
                rows_seen=len(seen),
            )
            monitoring.increment_counter("lattice.restarts")
            restarts += 1
            learned.clear()
            index = SubsumptionIndex()
            frontier = seed()
            materialized += len(frontier.current_layer)
            continue

        results = _refine_layer(frontier.current_layer, table, vocab, cfg.workers)
        eliminated = [c for c in results if c.status is CandidateStatus.ELIMINATED]
        newly_learned = 0
        for candidate in results:
            if candidate.status is not CandidateStatus.LEARNED:
                continue
            constraint = candidate.emit(vocab)
            if constraint is None:
                continue
            key = str(constraint)
            if key not in learned:
                clause = candidate.clause()
                learned[key] = _Learned(constraint, clause, layer)
                index.add(key, clause)
                newly_learned += 1

        if layer == 0:
            upcoming = frontier.next_layer + _fact_joins(eliminated, vocab, cfg.arity_limit, cfg.bias)
        else:
            upcoming = generalize(eliminated, vocab, cfg.arity_limit, cfg.bias)
        upcoming = dedupe(c for c in upcoming if not index.subsumes(c.fixed_literals(), c.variables))

        live_layers = int(bool(results)) + int(bool(upcoming))
        max_live = max(max_live, live_layers)
        monitoring.set_gauge("lattice.live_layers", live_layers)
        monitoring.increment_counter("lattice.learned", newly_learned)
        monitoring.increment_counter("lattice.eliminated", len(eliminated))
        monitoring.increment_counter("lattice.candidates_materialized", len(upcoming))
        materialized += len(upcoming)

        entry = LayerStats(
            layer=layer,
            live=len(results),
            learned=newly_learned,
            eliminated=len(eliminated),
            retracted=retracted,
            rows_seen=len(seen),
            seconds=round(time.perf_counter() - started, 6),
        )
        stats.append(entry)
        logger.info(
            f"Layer {layer} refined - live: {entry.live}, learned: {entry.learned}, eliminated: {entry.eliminated}",
            layer=layer,
            live=entry.live,
            learned=entry.learned,
            eliminated=entry.eliminated,
            retracted=retracted,
            next_layer=len(upcoming),
            rows_seen=len(seen),
        )
        frontier = Frontier(current_layer=upcoming, next_layer=[], layer_index=layer + 1)

    survivors = prune_subsumed([(item.constraint, item.clause) for item in learned.values()])
    constraints = [constraint for constraint, _ in survivors]
    if cfg.entailment_pruning and len(constraints) <= ENTAILMENT_PRUNING_LIMIT:
        constraints = prune_entailed(constraints, vocab, cfg.atom_budget)
    elif cfg.entailment_pruning:
        logger.warning(
            "Entailment pruning skipped - too many constraints",
            constraints=len(constraints),
            limit=ENTAILMENT_PRUNING_LIMIT,
        )
    constraints.sort(key=traversal_key)
    logger.info(
        f"Learning completed - constraints: {len(constraints)}, candidates: {materialized}",
        constraints=len(constraints),
        candidates=materialized,
        layers=len(stats),
        rows_seen=len(seen),
        restarts=restarts,
        unspent_batches=budget[0],
    )
    return LearnResult(
        constraints=tuple(constraints),
        candidates_materialized=materialized,
        layers=len(stats),
        rows_seen=len(seen),
        max_live_layers=max_live,
        layer_stats=tuple(stats),
        sample_indices=tuple(seen),
        restarts=restarts,
        unspent_batches=budget[0],
    )
