"""
Synthetic datasets with planted rules at controlled incidence.

Each row starts as noise drawn from the declared domains. Every rule with an incidence target then
either has its trigger (the antecedent of its first constraint) forced true, with probability equal
to the target, or falsified. A repair loop fixes the rules the row still violates by reassigning
consequent-side variables; rows the loop cannot fix are redrawn.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import partial
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Set, Tuple, Union

import numpy as np

from lawmine.config.loader import read_toml
from lawmine.errors import ConfigurationError, LanguageError, UnsatisfiablePlant
from lawmine.evaluation import SampleTable
from lawmine.ingest import Dataset
from lawmine.language.parser import parse_constraints
from lawmine.language.semantics import evaluate, evaluate_predicate
from lawmine.language.terms import (
    Connective,
    Constraint,
    Op,
    Predicate,
    Provenance,
    Value,
    Variable,
    Vocabulary,
    normalize_value,
    to_rational,
)
from lawmine.services.logger_service import get_logger, log_execution_time
from lawmine.services.monitoring_service import get_monitoring_service
from lawmine.theory.prover import build_theory, entails

logger = get_logger("genbench.plant")

# granularity of draws from non-integer ordinal domains
_STEPS = 1000


@dataclass(frozen=True)
class PlantRule:
    text: str
    incidence: Optional[float] = None


@dataclass(frozen=True)
class PlantSpec:
    """Vocabulary, rules to plant and the noise model for everything else"""

    vocabulary: Vocabulary
    rules: Tuple[PlantRule, ...]
    rows: int = 10000
    seed: int = 0
    weights: Mapping[str, Tuple[float, ...]] = field(default_factory=dict, compare=False)
    block_size: int = 4096
    workers: int = 1
    max_repairs: int = 32
    max_rejections: int = 64

    def __post_init__(self):
        errors = {}
        if self.rows < 1:
            errors["rows"] = f"must be at least 1, got {self.rows}"
        if self.block_size < 1:
            errors["block_size"] = f"must be at least 1, got {self.block_size}"
        if self.workers < 1:
            errors["workers"] = f"must be at least 1, got {self.workers}"
        if self.max_repairs < 1 or self.max_rejections < 1:
            errors["caps"] = "repair and rejection caps must be at least 1"
        for i, rule in enumerate(self.rules):
            if rule.incidence is not None and not 0 <= rule.incidence <= 1:
                errors[f"rules[{i}].incidence"] = f"must lie in [0, 1], got {rule.incidence}"
        for name, weights in self.weights.items():
            var = self.vocabulary.get(name)
            if var is None:
                errors[f"weights.{name}"] = "unknown variable"
            elif not var.is_nominal or len(weights) != len(var.values):
                errors[f"weights.{name}"] = "weights need one entry per value of a nominal variable"
            elif min(weights) < 0 or sum(weights) <= 0:
                errors[f"weights.{name}"] = "weights must be non-negative with a positive sum"
        if errors:
            raise ConfigurationError("invalid plant specification", errors)

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "PlantSpec":
        variables: List[Variable] = []
        weights: Dict[str, Tuple[float, ...]] = {}
        try:
            for entry in data.get("variables", []):
                var = Variable.from_dict({"kind": "nominal" if "values" in entry else "ordinal", **entry})
                variables.append(var)
                if "weights" in entry:
                    # weights follow the order the values were declared in
                    declared = [normalize_value(v) for v in entry["values"]]
                    by_value = dict(zip(declared, entry["weights"]))
                    weights[var.name] = tuple(float(by_value.get(v, 0.0)) for v in var.values)
            rules = tuple(PlantRule(r["text"], r.get("incidence")) for r in data.get("rules", []))
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigurationError(f"invalid plant specification: {e}") from e
        except LanguageError as e:
            raise ConfigurationError(f"invalid plant specification: {e.message}", e.details) from e
        options = {k: data[k] for k in ("rows", "seed", "block_size", "max_repairs", "max_rejections") if k in data}
        return cls(Vocabulary(tuple(variables)), rules, weights=weights, **options)

    @classmethod
    def from_toml(cls, path: Union[str, Path]) -> "PlantSpec":
        return cls.from_mapping(read_toml(path))

    def with_overrides(self, **overrides) -> "PlantSpec":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


@dataclass(frozen=True)
class PlantedRule:
    text: str
    constraints: Tuple[Constraint, ...]
    incidence: Optional[float]

    @property
    def trigger(self) -> Tuple[Predicate, ...]:
        return self.constraints[0].antecedent


def compile_rules(spec: PlantSpec) -> List[PlantedRule]:
    planted = []
    for rule in spec.rules:
        constraints = tuple(parse_constraints(rule.text, spec.vocabulary, Provenance.SEEDED))
        if not constraints:
            raise ConfigurationError(f"plant rule {rule.text!r} holds no constraint")
        planted.append(PlantedRule(rule.text, constraints, rule.incidence))
    return planted


def check_satisfiable(planted: Sequence[PlantedRule], vocab: Vocabulary) -> None:
    """The rules must admit a row, and every rule with a positive incidence must be able to fire"""
    constraints = [c for rule in planted for c in rule.constraints]
    theory = build_theory(constraints, vocab)
    if not theory.consistent:
        raise UnsatisfiablePlant("planted rules contradict each other", {"rules": len(planted)})
    for rule in planted:
        if not rule.incidence or not rule.trigger:
            continue
        never = Constraint.fact(*(p.negate() for p in rule.trigger), connective=Connective.OR)
        if entails(theory, [never]):
            raise UnsatisfiablePlant(f"the trigger of {rule.text!r} can never fire", {"rule": rule.text})


# Value assignment


def _integral(var: Variable) -> bool:
    return isinstance(var.low, int) and isinstance(var.high, int)


def _draw_range(var: Variable, lo: Fraction, lo_open: bool, hi: Fraction, hi_open: bool, rng) -> Optional[Value]:
    """A domain value in the interval between lo and hi, or None if there is none"""
    if lo < var.low:
        lo, lo_open = to_rational(var.low), False
    if hi > var.high:
        hi, hi_open = to_rational(var.high), False
    if _integral(var):
        lower = math.floor(lo) + 1 if lo_open else math.ceil(lo)
        upper = math.ceil(hi) - 1 if hi_open else math.floor(hi)
        if lower > upper:
            return None
        return int(rng.integers(lower, upper + 1))
    if lo > hi or (lo == hi and (lo_open or hi_open)):
        return None
    if lo == hi:
        return normalize_value(lo)
    step = Fraction(int(rng.integers(1, _STEPS)), _STEPS)
    return normalize_value(lo + (hi - lo) * step)


def _draw_noise(var: Variable, weights: Optional[np.ndarray], rng) -> Value:
    if var.is_nominal:
        return var.values[int(rng.choice(len(var.values), p=weights))]
    return _draw_range(var, to_rational(var.low), False, to_rational(var.high), False, rng)


def _draw_satisfying(var: Variable, op: Op, target, rng) -> Optional[Value]:
    """A value v of var with `v op target`"""
    if var.is_nominal:
        if op is Op.EQ:
            value = var.coerce(target)
            return value if value in var.values else None
        others = [v for v in var.values if v != var.coerce(target)]
        return others[int(rng.integers(len(others)))] if others else None
    t = to_rational(target)
    low, high = to_rational(var.low), to_rational(var.high)
    if op is Op.EQ:
        if not var.contains(t) or (_integral(var) and t.denominator != 1):
            return None
        return normalize_value(t)
    if op is Op.NE:
        below = _draw_range(var, low, False, t, True, rng) if t > low else None
        above = _draw_range(var, t, True, high, False, rng) if t < high else None
        choices = [v for v in (below, above) if v is not None]
        return choices[int(rng.integers(len(choices)))] if choices else None
    if op in (Op.LT, Op.LE):
        return _draw_range(var, low, False, t, op is Op.LT, rng)
    return _draw_range(var, t, op is Op.GT, high, False, rng)


_MIRROR = {Op.EQ: Op.EQ, Op.NE: Op.NE, Op.LT: Op.GT, Op.LE: Op.GE, Op.GT: Op.LT, Op.GE: Op.LE}


def _assign(predicate: Predicate, row: Dict[str, Value], vocab: Vocabulary, rng) -> bool:
    """Change one variable of the row so the predicate holds; False if no value works"""
    var = vocab[predicate.subject]
    if not predicate.is_linear:
        value = _draw_satisfying(var, predicate.op, predicate.obj, rng)
        if value is None:
            return False
        row[var.name] = value
        return True
    term = predicate.obj
    value = _draw_satisfying(var, predicate.op, term.value(row[term.variable]), rng)
    if value is not None:
        row[var.name] = value
        return True
    # S op c*X + k  <=>  X op' (S - k) / c; op' is mirrored unless c is negative
    op = _MIRROR[predicate.op] if term.coefficient > 0 else predicate.op
    solved = (to_rational(row[var.name]) - term.offset) / term.coefficient
    other = _draw_satisfying(vocab[term.variable], op, solved, rng)
    if other is None:
        return False
    row[term.variable] = other
    return True


class _RowGenerator:
    def __init__(self, spec: PlantSpec, planted: Sequence[PlantedRule], rng):
        self.spec = spec
        self.vocab = spec.vocabulary
        self.planted = planted
        self.constraints = [c for rule in planted for c in rule.constraints]
        self.rng = rng
        self.weights = {
            name: np.asarray(w, dtype=float) / float(sum(w)) for name, w in spec.weights.items()
        }
        self.rejections = 0

    def _noise(self) -> Dict[str, Value]:
        return {var.name: _draw_noise(var, self.weights.get(var.name), self.rng) for var in self.vocab}

    def _set_incidence(self, row: Dict[str, Value]) -> None:
        controlled = [r for r in self.planted if r.incidence is not None and r.trigger]
        fire = [self.rng.random() < r.incidence for r in controlled]
        pinned: Set[str] = set()
        for rule, chosen in zip(controlled, fire):
            if chosen:
                pinned |= {name for p in rule.trigger for name in p.variables}
        for rule, chosen in zip(controlled, fire):
            if chosen or not all(evaluate_predicate(p, row) for p in rule.trigger):
                continue
            free = [p for p in rule.trigger if not (p.variables & pinned)]
            for i in self.rng.permutation(len(free)):
                if _assign(free[int(i)].negate(), row, self.vocab, self.rng):
                    break
        for rule, chosen in zip(controlled, fire):
            if chosen:
                for p in rule.trigger:
                    _assign(p, row, self.vocab, self.rng)

    def _repair(self, row: Dict[str, Value]) -> bool:
        for attempt in range(self.spec.max_repairs):
            broken = next((c for c in self.constraints if not evaluate(c, row)), None)
            if broken is None:
                return True
            late = attempt >= self.spec.max_repairs // 2
            if late and broken.antecedent and self.rng.random() < 0.5:
                p = broken.antecedent[int(self.rng.integers(len(broken.antecedent)))]
                _assign(p.negate(), row, self.vocab, self.rng)
            elif broken.connective is Connective.OR:
                p = broken.consequent[int(self.rng.integers(len(broken.consequent)))]
                _assign(p, row, self.vocab, self.rng)
            else:
                for p in broken.consequent:
                    if not evaluate_predicate(p, row):
                        _assign(p, row, self.vocab, self.rng)
        return all(evaluate(c, row) for c in self.constraints)

    def row(self, index: int) -> Dict[str, Value]:
        for _ in range(self.spec.max_rejections):
            row = self._noise()
            self._set_incidence(row)
            if self._repair(row):
                return row
            self.rejections += 1
        raise UnsatisfiablePlant(
            f"no row satisfying the planted rules found after {self.spec.max_rejections} draws",
            {"row": index, "draws": self.spec.max_rejections},
        )


def _block(block: int, spec: PlantSpec, planted: Sequence[PlantedRule]) -> Tuple[List[Dict[str, Value]], int]:
    start = block * spec.block_size
    count = min(spec.block_size, spec.rows - start)
    generator = _RowGenerator(spec, planted, np.random.default_rng([spec.seed, block]))
    rows = [generator.row(start + i) for i in range(count)]
    return rows, generator.rejections


@log_execution_time("genbench.plant")
def plant(spec: PlantSpec) -> Tuple[Dataset, List[Constraint]]:
    """
    Generate spec.rows rows satisfying every planted rule. Blocks of rows draw from their own
    generator seeded with (seed, block), so output depends only on the seed and the block size.
    Returns the dataset and the planted constraints as ground truth.
    """
    planted = compile_rules(spec)
    check_satisfiable(planted, spec.vocabulary)
    blocks = range(math.ceil(spec.rows / spec.block_size))
    step = partial(_block, spec=spec, planted=planted)
    if spec.workers <= 1 or len(blocks) < 2 * spec.workers:
        results = [step(b) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(step, blocks))

    rows = [row for block_rows, _ in results for row in block_rows]
    rejections = sum(r for _, r in results)
    d = Dataset.from_rows(rows, spec.vocabulary.names).with_schema(spec.vocabulary)
    truth = list(dict.fromkeys(c for rule in planted for c in rule.constraints))
    get_monitoring_service().increment_counter("genbench.rows_rejected", rejections)
    logger.info(
        f"Plant completed - rows: {d.row_count}, rules: {len(planted)}, constraints: {len(truth)}",
        rejections=rejections,
        seed=spec.seed,
    )
    return d, truth


def incidence(d: Dataset, constraint: Constraint) -> float:
    """Share of rows where the constraint's antecedent fires"""
    if not d.row_count:
        return 0.0
    table = SampleTable.from_dataset(d)
    fired = table.defined_mask(sorted(constraint.variables))
    for p in constraint.antecedent:
        fired &= table.predicate_mask(p)[0]
    return float(fired.mean())
