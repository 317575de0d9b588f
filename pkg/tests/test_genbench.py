"""
Tests for planted datasets, shipped rule sets and benchmark curves
"""

import pytest

from lawmine.audit import check_violations
from lawmine.errors import ConfigurationError, UnsatisfiablePlant
from lawmine.genbench import (
    BenchPoint,
    EfficiencyResult,
    PlantRule,
    PlantSpec,
    available_rule_sets,
    compile_rules,
    coverage,
    coverage_curve,
    efficiency,
    incidence,
    load_rules,
    loglog_slope,
    plant,
    plant_spec_path,
    points_frame,
    runtime_curve,
    skewed_dataset,
    skewed_spec,
)
from lawmine.language import Variable, Vocabulary, parse_constraint, parse_constraints
from lawmine.lattice import LearnerConfig
from lawmine.stats import CertificationConfig

SERVICES = Vocabulary(
    (
        Variable.nominal("Proto", ["TCP", "UDP"]),
        Variable.nominal("Port", [53, 80, 443]),
        Variable.ordinal("Size", 0, 1000),
    )
)


def _spec(**options):
    rules = (
        PlantRule('Proto="UDP" -> Port=53', incidence=0.2),
        PlantRule('Proto="TCP" -> Port in {80, 443}'),
        PlantRule("Port=53 -> Size <= 512"),
    )
    return PlantSpec(SERVICES, rules, **{"rows": 2000, "seed": 3, **options})


def test_planted_rows_satisfy_every_rule():
    d, truth = plant(_spec())
    assert d.row_count == 2000
    assert len(truth) == 3
    assert check_violations(truth, d).violation_rate == 0.0


def test_incidence_follows_the_target():
    d, truth = plant(_spec(rows=5000))
    assert incidence(d, truth[0]) == pytest.approx(0.2, abs=0.03)


def test_plant_is_deterministic_per_seed():
    first, _ = plant(_spec(block_size=300))
    again, _ = plant(_spec(block_size=300, workers=2))
    other, _ = plant(_spec(block_size=300, seed=4))
    assert list(first.rows) == list(again.rows)
    assert list(first.rows) != list(other.rows)


def test_contradicting_rules_are_refused():
    vocab = Vocabulary((Variable.ordinal("X", 0, 10),))
    with pytest.raises(UnsatisfiablePlant):
        plant(PlantSpec(vocab, (PlantRule("X=1"), PlantRule("X=2")), rows=10))


def test_trigger_that_can_never_fire_is_refused():
    vocab = Vocabulary((Variable.ordinal("X", 0, 10), Variable.nominal("Y", ["a", "b"])))
    rules = (PlantRule("X=1"), PlantRule('X=2 -> Y="a"', incidence=0.5))
    with pytest.raises(UnsatisfiablePlant):
        plant(PlantSpec(vocab, rules, rows=10))


def test_plant_spec_validation():
    with pytest.raises(ConfigurationError):
        PlantSpec(SERVICES, (), rows=0)
    with pytest.raises(ConfigurationError):
        PlantSpec(SERVICES, (PlantRule("Port=53", incidence=1.5),))
    with pytest.raises(ConfigurationError):
        PlantSpec(SERVICES, (), weights={"Size": (1.0,)})
    with pytest.raises(ConfigurationError):
        PlantSpec(SERVICES, (), weights={"Proto": (0.0, 0.0)})


def test_shipped_plant_spec():
    spec = PlantSpec.from_toml(plant_spec_path())
    assert spec.rows == 100000
    assert spec.seed == 7
    assert len(compile_rules(spec)) == 12
    # weights are stored in domain order, so "dns" and "broadcast" stay silent as noise
    src = spec.vocabulary["SrcIp"]
    silent = {v for v, w in zip(src.values, spec.weights["SrcIp"]) if w == 0}
    assert silent == {"dns", "broadcast"}


@pytest.mark.slow
def test_shipped_plant_spec_plants_cleanly():
    spec = PlantSpec.from_toml(plant_spec_path()).with_overrides(rows=300, block_size=100)
    d, truth = plant(spec)
    assert d.row_count == 300
    assert check_violations(truth, d).violation_rate == 0.0


@pytest.mark.parametrize("name", available_rule_sets())
def test_shipped_rule_sets_parse(name):
    assert load_rules(name)


def test_unknown_rule_set():
    with pytest.raises(ConfigurationError):
        load_rules("no-such-benchmark")


def test_rule_file_by_path(tmp_path):
    path = tmp_path / "mine.rules"
    path.write_text('# one rule\nProto="UDP" -> Port=53\n', encoding="utf-8")
    assert load_rules(path) == [parse_constraint('Proto="UDP" -> Port=53')]


def test_coverage():
    rules = [parse_constraint(r) for r in ('Proto="TCP" -> DstPort!=53 | SrcPort!=80', 'Proto="TCP" -> DstPort!=67')]
    assert coverage(rules, rules) == 1.0
    assert coverage([], rules) == 0.0
    assert coverage(rules, []) == 1.0
    assert coverage(rules[:1], rules) == 0.5
    composite = parse_constraints('Proto="TCP" -> (DstPort!=53 | SrcPort!=80) & DstPort!=67')
    assert coverage(rules, composite) == 1.0


def test_skewed_dataset_keeps_the_rare_share():
    d = skewed_dataset(rows=4000, rare_share=0.05, seed=1)
    share = sum(1 for s in d.column("Service") if s == "rare") / d.row_count
    assert share == pytest.approx(0.05, abs=0.015)
    spec = skewed_spec(rows=10)
    assert check_violations(compile_rules(spec)[3].constraints, d).violation_rate == 0.0


def test_coverage_curve_on_planted_rules():
    spec = skewed_spec(rows=2000, rare_share=0.05)
    d, truth = plant(spec)
    points = coverage_curve(d, spec.vocabulary, truth, budgets=[40, 400])
    assert [p.budget for p in points] == [40, 400]
    assert all(0.0 <= p.value <= 1.0 for p in points)
    assert all(p.rows_seen <= 400 for p in points)
    with pytest.raises(ConfigurationError):
        coverage_curve(d, spec.vocabulary, truth, budgets=[0])


def _point(budget, value, seed=0):
    return BenchPoint(budget=budget, seed=seed, value=value, rows_seen=budget, candidates=1, seconds=0.1)


def test_loglog_slope():
    assert loglog_slope([_point(10, 1.0), _point(100, 10.0), _point(1000, 100.0)]) == pytest.approx(1.0)
    assert loglog_slope([_point(10, 1.0), _point(10, 2.0, seed=1)]) is None
    assert loglog_slope([_point(10, 0.0), _point(100, 3.0)]) is None


def test_points_frame():
    frame = points_frame([_point(10, 0.5), _point(100, 0.75)])
    assert list(frame.columns) == ["budget", "seed", "value", "rows_seen", "candidates", "seconds"]
    assert frame["value"].tolist() == [0.5, 0.75]


def test_efficiency_ratio_skips_empty_uniform_runs():
    assert EfficiencyResult(100, dc=[4, 6], uniform=[2, 0]).ratio == 2.0
    assert EfficiencyResult(100, dc=[4], uniform=[0]).ratio is None


@pytest.mark.slow
def test_shipped_plant_is_covered_within_two_thousand_rows():
    spec = PlantSpec.from_toml(plant_spec_path())
    d, truth = plant(spec)
    (point,) = coverage_curve(
        d,
        spec.vocabulary,
        truth,
        budgets=[2000],
        cfg=LearnerConfig(sampling="dc"),
        certification=CertificationConfig(n=1000, max_rounds=3),
    )
    assert point.rows_seen <= 2000
    assert point.value == 1.0


@pytest.mark.slow
def test_domain_counting_grows_a_larger_lattice_on_skewed_data():
    d = skewed_dataset(rows=20000, rare_share=0.01)
    result = efficiency(d, skewed_spec().vocabulary, budget=512, seeds=range(5))
    assert len(result.dc) == len(result.uniform) == 5
    assert result.ratio >= 1.5


@pytest.mark.slow
def test_runtime_grows_sublinearly_in_the_budget():
    spec = skewed_spec(rows=20000)
    d, _ = plant(spec)
    points = runtime_curve(d, spec.vocabulary, budgets=[2**7, 2**9, 2**11, 2**13])
    assert [p.budget for p in points] == [2**7, 2**9, 2**11, 2**13]
    assert loglog_slope(points) < 1.0
