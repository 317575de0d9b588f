"""
Synthetic datasets with planted rules, shipped benchmark rule sets and benchmark curves.
"""

from .bench import (
    BENCH_KINDS,
    BenchPoint,
    EfficiencyResult,
    coverage,
    coverage_curve,
    efficiency,
    loglog_slope,
    points_frame,
    runtime_curve,
    skewed_dataset,
    skewed_spec,
)
from .plant import PlantedRule, PlantRule, PlantSpec, check_satisfiable, compile_rules, incidence, plant
from .rules import available_rule_sets, load_rules, plant_spec_path

__all__ = [
    "BENCH_KINDS",
    "BenchPoint",
    "EfficiencyResult",
    "PlantRule",
    "PlantSpec",
    "PlantedRule",
    "available_rule_sets",
    "check_satisfiable",
    "compile_rules",
    "coverage",
    "coverage_curve",
    "efficiency",
    "incidence",
    "load_rules",
    "loglog_slope",
    "plant",
    "plant_spec_path",
    "points_frame",
    "runtime_curve",
    "skewed_dataset",
    "skewed_spec",
]
