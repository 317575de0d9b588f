"""
Tests for the violation-rate bound and the certification rounds
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as scipy_stats

from lawmine.errors import ConfigurationError, NoSurvivors, SampleTooLarge, StatsDomainError
from lawmine.ingest import Dataset
from lawmine.language import parse_constraint
from lawmine.stats import CertificationConfig, certify, clopper_upper

DNS = parse_constraint('Proto="UDP" -> DstPort=53')
INTERNAL_ONLY = parse_constraint('DstIp="internal"')


def test_clopper_upper_known_values():
    assert clopper_upper(1000, 0.95) == pytest.approx(0.0029911, abs=1e-6)
    assert clopper_upper(1, 0.95) == pytest.approx(0.95)


@pytest.mark.parametrize("n", [1, 10, 1000, 10**6])
@pytest.mark.parametrize("confidence", [0.5, 0.95, 0.999])
def test_clopper_upper_matches_beta_quantile(n, confidence):
    assert clopper_upper(n, confidence) == pytest.approx(scipy_stats.beta.ppf(confidence, 1, n), rel=1e-7)


@pytest.mark.parametrize("n, confidence", [(0, 0.95), (True, 0.95), (1.5, 0.95), (10, 0.0), (10, 1.0)])
def test_clopper_upper_domain(n, confidence):
    with pytest.raises(StatsDomainError):
        clopper_upper(n, confidence)


@pytest.mark.property_based
@given(st.integers(1, 10**7), st.floats(0.01, 0.99))
@settings(max_examples=200, deadline=None)
def test_bound_shrinks_with_more_trials(n, confidence):
    assert 0 < clopper_upper(n + 1, confidence) <= clopper_upper(n, confidence) < 1


def test_certify_removes_violated_constraints(flows, monitoring):
    certified = certify([DNS, INTERNAL_ONLY], flows, CertificationConfig(n=100, max_rounds=3))
    assert certified.constraints == (DNS,)
    (removed,) = certified.removed
    assert removed.constraint == INTERNAL_ONLY
    assert removed.removed_in_round == 1
    assert removed.violations > 0
    assert flows.row(removed.first_violation_row)["DstIp"] == "external"
    assert certified.converged and certified.rounds_used == 2
    assert certified.tested_rows == 200
    assert certified.p_max == pytest.approx(clopper_upper(100, 0.95))
    assert certified.z_star == pytest.approx(1 - certified.p_max)
    assert not certified.exhaustive
    assert monitoring.counter_value("stats.removed") == 1


def test_certify_needs_enough_rows(flows):
    with pytest.raises(SampleTooLarge):
        certify([DNS], flows, CertificationConfig(n=1000))


def test_certify_exhaustive_fallback(flows):
    certified = certify([DNS], flows, CertificationConfig(n=1000, exhaustive_fallback=True))
    assert certified.exhaustive
    assert certified.z_star == 1.0
    assert certified.tested_rows == flows.row_count
    assert certified.rounds_used == 1


def test_certify_without_survivors(flows):
    with pytest.raises(NoSurvivors):
        certify([INTERNAL_ONLY], flows, CertificationConfig(n=100))


def test_certify_empty_set(flows):
    with pytest.raises(ConfigurationError):
        certify([], flows, CertificationConfig(n=100))


def test_certification_config_validation():
    with pytest.raises(ConfigurationError):
        CertificationConfig(confidence=1.5)
    with pytest.raises(ConfigurationError):
        CertificationConfig(max_rounds=0)
    assert CertificationConfig.from_settings(n=50).n == 50


@pytest.mark.slow
def test_removal_rate_matches_hypergeometric_odds():
    # 100 of 1000 rows violate; one round of 10 rows catches it with probability about 1 - 0.9^10
    rows = [{"V": i, "Bad": int(i % 10 == 0)} for i in range(1000)]
    d = Dataset.from_rows(rows, ["V", "Bad"])
    bad, fine = parse_constraint("Bad=0"), parse_constraint("V >= 0")
    removed = 0
    for seed in range(200):
        certified = certify([bad, fine], d, CertificationConfig(n=10, max_rounds=1, seed=seed))
        removed += bad not in certified.constraints
    assert removed / 200 == pytest.approx(0.65, abs=0.1)
