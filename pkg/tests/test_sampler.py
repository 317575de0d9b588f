"""
Tests for Domain Counting and uniform sampling
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lawmine.errors import ConfigurationError, EmptyDataset, Exhausted, SampleTooLarge
from lawmine.ingest import Dataset
from lawmine.language import parse_constraint
from lawmine.sampler import dc_draw, dc_evaluate, dc_init, dc_next, dc_order, uniform_sample


def _protocols(values):
    return Dataset.from_rows([{"Proto": v} for v in values], ["Proto"])


def test_rare_value_is_drawn_first():
    values = ["TCP"] * 99
    values.insert(57, "ICMP")
    state = dc_init(_protocols(values))
    assert dc_next(state) == 57


def test_order_prefers_rarer_values():
    state = dc_init(_protocols(["TCP", "TCP", "UDP"]))
    assert dc_order(state, "Proto") == ["UDP", "TCP"]
    assert dc_next(state) == 2
    assert dc_order(state, "Proto") == ["TCP"]


def test_variables_take_turns(flows):
    state = dc_init(flows, ["Proto", "DstPort"])
    # first ICMP row for Proto, then the first DNS row for DstPort
    assert dc_draw(state, 2) == [0, 4]


def test_draw_stops_when_exhausted():
    state = dc_init(_protocols(["TCP", "UDP", "TCP"]))
    assert sorted(dc_draw(state, 10)) == [0, 1, 2]
    with pytest.raises(Exhausted):
        dc_draw(state, 1)


def test_rows_without_values_are_still_reached():
    d = Dataset.from_rows([{"A": None}, {"A": 1}, {"A": None}], ["A"])
    assert sorted(dc_draw(dc_init(d), 5)) == [0, 1, 2]


def test_empty_dataset_cannot_be_sampled():
    with pytest.raises(EmptyDataset):
        dc_init(Dataset.from_rows([], ["Proto"]))


def test_dc_evaluate_flags_rare_violations(flows):
    candidates = [parse_constraint('Proto!="ICMP"'), parse_constraint("DstPort >= 0")]
    flags, drawn = dc_evaluate(flows, 1, candidates)
    assert drawn == [0]
    assert flags == [True, False]


def test_dc_evaluate_rejects_empty_limit(flows):
    with pytest.raises(ConfigurationError):
        dc_evaluate(flows, 0, [])


@pytest.mark.property_based
@given(st.lists(st.tuples(st.sampled_from("abc"), st.integers(0, 3)), min_size=1, max_size=60))
@settings(max_examples=100, deadline=None)
def test_every_row_is_drawn_exactly_once(cells):
    d = Dataset.from_rows([{"K": k, "N": n} for k, n in cells], ["K", "N"])
    drawn = dc_draw(dc_init(d), len(cells) + 5)
    assert sorted(drawn) == list(range(len(cells)))


def test_uniform_sample(flows, monitoring):
    first = uniform_sample(flows, 50, seed=7)
    assert len(set(first)) == 50
    assert first == uniform_sample(flows, 50, seed=7)
    assert monitoring.counter_value("sampler.rows_drawn") == 100


def test_uniform_sample_excludes_rows(flows):
    excluded = set(range(0, 400, 2))
    chosen = uniform_sample(flows, 200, seed=1, exclude=excluded)
    assert sorted(chosen) == list(range(1, 400, 2))


def test_uniform_sample_too_large(flows):
    with pytest.raises(SampleTooLarge):
        uniform_sample(flows, 401, seed=0)
    with pytest.raises(SampleTooLarge):
        uniform_sample(flows, 300, seed=0, exclude=set(range(200)))
