"""
Tests for the predicate pool, candidate refinement, generalisation and the levelwise learner
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lawmine.errors import ConfigurationError, EmptyDataset, InstanceTooLarge
from lawmine.evaluation import SampleTable, violation_mask
from lawmine.ingest import Dataset
from lawmine.language import Op, Predicate, Status, Variable, Vocabulary, clausify, parse_constraint, static_status
from lawmine.lattice import (
    Candidate,
    CandidateStatus,
    LearnerConfig,
    Side,
    ThresholdSlot,
    build_pool,
    generalize,
    generate_predicates,
    learn,
    refine,
    seed_candidates,
    valiant_learn,
)
from lawmine.lattice.candidates import clause_subsumes, thin_ladder
from lawmine.lattice.learner import prune_entailed
from lawmine.theory import build_theory, entails

from .conftest import flow_rows

TCP = Predicate("Proto", Op.EQ, "TCP")
UDP = Predicate("Proto", Op.EQ, "UDP")


@pytest.fixture
def services() -> Vocabulary:
    return Vocabulary(
        (
            Variable.nominal("Proto", ["TCP", "UDP", "ICMP"]),
            Variable.nominal("DstIp", ["internal", "external"]),
            Variable.nominal("DstPort", [0, 53, 80, 443]),
        )
    )


@pytest.fixture
def service_flows(services) -> Dataset:
    return Dataset.from_rows(flow_rows(), services.names)


def test_pool_of_a_binary_nominal():
    vocab = Vocabulary((Variable.nominal("Proto", ["TCP", "UDP"]),))
    table = SampleTable.from_rows([{"Proto": "TCP"}], ["Proto"])
    pool = build_pool(vocab, table)
    assert len(pool.nominal) == 4
    assert not pool.rungs and not pool.linear


def test_pool_rungs_include_domain_endpoints():
    vocab = Vocabulary((Variable.ordinal("X", 0, 100),))
    table = SampleTable.from_rows([{"X": 10}, {"X": 50}], ["X"])
    assert build_pool(vocab, table).rungs == {"X": (0, 10, 50, 100)}


def test_generated_predicates_are_contingent(flow_vocab, flows):
    predicates = generate_predicates(flow_vocab, SampleTable.from_dataset(flows))
    assert Predicate("Proto", Op.EQ, "ICMP") in predicates
    assert Predicate("DstPort", Op.GE, 0) not in predicates
    assert any(p.is_linear and p.subject == "Bytes" and p.obj.variable == "Packets" for p in predicates)


def test_thin_ladder_keeps_both_ends():
    assert thin_ladder(list(range(100)), 5) == [0, 25, 50, 74, 99]
    assert thin_ladder([1, 2, 3], 0) == [1, 2, 3]


def test_seeds_pair_disjoint_variables(services, service_flows):
    table = SampleTable.from_dataset(service_flows)
    frontier = seed_candidates(build_pool(services, table), services, arity_limit=2)
    assert frontier.live_layers == 2
    assert all(not c.antecedent and c.slot is None for c in frontier.current_layer)
    seed = Candidate(antecedent=(UDP,), consequent=(Predicate("DstPort", Op.EQ, 53),))
    assert seed.key in {c.key for c in frontier.next_layer}
    for c in frontier.next_layer:
        assert len(c.antecedent) == 1 and len(c.consequent) == 1
        assert not c.antecedent[0].variables & c.consequent[0].variables


def test_arity_one_has_no_implications(services, service_flows):
    table = SampleTable.from_dataset(service_flows)
    assert seed_candidates(build_pool(services, table), services, arity_limit=1).next_layer == []


def test_refine_eliminates_falsified_candidate(services, service_flows):
    table = SampleTable.from_dataset(service_flows)
    wrong = Candidate(antecedent=(UDP,), consequent=(Predicate("DstIp", Op.EQ, "internal"),))
    right = Candidate(antecedent=(UDP,), consequent=(Predicate("DstIp", Op.EQ, "external"),))
    assert refine(wrong, table, services).status is CandidateStatus.ELIMINATED
    assert refine(right, table, services).status is CandidateStatus.LEARNED


def test_refine_walks_a_lower_bound_to_the_tightest_rung(flow_vocab, flows):
    table = SampleTable.from_dataset(flows)
    rungs = build_pool(flow_vocab, table).rungs["Bytes"]
    candidate = Candidate(slot=ThresholdSlot.start("Bytes", Op.GE, Side.CONSEQUENT, rungs))
    assert candidate.slot.threshold == flow_vocab["Bytes"].high
    refined = refine(candidate, table, flow_vocab)
    assert refined.status is CandidateStatus.LEARNED
    assert refined.slot.threshold == min(flows.column("Bytes"))


def test_refine_antecedent_slot():
    vocab = Vocabulary((Variable.ordinal("Load", 0, 100), Variable.nominal("Alarm", ["on", "off"])))
    rows = [{"Load": v, "Alarm": "on" if v > 70 else "off"} for v in (10, 40, 70, 80, 95)]
    table = SampleTable.from_rows(rows, vocab.names)
    rungs = build_pool(vocab, table).rungs["Load"]
    # Load >= t -> Alarm="on"; the bound climbs past the highest quiet load
    candidate = Candidate(
        consequent=(Predicate("Alarm", Op.EQ, "on"),),
        slot=ThresholdSlot.start("Load", Op.GE, Side.ANTECEDENT, rungs),
    )
    refined = refine(candidate, table, vocab)
    assert refined.status is CandidateStatus.LEARNED
    assert refined.slot.threshold == 80


def test_refine_exhausted_ladder_eliminates():
    vocab = Vocabulary((Variable.ordinal("Load", 0, 100), Variable.nominal("Alarm", ["on", "off"])))
    rows = [{"Load": 100, "Alarm": "off"}, {"Load": 0, "Alarm": "on"}]
    table = SampleTable.from_rows(rows, vocab.names)
    candidate = Candidate(
        consequent=(Predicate("Alarm", Op.EQ, "on"),),
        slot=ThresholdSlot.start("Load", Op.GE, Side.ANTECEDENT, build_pool(vocab, table).rungs["Load"]),
    )
    assert refine(candidate, table, vocab).status is CandidateStatus.ELIMINATED


def test_generalize_disjoins_consequents(services, service_flows):
    port80 = Candidate(antecedent=(TCP,), consequent=(Predicate("DstPort", Op.EQ, 80),), status=CandidateStatus.ELIMINATED)
    port443 = Candidate(antecedent=(TCP,), consequent=(Predicate("DstPort", Op.EQ, 443),), status=CandidateStatus.ELIMINATED)
    (joined,) = generalize([port80, port443], services, arity_limit=3)
    assert str(joined) == 'Proto="TCP" -> DstPort=443 | DstPort=80'
    table = SampleTable.from_dataset(service_flows)
    assert refine(joined, table, services).status is CandidateStatus.LEARNED


def test_generalize_conjoins_antecedents(services):
    port80 = Predicate("DstPort", Op.EQ, 80)
    by_proto = Candidate(antecedent=(TCP,), consequent=(port80,), status=CandidateStatus.ELIMINATED)
    by_host = Candidate(
        antecedent=(Predicate("DstIp", Op.EQ, "internal"),), consequent=(port80,), status=CandidateStatus.ELIMINATED
    )
    (joined,) = generalize([by_proto, by_host], services, arity_limit=3)
    assert str(joined) == 'DstIp="internal" & Proto="TCP" -> DstPort=80'
    assert generalize([by_proto, by_host], services, arity_limit=2) == []


def test_generalize_needs_a_shared_side(services):
    a = Candidate(antecedent=(TCP,), consequent=(Predicate("DstPort", Op.EQ, 80),))
    b = Candidate(antecedent=(UDP,), consequent=(Predicate("DstIp", Op.EQ, "internal"),))
    assert generalize([a, b], services, arity_limit=3) == []


def test_clause_subsumption():
    general = parse_constraint("DstPort!=53")
    specific = parse_constraint('Proto="TCP" -> DstPort!=53')
    (g,) = clausify(general).clauses
    (s,) = clausify(specific).clauses
    assert clause_subsumes(g, s)
    assert not clause_subsumes(s, g)


@pytest.mark.parametrize("sampling", ["dc", "uniform"])
def test_learn_recovers_service_rules(services, service_flows, sampling, monitoring):
    cfg = LearnerConfig(arity_limit=2, batch_size=128, max_iterations=8, sampling=sampling)
    result = learn(service_flows, services, cfg)
    theory = build_theory(result.constraints, services)
    for rule in (
        'Proto="UDP" -> DstPort=53',
        'Proto="ICMP" -> DstIp="internal"',
        'Proto="TCP" -> DstPort in {80, 443}',
        'DstPort=0 -> Proto="ICMP"',
    ):
        assert entails(theory, [parse_constraint(rule, services)])
    assert not entails(theory, [parse_constraint('Proto="TCP" -> DstIp="internal"', services)])
    assert result.max_live_layers <= 2
    assert monitoring.gauge_peak("lattice.live_layers") <= 2


def test_learned_constraints_hold_on_every_row_seen(services, service_flows):
    result = learn(service_flows, services, LearnerConfig(arity_limit=2, batch_size=64))
    table = SampleTable.from_dataset(service_flows, result.sample_indices)
    assert result.rows_seen == len(set(result.sample_indices))
    for constraint in result.constraints:
        assert not violation_mask(table, constraint).any()
        assert static_status(constraint, services) is Status.CONTINGENT


def test_learn_reports_layers(services, service_flows):
    result = learn(service_flows, services, LearnerConfig(arity_limit=2, batch_size=500))
    assert result.rows_seen == 400
    assert result.layers == len(result.layer_stats)
    assert result.layer_stats[0].layer == 0
    assert result.candidates_materialized == sum(s.live for s in result.layer_stats)


def test_learn_rejects_bad_input(services):
    with pytest.raises(EmptyDataset):
        learn(Dataset.from_rows([], services.names), services)
    with pytest.raises(ConfigurationError):
        LearnerConfig(sampling="reservoir")
    with pytest.raises(ConfigurationError):
        LearnerConfig(batch_size=0)


def test_prune_entailed_drops_redundant_constraints():
    kept = prune_entailed([parse_constraint("DstPort!=53"), parse_constraint('Proto="TCP" -> DstPort!=53')])
    assert [str(c) for c in kept] == ["DstPort!=53"]


@pytest.fixture
def toy() -> Vocabulary:
    return Vocabulary((Variable.nominal("A", ["x", "y"]), Variable.nominal("B", ["x", "y"])))


def test_valiant_learns_every_consistent_clause(toy):
    d = Dataset.from_rows([{"A": "x", "B": "x"}, {"A": "y", "B": "y"}, {"A": "y", "B": "x"}], toy.names)
    exhaustive = valiant_learn(d, toy, 2)
    assert parse_constraint('A!="x" | B="x"', toy) in exhaustive
    table = SampleTable.from_dataset(d)
    assert not any(violation_mask(table, c).any() for c in exhaustive)


def test_learner_is_complete_against_exhaustive_learning(toy):
    d = Dataset.from_rows([{"A": "x", "B": "x"}, {"A": "y", "B": "y"}, {"A": "y", "B": "x"}], toy.names)
    result = learn(d, toy, LearnerConfig(arity_limit=2, batch_size=10))
    theory = build_theory(result.constraints, toy)
    for constraint in valiant_learn(d, toy, 2):
        assert entails(theory, [constraint]), str(constraint)


def test_learn_stops_when_the_frontier_empties(toy, monitoring):
    d = Dataset.from_rows([{"A": "x", "B": "x"}, {"A": "y", "B": "y"}], toy.names)
    result = learn(d, toy, LearnerConfig(arity_limit=2, batch_size=10, max_iterations=50))
    assert result.layers < 50
    assert result.unspent_batches == 50 - 1 - sum(1 for s in result.layer_stats if s.layer > 0)
    assert result.restarts == 0


@pytest.fixture
def rare_pairs():
    vocab = Vocabulary((Variable.nominal("X", ["c", "r0", "r1"]), Variable.nominal("Y", [0, 1, 2])))
    rows = [{"X": "c", "Y": 0}] * 90 + [{"X": x, "Y": y} for x in ("r0", "r1") for y in (1, 2)]
    return Dataset.from_rows(rows, vocab.names), vocab


@pytest.mark.parametrize("batch_size", [1, 2, 3, 4])
def test_retracted_facts_do_not_hide_what_they_pruned(rare_pairs, batch_size):
    d, vocab = rare_pairs
    result = learn(d, vocab, LearnerConfig(arity_limit=2, batch_size=batch_size, max_iterations=40))
    theory = build_theory(result.constraints, vocab)
    assert entails(theory, [parse_constraint('Y=1 -> X!="c"', vocab)])
    assert entails(theory, [parse_constraint('X="c" -> Y=0', vocab)])
    table = SampleTable.from_dataset(d, result.sample_indices)
    assert not any(violation_mask(table, c).any() for c in result.constraints)
    if result.restarts:
        assert any(s.retracted for s in result.layer_stats)
    assert result.candidates_materialized == sum(s.live for s in result.layer_stats)


@st.composite
def small_instances(draw):
    sizes = draw(st.lists(st.integers(2, 6), min_size=2, max_size=3))
    vocab = Vocabulary(tuple(Variable.nominal(f"V{i}", [f"v{j}" for j in range(n)]) for i, n in enumerate(sizes)))
    row = st.fixed_dictionaries({f"V{i}": st.sampled_from([f"v{j}" for j in range(n)]) for i, n in enumerate(sizes)})
    rows = draw(st.lists(row, min_size=1, max_size=40))
    return Dataset.from_rows(rows, vocab.names), vocab


@pytest.mark.property_based
@given(small_instances(), st.integers(1, 4), st.sampled_from(["dc", "uniform"]))
@settings(max_examples=30, deadline=None)
def test_learner_matches_exhaustive_learning_with_small_batches(instance, batch_size, sampling):
    d, vocab = instance
    cfg = LearnerConfig(arity_limit=2, batch_size=batch_size, max_iterations=6, sampling=sampling)
    result = learn(d, vocab, cfg)
    theory = build_theory(result.constraints, vocab)
    for constraint in valiant_learn(d, vocab, 2):
        assert entails(theory, [constraint]), str(constraint)


def test_valiant_limits(toy):
    d = Dataset.from_rows([{"A": "x", "B": "x"}], toy.names)
    with pytest.raises(ConfigurationError):
        valiant_learn(d, toy, 0)
    wide = Vocabulary(tuple(Variable.nominal(f"V{i}", ["a", "b"]) for i in range(5)))
    with pytest.raises(InstanceTooLarge):
        valiant_learn(Dataset.from_rows([{n: "a" for n in wide.names}], wide.names), wide, 2)
    many = Vocabulary((Variable.nominal("C", [str(i) for i in range(9)]),))
    with pytest.raises(InstanceTooLarge):
        valiant_learn(Dataset.from_rows([{"C": "0"}], ["C"]), many, 1)
