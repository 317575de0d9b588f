"""
Tests for constraint evaluation, clausal form, static status and the lattice order
"""

from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from lawmine.errors import DomainViolation, MalformedConstraint, TypeMismatch, UnboundVariable, UnknownVariable
from lawmine.language import (
    Bias,
    Connective,
    Constraint,
    Literal,
    Op,
    Order,
    Predicate,
    Status,
    Truth,
    Variable,
    Vocabulary,
    arity,
    clausify,
    compare,
    evaluate,
    parse_constraint,
    predicate_truth,
    static_status,
    traversal_key,
)
from lawmine.language.terms import normalize_value

R10 = 'Proto="TCP" -> DstPort!=53 | SrcPort!=80'
R11 = 'Proto="TCP" -> DstPort!=53'
R13 = "DstPort!=53"
R14 = "SrcPort!=80"


def test_evaluate_rejects_the_forbidden_port_pair():
    eq1 = parse_constraint('Proto!="TCP" | DstPort!=53 | SrcPort!=80')
    row = {"Proto": "TCP", "DstPort": 53, "SrcPort": 80}
    assert evaluate(eq1, row) is False
    assert evaluate(parse_constraint(R10), row) is False


def test_evaluate_false_antecedent_is_satisfied():
    row = {"Proto": "UDP", "DstPort": 53, "SrcPort": 80}
    assert evaluate(parse_constraint(R10), row) is True


def test_evaluate_linear_boundary():
    assert evaluate(parse_constraint("Bytes >= 20*Packets"), {"Bytes": 40, "Packets": 2}) is True
    assert evaluate(parse_constraint("Bytes >= 20*Packets"), {"Bytes": 39, "Packets": 2}) is False


def test_evaluate_rational_coefficient():
    c = parse_constraint("MemUsed >= 1/2*MemTotal")
    assert c.consequent[0].obj.coefficient == Fraction(1, 2)
    assert evaluate(c, {"MemUsed": 8, "MemTotal": 16}) is True
    assert evaluate(c, {"MemUsed": 7, "MemTotal": 16}) is False


def test_evaluate_unbound_variable():
    c = parse_constraint(R10)
    with pytest.raises(UnboundVariable):
        evaluate(c, {"Proto": "TCP", "DstPort": 53})
    with pytest.raises(UnboundVariable):
        evaluate(c, {"Proto": "TCP", "DstPort": 53, "SrcPort": None})


def test_evaluate_type_mismatch():
    with pytest.raises(TypeMismatch):
        evaluate(parse_constraint("Bytes >= 20*Packets"), {"Bytes": "many", "Packets": 2})


def test_evaluate_numeric_text_cells_match_constants():
    assert evaluate(parse_constraint("DstPort=53"), {"DstPort": "53"}) is True


def test_arity():
    assert arity(parse_constraint(R10)) == 3
    assert arity(parse_constraint(R13)) == 1
    assert arity(parse_constraint("Bytes >= 20*Packets")) == 2


def test_compare_orders_by_arity_then_entailment():
    assert compare(parse_constraint(R11), parse_constraint(R10)) is Order.MORE_SPECIFIC
    assert compare(parse_constraint(R10), parse_constraint(R11)) is Order.MORE_GENERAL
    assert compare(parse_constraint(R13), parse_constraint(R14)) is Order.INCOMPARABLE
    assert compare(parse_constraint(R11), parse_constraint(R11)) is Order.EQUAL


def test_compare_same_arity_uses_entailment():
    narrow = parse_constraint("DstPort=53")
    wide = parse_constraint("DstPort >= 53")
    assert compare(narrow, wide) is Order.MORE_SPECIFIC
    assert compare(wide, narrow) is Order.MORE_GENERAL


def test_traversal_key_prefers_succinct_constraints():
    ordered = sorted([parse_constraint(R10), parse_constraint(R11), parse_constraint(R13)], key=traversal_key)
    assert [c.arity for c in ordered] == [1, 2, 3]


@pytest.fixture
def xyz() -> Vocabulary:
    return Vocabulary(
        (Variable.ordinal("X", 0, 100), Variable.ordinal("Y", 2000, 3000), Variable.ordinal("Z", 0, 500))
    )


def test_static_status_contradiction_from_bounds(xyz):
    assert static_status(parse_constraint("X >= Y - 1024", xyz), xyz) is Status.CONTRADICTION


def test_static_status_tautology():
    vocab = Vocabulary((Variable.ordinal("DstPort", 0, 65535),))
    assert static_status(parse_constraint("DstPort=53 -> DstPort=53"), vocab) is Status.TAUTOLOGY
    assert static_status(parse_constraint("DstPort >= 0"), vocab) is Status.TAUTOLOGY
    assert static_status(parse_constraint("DstPort <= 10 | DstPort >= 5"), vocab) is Status.TAUTOLOGY


def test_static_status_contingent(flow_vocab):
    assert static_status(parse_constraint(R10, flow_vocab), flow_vocab) is Status.CONTINGENT


def test_static_status_nominal_domain_cover(flow_vocab):
    c = parse_constraint('Proto="TCP" | Proto="UDP" | Proto="ICMP"', flow_vocab)
    assert static_status(c, flow_vocab) is Status.TAUTOLOGY


def test_static_status_conflicting_units(xyz):
    c = parse_constraint("X >= 60 & X <= 40", xyz)
    assert static_status(c, xyz) is Status.CONTRADICTION


def test_predicate_truth_from_domains(xyz):
    assert predicate_truth(Predicate("X", Op.LE, 100), xyz) is Truth.TRUE
    assert predicate_truth(Predicate("Y", Op.LT, 2000), xyz) is Truth.FALSE
    assert predicate_truth(Predicate("Z", Op.GE, 250), xyz) is Truth.UNKNOWN


def _lit(subject, value, positive):
    return Literal(Predicate(subject, Op.EQ, value), positive)


def test_clausify_disjunctive_consequent():
    clauses = clausify(parse_constraint(R10))
    assert clauses.clauses == frozenset(
        {frozenset({_lit("Proto", "TCP", False), _lit("DstPort", 53, False), _lit("SrcPort", 80, False)})}
    )


def test_clausify_distributes_conjunction():
    clauses = clausify(parse_constraint('Proto="TCP" -> DstPort!=53 & SrcPort!=80'))
    assert clauses.clauses == frozenset(
        {
            frozenset({_lit("Proto", "TCP", False), _lit("DstPort", 53, False)}),
            frozenset({_lit("Proto", "TCP", False), _lit("SrcPort", 80, False)}),
        }
    )


def test_clausify_fact():
    assert clausify(parse_constraint(R13)).clauses == frozenset({frozenset({_lit("DstPort", 53, False)})})


def test_complementary_side_is_malformed():
    p = Predicate("DstPort", Op.EQ, 53)
    with pytest.raises(MalformedConstraint):
        Constraint.fact(p, p.negate(), connective=Connective.OR)


def test_variable_domains():
    proto = Variable.nominal("Proto", ["UDP", "TCP"])
    assert proto.values == ("TCP", "UDP")
    assert proto.contains("TCP") and not proto.contains("ICMP")
    port = Variable.ordinal("DstPort", 0, 65535)
    assert port.contains(53) and not port.contains(70000)
    with pytest.raises(DomainViolation):
        Variable.ordinal("Broken", 10, 1)
    with pytest.raises(DomainViolation):
        Variable.nominal("Empty", [])


def test_vocabulary_lookup(flow_vocab):
    assert flow_vocab["Proto"].is_nominal
    assert "Bytes" in flow_vocab
    with pytest.raises(UnknownVariable):
        flow_vocab["Missing"]
    assert Vocabulary.from_dict(flow_vocab.to_dict()) == flow_vocab


def test_bias_names_must_be_declared():
    bias = Bias(excluded_pairs=frozenset({frozenset({"Bytes", "Timestamp"})}))
    with pytest.raises(UnknownVariable):
        bias.check_names(["Bytes", "Packets"])
    assert bias.pair_excluded("Timestamp", "Bytes")


def test_normalize_value():
    assert normalize_value(3.0) == 3
    assert normalize_value(0.5) == Fraction(1, 2)
    assert normalize_value(float("nan")) is None
    assert normalize_value(True) == 1


# Property: a constraint and its clausal form agree on every row

_NAMES = ("X", "Y", "Z")

predicates = st.builds(
    Predicate,
    st.sampled_from(_NAMES),
    st.sampled_from(list(Op)),
    st.integers(min_value=0, max_value=3),
)


@st.composite
def constraints(draw):
    antecedent = draw(st.lists(predicates, max_size=2))
    consequent = draw(st.lists(predicates, min_size=1, max_size=3))
    connective = draw(st.sampled_from(list(Connective)))
    try:
        return Constraint(tuple(antecedent), tuple(consequent), connective)
    except MalformedConstraint:
        assume(False)


rows = st.fixed_dictionaries({name: st.integers(min_value=0, max_value=3) for name in _NAMES})


@pytest.mark.property_based
@given(constraints(), rows)
@settings(max_examples=300, deadline=None)
def test_clausify_preserves_truth(constraint, row):
    assert clausify(constraint).evaluate(row) == evaluate(constraint, row)


@pytest.mark.property_based
@given(constraints(), rows)
@settings(max_examples=200, deadline=None)
def test_surface_syntax_preserves_meaning(constraint, row):
    reparsed = parse_constraint(str(constraint))
    assert evaluate(reparsed, row) == evaluate(constraint, row)
