"""
Tests for the surface syntax: tokens, lowering to implication shape and vocabulary checks
"""

from fractions import Fraction

import pytest

from lawmine.errors import ConstraintSyntaxError, DomainViolation, TypeMismatch, UnknownVariable
from lawmine.language import Connective, LinearTerm, Op, Predicate, Variable, Vocabulary, parse_constraint, parse_constraints


@pytest.fixture
def ports() -> Vocabulary:
    return Vocabulary(
        (
            Variable.nominal("Proto", ["TCP", "UDP", "ICMP"]),
            Variable.ordinal("SrcPort", 0, 65535),
            Variable.ordinal("DstPort", 0, 65535),
        )
    )


def test_parse_r10_round_trips():
    c = parse_constraint('Proto="TCP" -> DstPort!=53 | SrcPort!=80')
    assert c.antecedent == (Predicate("Proto", Op.EQ, "TCP"),)
    assert set(c.consequent) == {Predicate("DstPort", Op.NE, 53), Predicate("SrcPort", Op.NE, 80)}
    assert c.connective is Connective.OR
    assert parse_constraint(str(c)) == c


def test_parse_linear_fact():
    c = parse_constraint("Bytes >= 20*Packets")
    assert c.is_fact
    (p,) = c.consequent
    assert p.is_linear
    assert p.obj == LinearTerm("Packets", Fraction(20))


def test_parse_linear_offset():
    (p,) = parse_constraint("Ack_2 = Seq_1 + 1").consequent
    assert p.obj == LinearTerm("Seq_1", Fraction(1), Fraction(1))


def test_parse_domain_violation(ports):
    with pytest.raises(DomainViolation):
        parse_constraint("DstPort=99999", ports)


def test_parse_unknown_variable(ports):
    with pytest.raises(UnknownVariable):
        parse_constraint("Flags_SYN=1", ports)


def test_parse_nominal_compared_ordinally(ports):
    with pytest.raises(TypeMismatch):
        parse_constraint("Proto > 3", ports)


def test_parse_syntax_error_position():
    with pytest.raises(ConstraintSyntaxError) as e:
        parse_constraint("Proto = ")
    assert e.value.position == 8


def test_parse_rejects_chained_implications():
    with pytest.raises(ConstraintSyntaxError):
        parse_constraint("A=1 -> B=1 -> C=1")


def test_biconditional_lowers_to_both_directions():
    constraints = parse_constraints("SrcPort=68 <-> DstPort=67")
    assert len(constraints) == 2
    assert {str(c) for c in constraints} == {"SrcPort=68 -> DstPort=67", "DstPort=67 -> SrcPort=68"}


def test_antecedent_disjunction_splits():
    by_set = parse_constraints('DstPort in {137, 138} -> Proto="UDP"')
    by_or = parse_constraints('DstPort=137 | DstPort=138 -> Proto="UDP"')
    assert by_set == by_or
    assert len(by_set) == 2


def test_consequent_lowers_to_cnf():
    constraints = parse_constraints('Proto="TCP" -> (DstPort!=53 | SrcPort!=80) & DstPort!=67 & SrcPort!=68')
    assert len(constraints) == 2
    connectives = sorted(c.connective.value for c in constraints)
    assert connectives == ["&", "|"]
    units = next(c for c in constraints if c.connective is Connective.AND)
    assert set(units.consequent) == {Predicate("DstPort", Op.NE, 67), Predicate("SrcPort", Op.NE, 68)}


def test_unicode_connectives():
    assert parse_constraint('Proto="TCP" ⟹ DstPort≠53') == parse_constraint('Proto="TCP" -> DstPort!=53')


def test_not_in_set():
    c = parse_constraint("DstPort not in {53, 67}")
    assert set(c.consequent) == {Predicate("DstPort", Op.NE, 53), Predicate("DstPort", Op.NE, 67)}
    assert c.connective is Connective.AND


def test_nominal_constants_are_coerced():
    vocab = Vocabulary((Variable.nominal("Service", ["53", "80"]),))
    (p,) = parse_constraint("Service=53", vocab).consequent
    assert p.obj == "53"


def test_comments_and_separators():
    text = """
    # port rules
    DstPort=53 -> Proto="UDP"; SrcPort!=0
    DstPort=53 -> Proto="UDP"
    """
    constraints = parse_constraints(text)
    assert [str(c) for c in constraints] == ['DstPort=53 -> Proto="UDP"', "SrcPort!=0"]


def test_negated_antecedent():
    c = parse_constraint('!(Proto="TCP") -> DstPort!=80')
    assert c.antecedent == (Predicate("Proto", Op.NE, "TCP"),)
