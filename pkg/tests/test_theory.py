"""
Tests for theories, entailment queries, proof checking and theory files
"""

from dataclasses import replace
from itertools import product

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from lawmine.errors import MalformedConstraint, QueryTooLarge, TheoryFormatError
from lawmine.ingest import WindowSpec
from lawmine.language import Bias, Connective, Constraint, Op, Predicate, Variable, Vocabulary, evaluate, parse_constraint, parse_constraints
from lawmine.models.theory_models import CertificationSummary
from lawmine.theory import Proof, Rule, Step, TheoryDocument, build_theory, check_proof, entails, load_theory, prove, save_theory
from lawmine.theory.formulas import Atom
from lawmine.theory.store import dumps, loads

PORT_RULES = [
    'Proto="TCP" -> DstPort!=53 | SrcPort!=80',
    'Proto="TCP" -> DstPort!=67',
    'Proto="TCP" -> SrcPort!=68',
]


@pytest.fixture
def ports():
    return build_theory([parse_constraint(r) for r in PORT_RULES])


def test_build_theory_deduplicates():
    c = parse_constraint('Proto="TCP" -> DstPort!=67')
    th = build_theory([c, c])
    assert len(th.constraints) == 1
    assert len(th) == 1


def test_composite_query_is_proved(ports):
    query = parse_constraints('Proto="TCP" -> (DstPort!=53 | SrcPort!=80) & DstPort!=67 & SrcPort!=68')
    result = prove(ports, query)
    assert result.holds
    assert result.proof.conclusion == result.proof.goal
    assert check_proof(ports, result.proof)
    assert len(result.proof.render().splitlines()) == len(result.proof)


def test_query_outside_the_theory_has_a_countermodel(ports):
    result = prove(ports, parse_constraint('Proto="UDP" -> DstPort!=53'))
    assert not result
    assert result.proof is None
    assert result.countermodel[Predicate("Proto", Op.EQ, "UDP")] is True
    assert result.countermodel[Predicate("DstPort", Op.EQ, 53)] is True


def test_modus_ponens_chain():
    th = build_theory([parse_constraint('A="t"'), parse_constraint('A="t" -> B="t"'), parse_constraint('B="t" -> C="t"')])
    result = prove(th, parse_constraint('C="t"'))
    assert result.holds
    assert check_proof(th, result.proof)
    assert all(step.rule in Rule for step in result.proof.steps)


def test_tampered_proofs_are_rejected():
    th = build_theory([parse_constraint('A="t"'), parse_constraint('A="t" -> B="t"')])
    proof = prove(th, parse_constraint('B="t"')).proof
    assert check_proof(th, proof)
    assert not check_proof(th, replace(proof, goal=Atom(Predicate("C", Op.EQ, "t"))))
    assert not check_proof(th, Proof(proof.goal, ()))


def test_modus_ponens_must_cite_an_implication():
    a, b, c = (Atom(Predicate(name, Op.EQ, "t")) for name in "ABC")
    th = build_theory([parse_constraint('A="t"'), parse_constraint('B="t"')])
    bogus = Proof(
        c,
        (
            Step(a, Rule.ASSUMPTION),
            Step(b, Rule.ASSUMPTION),
            Step(c, Rule.MODUS_PONENS, (0, 1)),
        ),
    )
    assert not check_proof(th, bogus)


def test_premise_must_come_from_the_theory():
    th = build_theory([parse_constraint('A="t"')])
    b = Atom(Predicate("B", Op.EQ, "t"))
    assert not check_proof(th, Proof(b, (Step(b, Rule.ASSUMPTION),)))


def test_inconsistent_theory_entails_everything():
    th = build_theory([parse_constraint('A="t"'), parse_constraint('A!="t"')])
    assert not th.consistent
    result = prove(th, parse_constraint('Z="q"'))
    assert result.holds
    assert check_proof(th, result.proof)


def test_domain_closure_needs_a_vocabulary():
    rules = [parse_constraint('Proto="TCP" -> Flag="a"'), parse_constraint('Proto="UDP" -> Flag="a"')]
    vocab = Vocabulary((Variable.nominal("Proto", ["TCP", "UDP"]), Variable.nominal("Flag", ["a", "b"])))
    query = parse_constraint('Flag="a"')
    assert entails(build_theory(rules, vocab), query)
    assert not entails(build_theory(rules), query)


def test_threshold_reasoning():
    th = build_theory([parse_constraint("X >= 10")])
    assert entails(th, parse_constraint("X >= 5"))
    assert entails(th, parse_constraint("X != 3"))
    assert not entails(th, parse_constraint("X >= 11"))


def test_ordinal_reasoning_is_over_the_reals():
    assert not entails(build_theory([parse_constraint("X > 2")]), parse_constraint("X >= 3"))


def test_atom_budget(ports):
    with pytest.raises(QueryTooLarge):
        prove(ports, parse_constraint('Proto="UDP" -> DstPort!=53'), atom_budget=2)


# Property: entailment agrees with enumerating every assignment

_NAMES = ("P0", "P1", "P2", "P3", "P4")
predicates = st.builds(Predicate, st.sampled_from(_NAMES), st.sampled_from([Op.EQ, Op.NE]), st.just("t"))


@st.composite
def constraints(draw):
    try:
        return Constraint(
            tuple(draw(st.lists(predicates, max_size=2))),
            tuple(draw(st.lists(predicates, min_size=1, max_size=2))),
            draw(st.sampled_from(list(Connective))),
        )
    except MalformedConstraint:
        assume(False)


def _truth_table_entails(theory, query):
    for values in product("tf", repeat=len(_NAMES)):
        row = dict(zip(_NAMES, values))
        if all(evaluate(c, row) for c in theory) and not evaluate(query, row):
            return False
    return True


@pytest.mark.property_based
@given(st.lists(constraints(), min_size=1, max_size=4), constraints())
@settings(max_examples=150, deadline=None)
def test_entailment_matches_truth_tables(theory, query):
    th = build_theory(theory)
    result = prove(th, query)
    assert result.holds == _truth_table_entails(theory, query)
    if result.holds:
        assert check_proof(th, result.proof)
    else:
        # atoms outside the query's component are absent from the countermodel
        model = {name: "t" if result.countermodel.get(Predicate(name, Op.EQ, "t"), False) else "f" for name in _NAMES}
        assert not evaluate(query, model)


# Theory files

FLOW_VOCAB = Vocabulary(
    (
        Variable.nominal("Proto", ["TCP", "UDP"]),
        Variable.ordinal("DstPort", 0, 65535),
        Variable.ordinal("SrcPort", 0, 65535),
    )
)


def _document():
    return TheoryDocument(
        constraints=[parse_constraint(r, FLOW_VOCAB) for r in ('Proto="TCP" -> DstPort!=53 | SrcPort!=80', "DstPort >= SrcPort")],
        vocabulary=FLOW_VOCAB,
        bias=Bias(arity_limit=2),
        window=WindowSpec(length=3, stride=1, aggregates=(("DstPort", "sum"),)),
        certification=CertificationSummary(n=1000, confidence=0.95, p_max=0.002991, z_star=0.997009, rounds_used=2),
        comments=("learned from border flows",),
    )


def test_theory_file_round_trip(tmp_path):
    document = _document()
    path = tmp_path / "flows.theory"
    save_theory(path, document)
    loaded = load_theory(path)
    assert list(loaded.constraints) == list(document.constraints)
    assert loaded.vocabulary == document.vocabulary
    assert loaded.bias == document.bias
    assert loaded.window == document.window
    assert loaded.certification == document.certification
    assert loaded.comments == document.comments


def test_theory_file_layout():
    lines = dumps(_document()).splitlines()
    assert lines[0] == "@format 1"
    assert lines[-1] == "DstPort>=SrcPort"
    assert "# learned from border flows" in lines


@pytest.mark.parametrize(
    "text",
    [
        'Proto="TCP"\n',
        "@format 1\n@colour {}\n",
        "@format 1\n@format 1\n",
        "@format 2\n",
        '@format 1\nProto="TCP"\n@bias {}\n',
        "@format 1\n@window {not json}\n",
        '@format 1\n@vocabulary [{"name": "Proto", "kind": "nominal", "values": ["TCP"]}]\nProto="UDP"\n',
    ],
)
def test_malformed_theory_files(text):
    with pytest.raises(TheoryFormatError):
        loads(text)


def test_missing_theory_file(tmp_path):
    with pytest.raises(TheoryFormatError):
        load_theory(tmp_path / "absent.theory")


def test_document_builds_its_theory():
    th = _document().theory()
    assert th.vocab == FLOW_VOCAB
    assert entails(th, parse_constraint('Proto="TCP" -> DstPort!=53 | SrcPort!=80'))
