"""
Tests for the command line: exit codes, report files and an end-to-end run
"""

import json

import pytest

from lawmine.cli import EXIT_NEGATIVE, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, run
from lawmine.ingest import Dataset, load_dataset
from lawmine.language import Variable, Vocabulary, parse_constraint
from lawmine.theory import TheoryDocument, load_theory, save_theory

PORT_RULES = [
    'Proto="TCP" -> DstPort!=53 | SrcPort!=80',
    'Proto="TCP" -> DstPort!=67',
    'Proto="TCP" -> SrcPort!=68',
]
COLUMNS = ["Proto", "SrcPort", "DstPort"]


@pytest.fixture
def theory_file(tmp_path):
    vocab = Vocabulary(
        (
            Variable.nominal("Proto", ["TCP", "UDP"]),
            Variable.ordinal("SrcPort", 0, 65535),
            Variable.ordinal("DstPort", 0, 65535),
        )
    )
    path = tmp_path / "ports.theory"
    save_theory(path, TheoryDocument([parse_constraint(r, vocab) for r in PORT_RULES], vocab))
    return path


@pytest.fixture
def traffic_file(tmp_path):
    rows = [("TCP", 40000, 443), ("TCP", 68, 67), ("UDP", 68, 67), ("TCP", 40001, 80)]
    path = tmp_path / "traffic.csv"
    Dataset.from_rows([dict(zip(COLUMNS, r)) for r in rows], COLUMNS).to_csv(path)
    return path


def _json(path):
    return json.loads(path.read_text(encoding="utf-8"))


def test_usage_errors():
    assert run(["frobnicate"]) == EXIT_USAGE
    assert run([]) == EXIT_USAGE
    assert run(["query", "--theory", "x.theory"]) == EXIT_USAGE


def test_query_holds(theory_file, tmp_path):
    report = tmp_path / "query.json"
    q = 'Proto="TCP" -> DstPort!=67 & SrcPort!=68'
    assert run(["query", "--theory", str(theory_file), "--q", q, "--emit-proof", "--report", str(report)]) == EXIT_OK
    body = _json(report)
    assert body["holds"] is True
    assert body["proof"]
    assert body["countermodel"] is None


def test_query_fails_with_countermodel(theory_file, tmp_path):
    report = tmp_path / "query.json"
    q = 'Proto="UDP" -> DstPort!=53'
    assert run(["query", "--theory", str(theory_file), "--q", q, "--report", str(report)]) == EXIT_NEGATIVE
    body = _json(report)
    assert body["holds"] is False
    assert body["countermodel"]['Proto="UDP"'] is True


def test_query_errors(theory_file, tmp_path):
    assert run(["query", "--theory", str(theory_file), "--q", "Proto = "]) == EXIT_RUNTIME
    assert run(["query", "--theory", str(tmp_path / "absent.theory"), "--q", 'Proto="TCP"']) == EXIT_RUNTIME


def test_check_reports_violations(theory_file, traffic_file, tmp_path):
    report = tmp_path / "check.json"
    assert run(["check", "--theory", str(theory_file), "--data", str(traffic_file), "--report", str(report)]) == EXIT_NEGATIVE
    body = _json(report)
    assert body["rows"] == 4
    assert body["distinct_violated"] == 2
    assert [c["violations"] for c in body["constraints"]] == [0, 1, 1]
    assert body["violating_rows"] == {"1": [1, 2]}


def test_filter_writes_clean_rows(theory_file, traffic_file, tmp_path):
    out, stats = tmp_path / "clean.csv", tmp_path / "stats.json"
    args = ["filter", "--theory", str(theory_file), "--in", str(traffic_file), "--out", str(out), "--stats", str(stats)]
    assert run(args) == EXIT_OK
    assert _json(stats)["rejected"] == 1
    clean = load_dataset(out)
    assert clean.row_count == 3
    assert clean.column("DstPort") == [443, 67, 80]


def test_diff_exit_codes(theory_file, tmp_path):
    wider = tmp_path / "wider.theory"
    save_theory(wider, TheoryDocument([parse_constraint("DstPort!=53")]))
    report = tmp_path / "diff.json"
    assert run(["diff", "--unknown", str(theory_file), "--normal", str(theory_file)]) == EXIT_OK
    assert run(["diff", "--unknown", str(wider), "--normal", str(theory_file), "--report", str(report)]) == EXIT_NEGATIVE
    assert _json(report)["suspicious"] == ["DstPort!=53"]


def test_invalid_environment_is_a_usage_error(monkeypatch, theory_file):
    monkeypatch.setenv("LAWMINE_CONFIDENCE", "2")
    assert run(["query", "--theory", str(theory_file), "--q", 'Proto="TCP"']) == EXIT_USAGE


def test_sample_needs_enough_rows(traffic_file):
    assert run(["sample", "--data", str(traffic_file), "--n", "4"]) == EXIT_OK
    assert run(["sample", "--data", str(traffic_file), "--n", "5", "--mode", "uniform"]) == EXIT_RUNTIME


PLANT = """
rows = 400
seed = 1

[[variables]]
name = "Proto"
values = ["TCP", "UDP"]

[[variables]]
name = "Service"
values = ["dns", "web"]

[[rules]]
text = 'Proto="UDP" -> Service="dns"'
incidence = 0.3
"""


@pytest.mark.slow
def test_synth_learn_certify_query(tmp_path):
    spec, data, truth = tmp_path / "plant.toml", tmp_path / "synth.csv", tmp_path / "truth.rules"
    learned, certified = tmp_path / "learned.theory", tmp_path / "certified.theory"
    spec.write_text(PLANT, encoding="utf-8")

    assert run(["synth", "--spec", str(spec), "--out", str(data), "--truth", str(truth)]) == EXIT_OK
    assert 'Proto="UDP" -> Service="dns"' in truth.read_text(encoding="utf-8").splitlines()

    learn_report = tmp_path / "learn.json"
    args = ["learn", "--data", str(data), "--arity", "2", "--out", str(learned), "--report", str(learn_report)]
    assert run(args) == EXIT_OK
    assert _json(learn_report)["constraints"] >= 1

    cert_report = tmp_path / "certify.json"
    args = ["certify", "--theory", str(learned), "--data", str(data), "--n", "100", "--rounds", "2"]
    assert run(args + ["--out", str(certified), "--report", str(cert_report)]) == EXIT_OK
    assert _json(cert_report)["survivors"]
    assert load_theory(certified).certification.n == 100

    assert run(["query", "--theory", str(learned), "--q", 'Proto="UDP" -> Service="dns"']) == EXIT_OK
    assert run(["query", "--theory", str(learned), "--q", 'Service="dns"']) == EXIT_NEGATIVE
