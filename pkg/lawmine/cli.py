"""
Command-line entry point: learn, certify, query, check, diff, filter, sample, synth and bench.

Exit codes: 0 success, 1 negative answer (query does not hold, check or diff found something),
2 usage or configuration error, 3 any other failure. Failures also write one JSON diagnostic line
to stderr.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import pandas as pd
from pydantic import BaseModel

from lawmine import __description__, __version__
from lawmine.audit import check_schema, check_violations, diff, filter_rows
from lawmine.config.loader import load_configuration
from lawmine.config.settings import get_settings, reset_settings
from lawmine.errors import ConfigurationError, LawmineError
from lawmine.genbench.bench import (
    BENCH_KINDS,
    coverage_curve,
    efficiency,
    loglog_slope,
    points_frame,
    runtime_curve,
    skewed_dataset,
)
from lawmine.genbench.plant import PlantSpec, plant
from lawmine.genbench.rules import load_rules, plant_spec_path
from lawmine.ingest import FORMATS, CSV_GENERIC, Dataset, WindowSpec, infer_vocabulary, load_bias_file, load_dataset, windowize
from lawmine.language.parser import parse_constraints
from lawmine.language.terms import Bias, Constraint, Vocabulary, format_constraint
from lawmine.lattice.learner import SAMPLING_MODES, LearnerConfig, learn
from lawmine.models.report_models import (
    BenchReport,
    CdfPoint,
    CertificationReport,
    ConstraintViolations,
    CurvePoint,
    DiffReport,
    FilterReport,
    LayerStatsModel,
    LearnReport,
    QueryReport,
    RemovedConstraint,
    ViolationReportModel,
)
from lawmine.models.theory_models import CertificationSummary
from lawmine.sampler import dc_draw, dc_init, uniform_sample
from lawmine.services.logger_service import configure_logging, get_logger, get_logger_service
from lawmine.stats import CertificationConfig, certify
from lawmine.theory.prover import prove
from lawmine.theory.store import TheoryDocument, load_theory, save_theory

logger = get_logger("cli")

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2
EXIT_RUNTIME = 3


# Output helpers


def _emit(model: BaseModel, path: Optional[str]) -> None:
    """JSON report to a file, or to stdout without one"""
    text = model.model_dump_json(indent=2)
    if path:
        Path(path).write_text(text + "\n", encoding="utf-8")
        logger.info(f"Report written - path: {path}")
    else:
        print(text)


def _diagnose(payload: dict) -> None:
    sys.stderr.write(json.dumps(payload, default=str, sort_keys=True) + "\n")


def _int_list(text: str) -> List[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError("budgets must be positive integers")
    return values


def _data(path: str, fmt: str, window: Optional[WindowSpec]) -> Dataset:
    d = load_dataset(path, fmt)
    return windowize(d, window) if window is not None else d


def _bias(path: Optional[str], arity: Optional[int]) -> Tuple[Bias, Optional[WindowSpec]]:
    settings = get_settings()
    if path:
        return load_bias_file(path, arity_limit=arity, nominal_threshold=None)
    return Bias(arity_limit=arity or settings.arity, nominal_threshold=settings.nominal_threshold), None


def _workers(args: argparse.Namespace) -> int:
    return args.workers or get_settings().workers


def _theory_data(document: TheoryDocument, path: str, fmt: str) -> Dataset:
    d = _data(path, fmt, document.window)
    check_schema(document.constraints, d.columns)
    return d


# Subcommands


def cmd_learn(args: argparse.Namespace) -> int:
    bias, window = _bias(args.bias, args.arity)
    d = _data(args.data, args.format, window)
    vocab = infer_vocabulary(d, bias)
    cfg = LearnerConfig.from_settings(
        arity_limit=bias.arity_limit,
        batch_size=args.batch,
        max_iterations=args.max_iterations,
        seed=args.seed,
        sampling=args.sampling,
        workers=args.workers,
        entailment_pruning=not args.no_pruning,
        bias=bias,
    )
    result = learn(d, vocab, cfg)
    save_theory(args.out, TheoryDocument(result.constraints, vocab, bias, window))
    report = LearnReport(
        constraints=len(result.constraints),
        candidates_materialized=result.candidates_materialized,
        layers=result.layers,
        rows_seen=result.rows_seen,
        max_live_layers=result.max_live_layers,
        layer_stats=[LayerStatsModel(**vars(s)) for s in result.layer_stats],
    )
    _emit(report, args.report)
    return EXIT_OK


def cmd_certify(args: argparse.Namespace) -> int:
    document = load_theory(args.theory)
    d = _theory_data(document, args.data, args.format)
    cfg = CertificationConfig.from_settings(
        n=args.n,
        confidence=args.confidence,
        max_rounds=args.rounds,
        seed=args.seed,
        workers=args.workers,
        exhaustive_fallback=args.exhaustive,
    )
    certified = certify(document.constraints, d, cfg)
    if args.out:
        summary = CertificationSummary(
            n=cfg.n,
            confidence=cfg.confidence,
            p_max=certified.p_max,
            z_star=certified.z_star,
            rounds_used=certified.rounds_used,
            removed=len(certified.removed),
            seed=cfg.seed,
        )
        save_theory(
            args.out,
            TheoryDocument(certified.constraints, document.vocabulary, document.bias, document.window, summary),
        )
    report = CertificationReport(
        survivors=[format_constraint(c) for c in certified.constraints],
        removed=[
            RemovedConstraint(
                constraint=format_constraint(r.constraint),
                round=r.removed_in_round,
                violations=r.violations,
                first_violation_row=r.first_violation_row,
            )
            for r in certified.removed
        ],
        p_max=certified.p_max,
        z_star=certified.z_star,
        rounds_used=certified.rounds_used,
        converged=certified.converged,
        exhaustive=certified.exhaustive,
        tested_rows=certified.tested_rows,
        note=certified.note,
    )
    _emit(report, args.report)
    return EXIT_OK


def cmd_query(args: argparse.Namespace) -> int:
    document = load_theory(args.theory)
    query = parse_constraints(args.q, document.vocabulary)
    if not query:
        raise ConfigurationError("the query holds no constraint", {"q": args.q})
    result = prove(document.theory(), query, with_proof=args.emit_proof, atom_budget=get_settings().atom_budget)
    print("⊤" if result.holds else "⊥")
    if args.emit_proof and result.proof is not None:
        print(result.proof.render())
    if args.report:
        countermodel = None
        if result.countermodel is not None:
            countermodel = {str(atom): value for atom, value in sorted(result.countermodel.items(), key=lambda kv: str(kv[0]))}
        proof = result.proof.render().splitlines() if result.proof is not None else None
        _emit(QueryReport(query=args.q, holds=result.holds, proof=proof, countermodel=countermodel), args.report)
    return EXIT_OK if result.holds else EXIT_NEGATIVE


def cmd_check(args: argparse.Namespace) -> int:
    document = load_theory(args.theory)
    d = _data(args.data, args.format, document.window)
    report = check_violations(document.constraints, d, workers=_workers(args))
    model = ViolationReportModel(
        rows=report.row_count,
        violation_rate=report.violation_rate,
        distinct_violated=report.distinct_violated,
        constraints=[
            ConstraintViolations(
                constraint=format_constraint(c),
                violations=int(report.counts[j]),
                not_evaluable=int(report.not_evaluable[j]),
                rate=report.constraint_rate(j),
            )
            for j, c in enumerate(report.constraints)
        ],
        cdf=[CdfPoint(violations=k, fraction=share) for k, share in report.cdf()],
        violating_rows=report.violated_by_row(),
    )
    _emit(model, args.report)
    return EXIT_NEGATIVE if report.distinct_violated else EXIT_OK


def cmd_diff(args: argparse.Namespace) -> int:
    unknown = load_theory(args.unknown)
    normal = load_theory(args.normal)
    suspicious = diff(unknown.constraints, normal.constraints, normal.vocabulary, get_settings().atom_budget)
    report = DiffReport(
        suspicious=[format_constraint(c) for c in suspicious],
        unknown=len(unknown.constraints),
        normal=len(normal.constraints),
    )
    _emit(report, args.report)
    return EXIT_NEGATIVE if suspicious else EXIT_OK


def cmd_filter(args: argparse.Namespace) -> int:
    document = load_theory(args.theory)
    d = _data(args.input, args.format, document.window)
    result = filter_rows(d, document.constraints, workers=_workers(args))
    result.accepted.to_csv(args.out)
    report = FilterReport(
        total=result.total,
        accepted=result.accepted_count,
        rejected=result.rejected_count,
        acceptance_rate=result.acceptance_rate,
        rejected_by={format_constraint(c): n for c, n in result.rejected_by.items()},
    )
    _emit(report, args.stats)
    return EXIT_OK


def cmd_sample(args: argparse.Namespace) -> int:
    d = load_dataset(args.data, args.format)
    if args.mode == "dc":
        indices = dc_draw(dc_init(d), args.n)
    else:
        indices = uniform_sample(d, args.n, args.seed if args.seed is not None else get_settings().seed)
    print("\n".join(str(i) for i in indices))
    return EXIT_OK


def _plant_spec(args: argparse.Namespace) -> PlantSpec:
    spec = PlantSpec.from_toml(args.spec or plant_spec_path())
    return spec.with_overrides(rows=args.rows, seed=args.seed, workers=args.workers)


def _write_rules(path: str, constraints: Sequence[Constraint]) -> None:
    lines = ["# planted rules"] + [format_constraint(c) for c in constraints]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_synth(args: argparse.Namespace) -> int:
    d, truth = plant(_plant_spec(args))
    d.to_csv(args.out)
    if args.truth:
        _write_rules(args.truth, truth)
    logger.info(f"Synthetic dataset written - path: {args.out}, rows: {d.row_count}, rules: {len(truth)}")
    return EXIT_OK


def _bench_inputs(args: argparse.Namespace) -> Tuple[Dataset, Vocabulary, List[Constraint]]:
    if args.data:
        bias, window = _bias(args.bias, args.arity)
        d = _data(args.data, args.format, window)
        return d, infer_vocabulary(d, bias), []
    if args.kind == "efficiency" and not args.spec:
        d = skewed_dataset(rows=args.rows or 20000, seed=args.seed or 0)
        return d, Vocabulary(d.schema), []
    spec = _plant_spec(args)
    d, truth = plant(spec)
    return d, spec.vocabulary, truth


def cmd_bench(args: argparse.Namespace) -> int:
    d, vocab, truth = _bench_inputs(args)
    seed = args.seed if args.seed is not None else get_settings().seed
    seeds = list(range(seed, seed + args.seeds))
    cfg = LearnerConfig.from_settings(
        arity_limit=args.arity, max_iterations=args.max_iterations, workers=args.workers, sampling=args.sampling
    )

    if args.kind == "efficiency":
        result = efficiency(d, vocab, args.budget, cfg, seeds)
        table = pd.DataFrame({"seed": seeds, "dc": result.dc, "uniform": result.uniform})
        table["ratio"] = [a / b if b else None for a, b in zip(result.dc, result.uniform)]
        points = [CurvePoint(budget=args.budget, value=a / b if b else 0.0, seed=s) for s, a, b in zip(seeds, result.dc, result.uniform)]
        report = BenchReport(kind=args.kind, points=points, ratio=result.ratio)
    else:
        if args.kind == "coverage":
            rules = load_rules(args.rules, vocab) if args.rules else truth
            if not rules:
                raise ConfigurationError("coverage needs benchmark rules: pass --rules or plant a spec")
            certification = CertificationConfig.from_settings(n=args.cert_n, exhaustive_fallback=True) if args.certify else None
            curve = coverage_curve(d, vocab, rules, args.budgets, cfg, seeds, certification)
            slope = None
        else:
            curve = runtime_curve(d, vocab, args.budgets, cfg, seeds)
            slope = loglog_slope(curve)
        table = points_frame(curve)
        points = [CurvePoint(budget=p.budget, value=p.value, seed=p.seed) for p in curve]
        report = BenchReport(kind=args.kind, points=points, slope=slope)

    if args.out:
        table.to_csv(args.out, index=False, lineterminator="\n")
    _emit(report, args.report)
    return EXIT_OK


# Parser


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="Override LAWMINE_LOG_LEVEL")
    parser.add_argument("--log-format", choices=["json", "text"], help="Override LAWMINE_LOG_FORMAT")
    parser.add_argument("--env-file", help="Seed settings from a .env file")
    parser.add_argument("--workers", type=int, help="Worker threads (default: LAWMINE_WORKERS)")


def _add_format(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=FORMATS, default=CSV_GENERIC, help="CSV profile of the data")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lawmine", description=__description__)
    parser.add_argument("--version", action="version", version=f"lawmine {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("learn", help="Learn a theory from a CSV table")
    p.add_argument("--data", required=True)
    p.add_argument("--bias", help="Bias TOML file")
    p.add_argument("--arity", type=int)
    p.add_argument("--batch", type=int, help="Rows drawn per layer")
    p.add_argument("--max-iterations", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--sampling", choices=SAMPLING_MODES)
    p.add_argument("--no-pruning", action="store_true", help="Keep constraints entailed by the others")
    p.add_argument("--out", required=True, help="Theory file to write")
    p.add_argument("--report", help="JSON report path (default: stdout)")
    _add_format(p)
    p.set_defaults(handler=cmd_learn)

    p = sub.add_parser("certify", help="Test a theory on uniformly drawn rows")
    p.add_argument("--theory", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--n", type=int, help="Test rows per round")
    p.add_argument("--confidence", type=float)
    p.add_argument("--rounds", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--exhaustive", action="store_true", help="Check every row when the data has fewer than n")
    p.add_argument("--out", help="Certified theory file to write")
    p.add_argument("--report", help="JSON report path (default: stdout)")
    _add_format(p)
    p.set_defaults(handler=cmd_certify)

    p = sub.add_parser("query", help="Decide whether a theory entails a constraint")
    p.add_argument("--theory", required=True)
    p.add_argument("--q", required=True, help="Constraint in surface syntax")
    p.add_argument("--emit-proof", action="store_true", help="Print the numbered proof when the query holds")
    p.add_argument("--report", help="JSON report path")
    p.set_defaults(handler=cmd_query)

    p = sub.add_parser("check", help="Report violations of a theory on a table")
    p.add_argument("--theory", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--report", help="JSON report path (default: stdout)")
    _add_format(p)
    p.set_defaults(handler=cmd_check)

    p = sub.add_parser("diff", help="Constraints of one theory the other does not entail")
    p.add_argument("--unknown", required=True)
    p.add_argument("--normal", required=True)
    p.add_argument("--report", help="JSON report path (default: stdout)")
    p.set_defaults(handler=cmd_diff)

    p = sub.add_parser("filter", help="Drop rows violating a theory")
    p.add_argument("--theory", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--stats", help="JSON statistics path (default: stdout)")
    _add_format(p)
    p.set_defaults(handler=cmd_filter)

    p = sub.add_parser("sample", help="Print drawn row indices")
    p.add_argument("--data", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mode", choices=SAMPLING_MODES, default="dc")
    p.add_argument("--seed", type=int)
    _add_format(p)
    p.set_defaults(handler=cmd_sample)

    p = sub.add_parser("synth", help="Generate a dataset with planted rules")
    p.add_argument("--spec", help="Plant TOML (default: the shipped plant.toml)")
    p.add_argument("--rows", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--truth", help="File for the planted rules")
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("bench", help="Coverage, runtime or sampling-efficiency curves")
    p.add_argument("kind", choices=BENCH_KINDS)
    p.add_argument("--data", help="CSV table (default: plant --spec)")
    p.add_argument("--bias")
    p.add_argument("--spec", help="Plant TOML used when no --data is given")
    p.add_argument("--rows", type=int)
    p.add_argument("--rules", help="Shipped rule set name or rule file")
    p.add_argument("--budgets", type=_int_list, default=[100, 200, 400, 800], help="Comma-separated example budgets")
    p.add_argument("--budget", type=int, default=400, help="Example budget for efficiency")
    p.add_argument("--seeds", type=int, default=1, help="Number of seeds per budget")
    p.add_argument("--seed", type=int)
    p.add_argument("--arity", type=int)
    p.add_argument("--max-iterations", type=int)
    p.add_argument("--sampling", choices=SAMPLING_MODES)
    p.add_argument("--certify", action="store_true", help="Certify each learned theory before scoring")
    p.add_argument("--cert-n", type=int)
    p.add_argument("--out", help="CSV curve path")
    p.add_argument("--report", help="JSON report path (default: stdout)")
    _add_format(p)
    p.set_defaults(handler=cmd_bench)

    for action in sub.choices.values():
        _add_common(action)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    try:
        load_configuration(args.env_file)
        reset_settings()
        configure_logging(args.log_level, args.log_format)
    except ConfigurationError as e:
        _diagnose(e.to_dict())
        return EXIT_USAGE

    with get_logger_service().context(command=args.command):
        try:
            return args.handler(args)
        except ConfigurationError as e:
            logger.error(f"Configuration error - {e.message}")
            _diagnose(e.to_dict())
            return EXIT_USAGE
        except LawmineError as e:
            logger.error(f"Command failed - {e.message}", error=type(e).__name__)
            _diagnose(e.to_dict())
            return EXIT_RUNTIME
        except OSError as e:
            logger.error(f"I/O failure - {e}")
            _diagnose({"error": type(e).__name__, "message": str(e), "details": {"path": e.filename}})
            return EXIT_RUNTIME


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
