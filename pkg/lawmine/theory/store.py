"""
Theory files: line-oriented, one constraint per line in surface syntax, after a header of
`@directive <json>` lines

    @format 1
    @vocabulary [{"name": "Proto", "kind": "nominal", "values": ["TCP", "UDP"]}, ...]
    @certification {"n": 1000, "confidence": 0.95, ...}
    # comments and blank lines are ignored
    Proto="TCP" -> DstPort!=53
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from pydantic import ValidationError

from lawmine.errors import ConfigurationError, LanguageError, TheoryFormatError
from lawmine.ingest import WindowSpec
from lawmine.language.parser import parse_constraints
from lawmine.language.terms import Bias, Constraint, Provenance, Vocabulary, format_constraint
from lawmine.models.theory_models import FORMAT_VERSION, CertificationSummary, TheoryHeader
from lawmine.services.logger_service import get_logger

from .prover import Theory, build_theory

logger = get_logger("theory.store")

DIRECTIVES = ("format", "vocabulary", "bias", "window", "certification")


@dataclass(frozen=True)
class TheoryDocument:
    constraints: Sequence[Constraint]
    vocabulary: Optional[Vocabulary] = None
    bias: Optional[Bias] = None
    window: Optional[WindowSpec] = None
    certification: Optional[CertificationSummary] = None
    comments: Sequence[str] = field(default=())

    def theory(self) -> Theory:
        return build_theory(self.constraints, self.vocabulary)


def dumps(document: TheoryDocument) -> str:
    lines = [f"@format {FORMAT_VERSION}"]
    if document.vocabulary is not None:
        lines.append(f"@vocabulary {json.dumps(document.vocabulary.to_dict()['variables'])}")
    if document.bias is not None:
        lines.append(f"@bias {json.dumps(document.bias.to_dict(), sort_keys=True)}")
    if document.window is not None:
        lines.append(f"@window {json.dumps(document.window.to_dict())}")
    if document.certification is not None:
        lines.append(f"@certification {document.certification.model_dump_json(exclude_none=True)}")
    lines += [f"# {c}" for c in document.comments]
    lines += [format_constraint(c) for c in document.constraints]
    return "\n".join(lines) + "\n"


def _header(directives: Dict[str, Any]) -> TheoryHeader:
    try:
        return TheoryHeader(
            format_version=directives.get("format", FORMAT_VERSION),
            vocabulary=directives.get("vocabulary"),
            bias=directives.get("bias"),
            window=directives.get("window"),
            certification=directives.get("certification"),
        )
    except ValidationError as e:
        raise TheoryFormatError(f"invalid theory header: {e.errors()[0]['msg']}", {"errors": len(e.errors())}) from e


def loads(text: str) -> TheoryDocument:
    directives: Dict[str, Any] = {}
    body: List[str] = []
    comments: List[str] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            comments.append(line[1:].strip())
            continue
        if line.startswith("@"):
            if body:
                raise TheoryFormatError(f"directive after constraints on line {number}", {"line": number})
            name, _, payload = line[1:].partition(" ")
            if name not in DIRECTIVES:
                raise TheoryFormatError(f"unknown directive @{name} on line {number}", {"line": number})
            if name in directives:
                raise TheoryFormatError(f"repeated directive @{name} on line {number}", {"line": number})
            try:
                directives[name] = json.loads(payload)
            except json.JSONDecodeError as e:
                raise TheoryFormatError(f"directive @{name} on line {number} is not JSON: {e.msg}", {"line": number}) from e
            continue
        body.append(line)

    if "format" not in directives:
        raise TheoryFormatError("theory file has no @format directive", {"line": 1})
    header = _header(directives)
    try:
        vocab = Vocabulary.from_dict({"variables": header.vocabulary}) if header.vocabulary is not None else None
        bias = Bias.from_mapping(header.bias) if header.bias is not None else None
        window = WindowSpec.from_mapping(header.window) if header.window is not None else None
        constraints = parse_constraints("\n".join(body), vocab, Provenance.SEEDED)
    except (LanguageError, ConfigurationError) as e:
        raise TheoryFormatError(f"invalid theory file: {e.message}", e.details) from e
    except (KeyError, TypeError, ValueError) as e:
        raise TheoryFormatError(f"invalid theory header: {e}") from e
    return TheoryDocument(constraints, vocab, bias, window, header.certification, tuple(comments))


def save_theory(path: Union[str, Path], document: TheoryDocument) -> None:
    path = Path(path)
    path.write_text(dumps(document), encoding="utf-8")
    logger.info(f"Theory saved - path: {path}, constraints: {len(document.constraints)}")


def load_theory(path: Union[str, Path]) -> TheoryDocument:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise TheoryFormatError(f"cannot read theory file {path}: {e.strerror}", {"path": str(path)}) from e
    document = loads(text)
    logger.debug(f"Theory loaded - path: {path}, constraints: {len(document.constraints)}")
    return document
