"""
Benchmark rule sets shipped as fixture files
"""

from pathlib import Path
from typing import List, Optional, Tuple, Union

from lawmine.errors import ConfigurationError, DatasetIoError
from lawmine.language.parser import parse_constraints
from lawmine.language.terms import Constraint, Provenance, Vocabulary

FIXTURES = Path(__file__).parent / "fixtures"
RULE_SUFFIX = ".rules"


def available_rule_sets() -> Tuple[str, ...]:
    return tuple(sorted(p.stem for p in FIXTURES.glob(f"*{RULE_SUFFIX}")))


def rule_set_path(name: Union[str, Path]) -> Path:
    """A shipped rule set by name, or any rule file by path"""
    if str(name) in available_rule_sets():
        return FIXTURES / f"{name}{RULE_SUFFIX}"
    path = Path(name)
    if path.is_file():
        return path
    raise ConfigurationError(
        f"unknown rule set {name!s}; shipped sets are {', '.join(available_rule_sets())}", {"rules": str(name)}
    )


def load_rules(name: Union[str, Path], vocab: Optional[Vocabulary] = None) -> List[Constraint]:
    path = rule_set_path(name)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise DatasetIoError(f"cannot read rule file {path}: {e.strerror}", {"path": str(path)}) from e
    return parse_constraints(text, vocab, Provenance.USER_QUERY)


def plant_spec_path() -> Path:
    return FIXTURES / "plant.toml"
