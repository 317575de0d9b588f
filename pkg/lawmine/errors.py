"""
Exception hierarchy shared by every lawmine module
"""

from typing import Any, Dict, Optional


class LawmineError(Exception):
    """Base exception carrying a message and machine-readable details"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        self.message = message
        self.details = details or {}
        super().__init__(self.message)

    def to_dict(self) -> Dict[str, Any]:
        """Serializable form used by CLI diagnostics"""
        return {"error": type(self).__name__, "message": self.message, "details": self.details}


class ConfigurationError(LawmineError):
    """Invalid settings, bias files or parameter ranges"""

    def __init__(self, message: str, errors: Optional[Dict[str, Any]] = None):
        self.errors = errors or {}
        super().__init__(message, {"errors": self.errors} if self.errors else None)


# Language


class LanguageError(LawmineError):
    pass


class UnboundVariable(LanguageError):
    def __init__(self, name: str):
        super().__init__(f"variable {name!r} is not assigned", {"variable": name})
        self.name = name


class TypeMismatch(LanguageError):
    def __init__(self, message: str, variable: Optional[str] = None):
        super().__init__(message, {"variable": variable} if variable else None)


class ConstraintSyntaxError(LanguageError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}", {"position": position})
        self.position = position


class UnknownVariable(LanguageError):
    def __init__(self, name: str):
        super().__init__(f"unknown variable {name!r}", {"variable": name})
        self.name = name


class DomainViolation(LanguageError):
    def __init__(self, message: str, variable: Optional[str] = None):
        super().__init__(message, {"variable": variable} if variable else None)


class MalformedConstraint(LanguageError):
    pass


# Ingest


class IngestError(LawmineError):
    pass


class DatasetIoError(IngestError):
    pass


class MalformedRow(IngestError):
    def __init__(self, line: int, expected: int, found: int):
        super().__init__(
            f"line {line} has {found} fields, expected {expected}",
            {"line": line, "expected": expected, "found": found},
        )
        self.line = line


class HeaderMismatch(IngestError):
    pass


class EmptyDataset(IngestError):
    pass


class DatasetTooShort(IngestError):
    pass


class SchemaMismatch(IngestError):
    pass


# Sampling


class SamplerError(LawmineError):
    pass


class Exhausted(SamplerError):
    pass


class SampleTooLarge(SamplerError):
    def __init__(self, requested: int, available: int):
        super().__init__(
            f"cannot draw {requested} rows from {available}",
            {"requested": requested, "available": available},
        )


# Learning


class LearnerError(LawmineError):
    pass


class InstanceTooLarge(LearnerError):
    pass


# Statistics


class StatsError(LawmineError):
    pass


class StatsDomainError(StatsError):
    pass


class NoSurvivors(StatsError):
    pass


# Theory


class TheoryError(LawmineError):
    pass


class QueryTooLarge(TheoryError):
    def __init__(self, atoms: int, budget: int):
        super().__init__(f"query needs {atoms} atoms, budget is {budget}", {"atoms": atoms, "budget": budget})


class TheoryFormatError(TheoryError):
    pass


# Benchmarks


class GenbenchError(LawmineError):
    pass


class UnsatisfiablePlant(GenbenchError):
    pass
