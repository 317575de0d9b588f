"""
Pydantic models for JSON reports and theory file headers
"""

from .report_models import (
    BenchReport,
    CertificationReport,
    DiffReport,
    FilterReport,
    LearnReport,
    QueryReport,
    ViolationReportModel,
)
from .theory_models import CertificationSummary, TheoryHeader

__all__ = [
    "BenchReport",
    "CertificationReport",
    "CertificationSummary",
    "DiffReport",
    "FilterReport",
    "LearnReport",
    "QueryReport",
    "TheoryHeader",
    "ViolationReportModel",
]
