"""
Pydantic models for the directives in a theory file header
"""

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, field_validator

FORMAT_VERSION = 1


class CertificationSummary(BaseModel):
    """Outcome of the certification run the theory survived"""

    n: int = Field(..., ge=1, description="Test rows per round")
    confidence: float = Field(..., gt=0, lt=1, description="Confidence level of the zero-violation bound")
    p_max: float = Field(..., description="Upper bound on the violation rate of a surviving constraint")
    z_star: float = Field(..., description="Certified generalizability, 1 - p_max")
    rounds_used: int = Field(..., ge=0, description="Test rounds run")
    removed: int = Field(0, ge=0, description="Constraints dropped by certification")
    seed: Optional[int] = Field(None, description="Seed of the test-row draws")

    @field_validator("p_max", "z_star")
    @classmethod
    def round_bound(cls, v):
        """Keep bounds readable"""
        return round(v, 6)


class TheoryHeader(BaseModel):
    """Everything before the first constraint line"""

    format_version: int = Field(FORMAT_VERSION, description="Theory file format version")
    vocabulary: Optional[List[Dict[str, Any]]] = Field(None, description="Variables with kinds and domains")
    bias: Optional[Dict[str, Any]] = Field(None, description="Bias the constraints were learned under")
    window: Optional[Dict[str, Any]] = Field(None, description="Window the rows were aggregated with")
    certification: Optional[CertificationSummary] = Field(None, description="Certification metadata")

    @field_validator("format_version")
    @classmethod
    def supported_version(cls, v):
        if v != FORMAT_VERSION:
            raise ValueError(f"unsupported theory format {v}, expected {FORMAT_VERSION}")
        return v
