"""
Pydantic models for the JSON reports the command line writes
"""

from typing import Dict, List, Optional

from pydantic import BaseModel, Field, field_validator


class LayerStatsModel(BaseModel):
    layer: int = Field(..., description="Layer index, 0 for the seeds")
    live: int = Field(..., description="Candidates refined in the layer")
    learned: int = Field(..., description="Candidates learned in the layer")
    eliminated: int = Field(..., description="Candidates eliminated in the layer")
    retracted: int = Field(..., description="Learned constraints a new batch violated")
    rows_seen: int = Field(..., description="Rows seen once the layer's batch was drawn")
    seconds: float = Field(..., description="Wall time of the layer")

    @field_validator("seconds")
    @classmethod
    def round_seconds(cls, v):
        return round(v, 4)


class LearnReport(BaseModel):
    """Summary of a learning run"""

    constraints: int = Field(..., description="Constraints in the learned theory")
    candidates_materialized: int = Field(..., description="Candidates ever built")
    layers: int = Field(..., description="Layers traversed")
    rows_seen: int = Field(..., description="Distinct rows drawn")
    max_live_layers: int = Field(..., description="Most lattice layers alive at once")
    layer_stats: List[LayerStatsModel] = Field(default_factory=list)


class RemovedConstraint(BaseModel):
    constraint: str = Field(..., description="Constraint in surface syntax")
    round: int = Field(..., description="Round that removed it")
    violations: int = Field(..., description="Violating test rows in that round")
    first_violation_row: Optional[int] = Field(None, description="Dataset index of the first violating row")


class CertificationReport(BaseModel):
    survivors: List[str] = Field(..., description="Constraints that passed certification")
    removed: List[RemovedConstraint] = Field(default_factory=list)
    p_max: float = Field(..., description="Upper bound on each survivor's violation rate")
    z_star: float = Field(..., description="Certified generalizability")
    rounds_used: int
    converged: bool = Field(..., description="Whether the final round was clean")
    exhaustive: bool = Field(..., description="Whether every row was checked instead of sampling")
    tested_rows: int
    note: str

    @field_validator("p_max", "z_star")
    @classmethod
    def round_bound(cls, v):
        """Ensure bounds are properly rounded"""
        return round(v, 6)


class ConstraintViolations(BaseModel):
    constraint: str
    violations: int
    not_evaluable: int = Field(..., description="Rows lacking a value the constraint needs")
    rate: float = Field(..., description="Violations over evaluable rows")

    @field_validator("rate")
    @classmethod
    def round_rate(cls, v):
        return round(v, 6)


class CdfPoint(BaseModel):
    violations: int = Field(..., description="Constraints violated by a row")
    fraction: float = Field(..., description="Share of rows violating at most this many")

    @field_validator("fraction")
    @classmethod
    def round_fraction(cls, v):
        return round(v, 6)


class ViolationReportModel(BaseModel):
    rows: int
    violation_rate: float = Field(..., description="Share of rows violating at least one constraint")
    distinct_violated: int = Field(..., description="Constraints violated at least once")
    constraints: List[ConstraintViolations]
    cdf: List[CdfPoint]
    violating_rows: Dict[int, List[int]] = Field(
        default_factory=dict, description="Row index to indices of the constraints it violates"
    )

    @field_validator("violation_rate")
    @classmethod
    def round_rate(cls, v):
        return round(v, 6)


class DiffReport(BaseModel):
    suspicious: List[str] = Field(..., description="Unknown constraints the normal theory does not entail")
    unknown: int
    normal: int


class FilterReport(BaseModel):
    total: int
    accepted: int
    rejected: int
    acceptance_rate: float
    rejected_by: Dict[str, int] = Field(default_factory=dict, description="Rejected rows per violated constraint")

    @field_validator("acceptance_rate")
    @classmethod
    def round_rate(cls, v):
        return round(v, 6)


class QueryReport(BaseModel):
    query: str
    holds: bool
    proof: Optional[List[str]] = Field(None, description="Numbered proof steps when requested")
    countermodel: Optional[Dict[str, bool]] = Field(None, description="Atom assignment refuting the query")


class CurvePoint(BaseModel):
    budget: int
    value: float
    seed: Optional[int] = None


class BenchReport(BaseModel):
    kind: str = Field(..., description="coverage, runtime or efficiency")
    points: List[CurvePoint]
    slope: Optional[float] = Field(None, description="Log-log regression slope of a runtime curve")
    ratio: Optional[float] = Field(None, description="Mean DC / uniform lattice size ratio")
