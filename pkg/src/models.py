# src/models.py

from enum import Enum
from typing import Any, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic.alias_generators import to_camel

from src.config import (
    DEFAULT_ATOL, DEFAULT_H_LADDER, DEFAULT_PROBE_TOL, DEFAULT_RTOL, DEFAULT_STRATEGY, REPORT_SCHEMA_VERSION,
    resolve_default_fuel,
)


class ReportModel(BaseModel):
    """Base for everything written to JSON: camelCase field names on the wire."""
    model_config = ConfigDict(alias_generator=to_camel, populate_by_name=True, frozen=True)

    def to_json_dict(self) -> dict:
        return self.model_dump(by_alias=True, mode="json")


class EvalConfig(BaseModel):
    """Knobs of a single normalization run."""
    model_config = ConfigDict(frozen=True)

    fuel: int = Field(default_factory=resolve_default_fuel, ge=1)  # Maximum reduction steps
    fix_cap: Optional[int] = Field(default=None, ge=0)  # Replace every fixpoint by its fix_cap-th approximant
    record_decisions: bool = False


class OracleConfig(BaseModel):
    """Finite-difference probing and AD comparison settings."""
    model_config = ConfigDict(frozen=True)

    eval_config: EvalConfig = Field(default_factory=EvalConfig)
    strategy: str = DEFAULT_STRATEGY
    h_ladder: Tuple[float, ...] = DEFAULT_H_LADDER
    probe_tol: float = Field(default=DEFAULT_PROBE_TOL, gt=0)
    rtol: float = Field(default=DEFAULT_RTOL, ge=0)
    atol: float = Field(default=DEFAULT_ATOL, ge=0)

    @field_validator("h_ladder")
    @classmethod
    def _strictly_decreasing(cls, ladder: Tuple[float, ...]) -> Tuple[float, ...]:
        if not ladder:
            raise ValueError("the h ladder needs at least one step")
        if any(h <= 0 for h in ladder):
            raise ValueError("h ladder steps must be positive")
        if any(a <= b for a, b in zip(ladder, ladder[1:])):
            raise ValueError("h ladder must be strictly decreasing")
        return ladder


class DiffProbe(ReportModel):
    """Empirical differentiability of a program at a point."""
    kind: Literal["Differentiable", "NotDifferentiable", "Undefined", "Unknown"]
    grad: Optional[List[float]] = None
    axis: Optional[int] = None  # 1-based
    left_slope: Optional[float] = None
    right_slope: Optional[float] = None

    @classmethod
    def differentiable(cls, grad: List[float]) -> "DiffProbe":
        return cls(kind="Differentiable", grad=list(grad))

    @classmethod
    def not_differentiable(cls, axis: int, left_slope: float, right_slope: float) -> "DiffProbe":
        return cls(kind="NotDifferentiable", axis=axis, left_slope=left_slope, right_slope=right_slope)

    @classmethod
    def undefined(cls) -> "DiffProbe":
        return cls(kind="Undefined")

    @classmethod
    def unknown(cls, axis: Optional[int] = None) -> "DiffProbe":
        return cls(kind="Unknown", axis=axis)

    @property
    def is_differentiable(self) -> bool:
        return self.kind == "Differentiable"


class Verdict(str, Enum):
    AGREE = "Agree"
    FAIL = "Fail"
    OUTSIDE_DIFF_DOMAIN = "OutsideDiffDomain"
    INCONCLUSIVE = "Inconclusive"


class GradReport(ReportModel):
    point: List[float]
    ad_forward: Optional[List[float]] = None
    ad_reverse: Optional[List[float]] = None
    fd_grad: DiffProbe
    verdict: Verdict
    max_abs_err: Optional[float] = None
    max_rel_err: Optional[float] = None


class StabilityVerdict(ReportModel):
    schema_version: int = Field(default=REPORT_SCHEMA_VERSION, alias="schema")
    kind: Literal["StableEmpirical", "UnstableEmpirical", "Inconclusive"]
    center: List[float]
    radius: float
    probes: int
    witness: Optional[List[float]] = None
    reason: Optional[str] = None

    @model_validator(mode="after")
    def _witness_only_when_unstable(self) -> "StabilityVerdict":
        if (self.kind == "UnstableEmpirical") != (self.witness is not None):
            raise ValueError("a witness is present exactly for UnstableEmpirical verdicts")
        return self


class ScanReport(ReportModel):
    schema_version: int = Field(default=REPORT_SCHEMA_VERSION, alias="schema")
    box: List[Tuple[float, float]]
    samples: int
    seed: int
    evaluated: int
    divergent: int
    outside_diff_domain: int
    agree: int
    fail: int
    inconclusive: int = 0
    fail_points: List[List[float]] = Field(default_factory=list)
    fail_fraction: float

    @model_validator(mode="after")
    def _counts_add_up(self) -> "ScanReport":
        if self.evaluated != self.agree + self.fail + self.outside_diff_domain:
            raise ValueError("evaluated must equal agree + fail + outsideDiffDomain")
        if self.samples != self.evaluated + self.divergent + self.inconclusive:
            raise ValueError("samples must equal evaluated + divergent + inconclusive")
        return self


class SampleRecord(ReportModel):
    """One sampled point of a failure scan, as written to CSV."""
    point: List[float]
    verdict: str  # a Verdict value, or "Divergent"
    ad_forward: Optional[List[float]] = None
    ad_reverse: Optional[List[float]] = None
    fd_grad: Optional[List[float]] = None


class PretraceResult(ReportModel):
    holds: bool
    bound_hit: bool = False  # The fix rule gave up at the unfolding bound


class CorpusRunRecord(ReportModel):
    """One corpus entry as run by `corpus run`."""
    name: str
    params: List[str]
    coarity: int
    evaluations: List[Any] = Field(default_factory=list)
    reports: List[GradReport] = Field(default_factory=list)
    error: Optional[str] = None
