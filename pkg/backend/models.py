from __future__ import annotations

import math
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, model_validator

CurveKind = Literal["fixed-axis-poly", "poly3", "fourier3"]
OutputFormat = Literal["csv", "json"]
Command = Literal["eval", "update", "tables", "verify", "presets"]

MAX_ORDER = 8
MAX_TABLE_M = 12
AXIS_TOL = 1e-12


class CurveSpec(BaseModel):
    """Analytic rotation-vector field theta(xi).

    ``fixed-axis-poly``: theta = f(xi) * axis, ``coefficients = [f]`` in ascending powers.
    ``poly3``: one ascending-power polynomial per component.
    ``fourier3``: per component ``[a0, a1, b1, a2, b2, ...]`` meaning
    a0 + sum_j a_j cos(j w xi) + b_j sin(j w xi), plus an optional polynomial ``trend``.
    """

    name: Optional[str] = None
    kind: CurveKind
    axis: Optional[List[float]] = None
    coefficients: List[List[float]]
    frequency: float = 1.0
    trend: Optional[List[List[float]]] = None
    domain: Optional[Tuple[float, float]] = None
    description: Optional[str] = None

    @model_validator(mode="after")
    def _check_layout(self) -> "CurveSpec":
        if any(len(coeffs) == 0 for coeffs in self.coefficients):
            raise ValueError("coefficient lists must be non-empty")
        if self.kind == "fixed-axis-poly":
            if self.axis is None or len(self.axis) != 3:
                raise ValueError("fixed-axis-poly needs a 3-component axis")
            if len(self.coefficients) != 1:
                raise ValueError("fixed-axis-poly takes a single coefficient list")
            norm = math.sqrt(sum(c * c for c in self.axis))
            if norm == 0.0:
                raise ValueError("axis must be non-zero")
            if abs(norm - 1.0) > AXIS_TOL:
                self.axis = [c / norm for c in self.axis]
        else:
            if self.axis is not None:
                raise ValueError(f"{self.kind} does not take an axis")
            if len(self.coefficients) != 3:
                raise ValueError(f"{self.kind} needs three coefficient lists")
        if self.kind == "fourier3":
            if any(len(coeffs) % 2 == 0 for coeffs in self.coefficients):
                raise ValueError("fourier3 lists are [a0, a1, b1, ...] and must have odd length")
            if self.trend is not None and len(self.trend) != 3:
                raise ValueError("trend needs one polynomial per component")
        elif self.trend is not None:
            raise ValueError("trend only applies to fourier3")
        if self.domain is not None and self.domain[0] > self.domain[1]:
            raise ValueError("domain must be [xi_min, xi_max]")
        return self


class JobConfig(BaseModel):
    command: Command
    spec: Optional[CurveSpec] = None
    increment: Optional[CurveSpec] = None
    points: List[float] = Field(default_factory=list)
    order: int = Field(default=2, ge=0, le=MAX_ORDER)
    output_format: OutputFormat = "csv"
    out: Optional[str] = None
    verify: bool = False
    max_m: int = Field(default=6, ge=0, le=MAX_TABLE_M)

    @model_validator(mode="after")
    def _check_inputs(self) -> "JobConfig":
        if self.command in ("eval", "update", "verify"):
            if self.spec is None:
                raise ValueError(f"{self.command} needs a curve spec")
            if not self.points:
                raise ValueError(f"{self.command} needs at least one sample point")
        if self.command == "update" and self.increment is None:
            raise ValueError("update needs an increment spec")
        if self.command == "verify" and self.order < 1:
            raise ValueError("verify needs order >= 1")
        return self


class SampleOutput(BaseModel):
    xi: float
    Q: List[float]
    kappa: List[List[float]]
    kappa_bar: List[List[float]]
    kappa_tilde: List[List[float]]


class EvalOutput(BaseModel):
    spec: CurveSpec
    order: int
    samples: List[SampleOutput]


class UpdateErrors(BaseModel):
    Q: float
    kappa: List[Optional[float]]


class UpdateSample(BaseModel):
    xi: float
    Q: List[float]
    kappa: List[List[float]]
    errors: Optional[UpdateErrors] = None


class UpdateOutput(BaseModel):
    spec: CurveSpec
    increment: CurveSpec
    order: int
    samples: List[UpdateSample]


class VerificationRow(BaseModel):
    quantity: str
    order: int
    closed_form: List[float] = Field(default_factory=list)
    oracle: List[float] = Field(default_factory=list)
    abs_error: float = math.nan
    mixed_error: float = math.nan
    tolerance: float = math.nan
    passed: bool
    message: Optional[str] = None


class VerificationReport(BaseModel):
    xi: float
    status: Literal["pass", "fail"]
    rows: List[VerificationRow]


class VerifyOutput(BaseModel):
    spec: CurveSpec
    increment: Optional[CurveSpec] = None
    order: int
    reports: List[VerificationReport]

    @property
    def passed(self) -> bool:
        return all(report.status == "pass" for report in self.reports)


class TablesOutput(BaseModel):
    max_m: int
    jmax: List[int]
    bcoef: List[List[int]]
    table2: List[List[int]]


class PresetSummary(BaseModel):
    name: str
    kind: CurveKind
    description: Optional[str] = None
    source_path: Optional[str] = None


class EvalRequest(BaseModel):
    spec: Optional[CurveSpec] = None
    preset: Optional[str] = None
    points: List[float]
    order: int = Field(default=2, ge=0, le=MAX_ORDER)


class UpdateRequest(BaseModel):
    spec: Optional[CurveSpec] = None
    preset: Optional[str] = None
    increment: Optional[CurveSpec] = None
    increment_preset: Optional[str] = None
    points: List[float]
    order: int = Field(default=2, ge=0, le=MAX_ORDER)
    verify: bool = False


class VerifyRequest(BaseModel):
    spec: Optional[CurveSpec] = None
    preset: Optional[str] = None
    increment: Optional[CurveSpec] = None
    increment_preset: Optional[str] = None
    points: List[float]
    order: int = Field(default=4, ge=1, le=MAX_ORDER)
