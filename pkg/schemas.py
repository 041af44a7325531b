import math
import os
from typing import List, Literal, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

load_dotenv()

DEFAULT_MAX_ITERS = int(os.getenv("KRTV_MAX_ITERS", "20000"))
DEFAULT_GAP_TOL = float(os.getenv("KRTV_GAP_TOL", "1e-5"))
DEFAULT_ALPHA = float(os.getenv("KRTV_ALPHA", "0.2"))
DEFAULT_CHECK_EVERY = int(os.getenv("KRTV_CHECK_EVERY", "50"))


class RegParams(BaseModel):
    """lambda = (lambda1, lambda2); None or inf means the constraint is dropped."""
    model_config = ConfigDict(frozen=True)

    lambda1: float = math.inf
    lambda2: float = math.inf

    @model_validator(mode="before")
    @classmethod
    def none_is_infinity(cls, data):
        if isinstance(data, dict):
            return {k: (math.inf if v is None else v) for k, v in data.items()}
        return data

    @field_validator("lambda1", "lambda2")
    @classmethod
    def positive(cls, v):
        if not v > 0:
            raise ValueError(f"regularization weights must be positive or infinite, got {v}")
        return float(v)

    @property
    def lambda1_finite(self) -> bool:
        return math.isfinite(self.lambda1)

    @property
    def lambda2_finite(self) -> bool:
        return math.isfinite(self.lambda2)

    def as_dict(self) -> dict:
        # JSON has no infinity
        return {
            "lambda1": self.lambda1 if self.lambda1_finite else None,
            "lambda2": self.lambda2 if self.lambda2_finite else None,
        }


class SolverConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    max_iters: int = DEFAULT_MAX_ITERS
    gap_tol: float = DEFAULT_GAP_TOL
    tau: Optional[float] = None
    sigma: Optional[float] = None
    alpha: float = DEFAULT_ALPHA
    theta: float = 1.0
    check_every: int = DEFAULT_CHECK_EVERY
    residual_tol: float = 1e-4
    adjoint_check: bool = True

    @field_validator("max_iters", "check_every")
    @classmethod
    def positive_int(cls, v):
        if v < 1:
            raise ValueError("must be a positive integer")
        return v

    @field_validator("gap_tol", "residual_tol")
    @classmethod
    def positive_tol(cls, v):
        if not v > 0:
            raise ValueError("tolerance must be positive")
        return v

    @field_validator("tau", "sigma")
    @classmethod
    def positive_step(cls, v):
        if v is not None and not (v > 0 and math.isfinite(v)):
            raise ValueError("step sizes must be positive and finite")
        return v

    @field_validator("alpha")
    @classmethod
    def admissible_inertia(cls, v):
        if not 0.0 <= v < 1.0 / 3.0:
            raise ValueError("alpha must lie in [0, 1/3)")
        return v

    @field_validator("theta")
    @classmethod
    def admissible_extrapolation(cls, v):
        if not 0.0 <= v <= 1.0:
            raise ValueError("theta must lie in [0, 1]")
        return v


class SolveReport(BaseModel):
    method: str
    iterations: int
    converged: bool
    primal: float
    dual: float
    gap: float
    relative_gap: float
    objective: float
    mass_in: float
    mass_out: float
    mass_difference: float
    tau: Optional[float] = None
    sigma: Optional[float] = None
    residual: Optional[float] = None


class DecompositionReport(BaseModel):
    model: str
    params: dict
    tv_cartoon: float
    texture_l1: float
    solve: SolveReport


class RunReport(BaseModel):
    command: str
    params: dict
    iterations: int = 0
    final_gap: Optional[float] = None
    objective: Optional[float] = None
    mass_in: Optional[float] = None
    mass_out: Optional[float] = None
    wall_time_ms: float = 0.0
    outputs: List[str] = Field(default_factory=list)

    @field_validator("final_gap", "objective", "mass_in", "mass_out", "wall_time_ms")
    @classmethod
    def finite(cls, v):
        if v is not None and not math.isfinite(v):
            raise ValueError("report values must be finite")
        return v


class RunReportResponse(RunReport):
    id: int
    ok: bool

    model_config = ConfigDict(from_attributes=True)


class SolverOptions(BaseModel):
    max_iters: Optional[int] = None
    gap_tol: Optional[float] = None
    alpha: Optional[float] = None

    @field_validator("max_iters")
    @classmethod
    def validate_iterations(cls, v):
        if v is not None and (v < 1 or v > 200000):
            raise ValueError("max_iters must be between 1 and 200000")
        return v

    def to_config(self) -> SolverConfig:
        return SolverConfig(**self.model_dump(exclude_none=True))


class DenoiseRequest(BaseModel):
    values: List[List[float]]
    model: Literal["krtv", "l1tv"] = "krtv"
    lambda1: Optional[float] = None
    lambda2: Optional[float] = None
    h: float = 1.0
    solver: SolverOptions = Field(default_factory=SolverOptions)

    @field_validator("values")
    @classmethod
    def rectangular(cls, v):
        if not v or not v[0]:
            raise ValueError("values must be a non-empty 2D array (use a single row for a signal)")
        if any(len(row) != len(v[0]) for row in v):
            raise ValueError("values must be rectangular")
        return v


class DenoiseResponse(BaseModel):
    values: List[List[float]]
    report: SolveReport


class DecomposeRequest(DenoiseRequest):
    model: Literal["krtv", "l1tv", "gtv"] = "krtv"
    lam: Optional[float] = None


class DecomposeResponse(BaseModel):
    cartoon: List[List[float]]
    texture: List[List[float]]
    report: DecompositionReport


class PointMass(BaseModel):
    point: List[float]
    weight: float


class KrNormRequest(BaseModel):
    masses: List[PointMass]
    lambda1: float
    lambda2: Optional[float] = None

    @field_validator("masses")
    @classmethod
    def non_empty(cls, v):
        if not v:
            raise ValueError("at least one point mass is required")
        return v


class KrNormResponse(BaseModel):
    value: float
    dual_value: float
    certificate: float
    certified: bool
    potentials: List[float]
