from __future__ import annotations

from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


def _split_list(v):
    if isinstance(v, str):
        return [item.strip() for item in v.replace(";", ",").split(",") if item.strip()]
    return v


class GoldsteinCertificate(BaseModel):
    delta: float = Field(..., gt=0, lt=1)
    gamma: float = Field(..., gt=0)
    mu: float = Field(..., gt=0)
    estimate: float = Field(..., ge=0)
    std_error: float = Field(..., ge=0)
    bound: float = Field(..., ge=0)


class StationarityReport(BaseModel):
    grad_norm: float = Field(..., ge=0)
    mapping_norm: float | None = Field(None, ge=0)
    goldstein: GoldsteinCertificate | None = None
    evals_spent: int = Field(0, ge=0)


class HistogramBin(BaseModel):
    left: float
    right: float
    count: int = Field(..., ge=0)


class MviReport(BaseModel):
    samples: int = Field(..., ge=1)
    min_value: float
    violating_fraction: float = Field(..., ge=0, le=1)
    rho_used: float = Field(..., ge=0)
    histogram: list[HistogramBin] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_violations(self) -> MviReport:
        """A violating draw implies a negative minimum."""
        if self.violating_fraction > 0 and not self.min_value < 0:
            raise ValueError("violating_fraction > 0 needs a negative min_value")
        return self


class HyperparamPlan(BaseModel):
    mu_max: float = Field(..., gt=0)
    N_min: int = Field(..., ge=1)
    t_min: int | None = Field(None, ge=1)
    h_window: tuple[float, float]
    source: str
    L1_mu: float | None = None
    h1: float | None = None
    h2: float | None = None

    @field_validator("h_window")
    @classmethod
    def validate_window(cls, v: tuple[float, float]) -> tuple[float, float]:
        """Window bounds must be ordered."""
        if not v[0] < v[1]:
            raise ValueError(f"empty step window {v}")
        return v


class SummaryRow(BaseModel):
    experiment: str
    variant: str
    seed: int
    initial_objective: float
    final_objective: float
    objective_ratio: float
    final_diag_norm: float
    iterations: int = Field(..., ge=0)
    function_evals: int = Field(..., ge=0)
    wall_time_s: float = Field(..., ge=0)
    accuracy: float | None = None
    holdout_accuracy: float | None = None

    @model_validator(mode="after")
    def check_evals(self) -> SummaryRow:
        """A run with iterations must have spent evaluations."""
        if self.iterations > 0 and self.function_evals <= 0:
            raise ValueError("function_evals must be positive when iterations > 0")
        return self


# Experiment files

ProblemKind = Literal[
    "toy_f1",
    "toy_f2",
    "toy_f3",
    "bilinear",
    "bilinear_orthant",
    "linear",
    "abs_diff",
    "rls",
    "poisoning",
    "lane_merging",
]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ProblemSpec(_Section):
    kind: ProblemKind
    start: list[float] | None = None
    dataset: Path | None = None
    seed: int = Field(0, ge=0)
    n: int | None = Field(None, ge=1)
    m: int | None = Field(None, ge=1)
    rho_ball: float = Field(5.0, gt=0)
    lam: float = Field(1e-3, ge=0)
    zeta: float = Field(10.0, gt=0)
    holdout: int = Field(0, ge=0)
    sigma: float = Field(1.0, gt=0)
    lipschitz_bound: float = Field(10.0, gt=0)
    horizon: float = Field(20.0, gt=0)
    control_points: int = Field(50, ge=2)

    @field_validator("start", mode="before")
    @classmethod
    def parse_start(cls, v):
        """Accept comma separated coordinates."""
        return _split_list(v)

    @field_validator("dataset")
    @classmethod
    def validate_dataset(cls, v: Path | None) -> Path | None:
        """Referenced files must exist."""
        if v is not None and not v.exists():
            raise ValueError(f"file not found: {v}")
        return v

    @model_validator(mode="after")
    def check_holdout(self) -> ProblemSpec:
        """Held-out samples are drawn with a generated dataset only."""
        if self.holdout and self.dataset is not None:
            raise ValueError("holdout needs a generated dataset, not a dataset file")
        return self


class SolverSpec(_Section):
    variant: Literal["zoeg", "vr_zoeg", "modified_vr_zoeg", "first_order_eg", "gda"] = "zoeg"
    h1: float = Field(..., gt=0)
    h2: float | None = Field(None, gt=0)
    h_schedule: Literal["constant", "harmonic", "linear"] = "constant"
    iterations: int = Field(..., ge=0)
    seeds: list[int] = Field(default_factory=lambda: [0], min_length=1)
    record_every: int = Field(1, ge=1)
    projection: Literal["metric", "euclidean"] = "metric"
    project_start: bool = False

    @field_validator("seeds", mode="before")
    @classmethod
    def parse_seeds(cls, v):
        """Accept comma separated seeds."""
        return _split_list(v)

    @field_validator("seeds")
    @classmethod
    def validate_seeds(cls, v: list[int]) -> list[int]:
        """Seeds are unsigned and unique."""
        if any(s < 0 for s in v):
            raise ValueError("seeds must be nonnegative")
        if len(set(v)) != len(v):
            raise ValueError("seeds must be unique")
        return v


class OracleSpec(_Section):
    mu: float = Field(1e-6, gt=0)
    mu_schedule: Literal["constant", "harmonic", "linear"] = "constant"
    scheme: Literal["forward", "backward", "central"] = "forward"
    samples: int = Field(1, ge=1)
    samples_schedule: Literal["constant", "linear"] = "constant"
    noise_variance: float = Field(0.0, ge=0)
    cache_base: bool | None = None
    diagnostic_samples: int | None = Field(None, ge=1)


class MetricSpec(_Section):
    kind: Literal["problem", "identity", "scaled", "diagonal_random", "half_split"] = "problem"
    scale: float = Field(1.0, gt=0)
    low: float = Field(1.0, gt=0)
    high: float = Field(100.0, gt=0)
    seed: int = Field(0, ge=0)

    @model_validator(mode="after")
    def check_range(self) -> MetricSpec:
        """Diagonal ranges must be ordered."""
        if self.low > self.high:
            raise ValueError("low must not exceed high")
        return self


class DiagnosticsSpec(_Section):
    record_coordinates: bool | None = None
    stationarity: bool = True
    goldstein: bool = False
    goldstein_delta: float = Field(0.5, gt=0, lt=1)
    goldstein_epsilon: float = Field(0.1, gt=0)
    goldstein_samples: int = Field(10000, ge=2)


class MviSpec(_Section):
    candidate: str = "run"
    h: float = Field(..., gt=0)
    count: int = Field(1000, ge=1)
    rho: float = Field(0.0, ge=0)
    covariance: str = "1.0"
    mu: float = Field(1e-4, gt=0)
    estimate_samples: int = Field(64, ge=2)
    seed: int = Field(0, ge=0)
    bins: int | None = Field(None, ge=1)

    @field_validator("candidate")
    @classmethod
    def validate_candidate(cls, v: str) -> str:
        """Either `run` or an existing candidate file."""
        v = v.strip()
        if v != "run" and not Path(v).exists():
            raise ValueError(f"candidate file not found: {v}")
        return v

    @field_validator("covariance")
    @classmethod
    def validate_covariance(cls, v: str) -> str:
        """A positive variance, a list of variances, or `lane_merging`."""
        v = v.strip()
        if v == "lane_merging":
            return v
        values = [float(item) for item in _split_list(v)]
        if not values or min(values) <= 0:
            raise ValueError("sampling variances must be positive")
        return v


class ExperimentConfig(_Section):
    name: str = Field(..., min_length=1, max_length=200)
    output_dir: Path | None = None
    problem: ProblemSpec
    solver: SolverSpec
    oracle: OracleSpec = Field(default_factory=OracleSpec)
    metric: MetricSpec = Field(default_factory=MetricSpec)
    diagnostics: DiagnosticsSpec = Field(default_factory=DiagnosticsSpec)
    mvi: MviSpec | None = None

    @field_validator("name")
    @classmethod
    def validate_name(cls, v: str) -> str:
        """Strip whitespace"""
        clean = v.strip()
        if not clean:
            raise ValueError("name must not be blank")
        return clean
