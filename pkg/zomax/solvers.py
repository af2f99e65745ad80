"""Extragradient family: ZO-EG, variance-reduced ZO-EG, its B^-1-preconditioned form, and
the first-order EG / GDA baselines. Every run returns an immutable `RunTrace`.
"""

from __future__ import annotations

import logging
import math
import time
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import Enum
from typing import Literal

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from zomax.config import get_settings
from zomax.diagnostics.stationarity import gradient_mapping_tau
from zomax.errors import (
    ConfigurationError,
    DivergenceError,
    EvaluationError,
    InfeasibleStartError,
)
from zomax.geometry import (
    DIRECTIONS_EXTRAPOLATION,
    DIRECTIONS_UPDATE,
    JointPoint,
    MetricMatrix,
    RandomStreams,
    as_vector,
)
from zomax.oracles import (
    AnalyticEstimator,
    GradientEstimate,
    OracleConfig,
    Schedule,
    ZerothOrderEstimator,
)
from zomax.problems.base import MinMaxProblem, check_projection_metric

logger = logging.getLogger(__name__)

Estimator = Callable[[NDArray, int, int], GradientEstimate]


class SolverVariant(str, Enum):
    ZOEG = "zoeg"
    VRZOEG = "vr_zoeg"
    MODIFIED_VRZOEG = "modified_vr_zoeg"
    FIRST_ORDER_EG = "first_order_eg"
    GDA = "gda"

    @property
    def zeroth_order(self) -> bool:
        return self in (SolverVariant.ZOEG, SolverVariant.VRZOEG, SolverVariant.MODIFIED_VRZOEG)


class SolverConfig(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    variant: SolverVariant = SolverVariant.ZOEG
    h1: Schedule
    h2: Schedule
    iterations: int = Field(..., ge=0)
    oracle: OracleConfig | None = None
    seed: int = Field(0, ge=0, lt=2**64)
    record_every: int = Field(1, ge=1)
    projection: Literal["metric", "euclidean"] = "metric"
    project_start: bool = False
    diagnostic_samples: int | None = Field(None, ge=1)

    @field_validator("h1", "h2", mode="before")
    @classmethod
    def coerce_schedule(cls, v):
        """Accept plain numbers as constant step sizes."""
        return Schedule.coerce(v)

    @model_validator(mode="after")
    def check_oracle(self) -> SolverConfig:
        """Zeroth-order variants need an oracle configuration."""
        if self.variant.zeroth_order and self.oracle is None:
            raise ValueError(f"variant {self.variant.value} needs an oracle configuration")
        return self

    def metric_for(self, problem: MinMaxProblem) -> MetricMatrix:
        if self.oracle is not None:
            return self.oracle.metric
        return MetricMatrix.identity(problem.n, problem.m)


def _frozen(a) -> NDArray:
    a = np.asarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RunTrace:
    """Records at k = 0, r, 2r, ... <= N; cum_evals counts algorithm evaluations only."""

    problem: str
    variant: str
    seed: int
    dims: tuple[int, int]
    iterations: NDArray
    points: NDArray
    extrapolations: NDArray
    f_values: NDArray
    diag_norms: NDArray
    cum_evals: NDArray
    diagnostic_evals: NDArray
    wall_times: NDArray
    diagnostic_kind: str
    final_point: NDArray
    total_evals: int
    components: dict[str, NDArray] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.iterations)

    def point(self, index: int) -> JointPoint:
        return JointPoint.from_vector(self.points[index], self.dims[0])


class _Recorder:
    def __init__(self, problem: MinMaxProblem, variant: str, seed: int, diagnostic_kind: str):
        self.problem = problem
        self.variant = variant
        self.seed = seed
        self.diagnostic_kind = diagnostic_kind
        self.rows: list[tuple] = []
        self.components: dict[str, list[float]] = {}
        self.started = time.perf_counter()

    def add(self, k, z, zhat, diag, cum_evals, diag_evals) -> None:
        f_value = self.problem.evaluate(z)
        zhat = np.full(z.shape, np.nan) if zhat is None else zhat
        elapsed = time.perf_counter() - self.started
        self.rows.append((k, z.copy(), zhat.copy(), f_value, diag, cum_evals, diag_evals, elapsed))
        if self.problem.components is not None:
            for name, value in self.problem.components(z).items():
                self.components.setdefault(name, []).append(value)

    def freeze(self, final_point: NDArray, total_evals: int) -> RunTrace:
        d = self.problem.d
        if self.rows:
            k, pts, hats, fv, dn, ce, de, wt = zip(*self.rows, strict=True)
        else:
            k, pts, hats, fv, dn, ce, de, wt = ((),) * 8
            pts = hats = np.empty((0, d))
        return RunTrace(
            problem=self.problem.name,
            variant=self.variant,
            seed=self.seed,
            dims=self.problem.dims,
            iterations=_frozen(np.array(k, dtype=int)),
            points=_frozen(np.array(pts, dtype=float).reshape(-1, d)),
            extrapolations=_frozen(np.array(hats, dtype=float).reshape(-1, d)),
            f_values=_frozen(np.array(fv, dtype=float)),
            diag_norms=_frozen(np.array(dn, dtype=float)),
            cum_evals=_frozen(np.array(ce, dtype=int)),
            diagnostic_evals=_frozen(np.array(de, dtype=int)),
            wall_times=_frozen(np.array(wt, dtype=float)),
            diagnostic_kind=self.diagnostic_kind,
            final_point=_frozen(np.array(final_point, dtype=float)),
            total_evals=int(total_evals),
            components={n: _frozen(np.array(v)) for n, v in self.components.items()},
        )


def validate_step_sizes(problem: MinMaxProblem, cfg: SolverConfig) -> list[str]:
    """Warn (never raise) when step sizes leave the window the convergence theory asks for.

    Only checked when L1 and rho are known and B is a multiple of the identity. The lower
    end of the h2 interval is treated as inclusive.
    """
    meta = problem.metadata
    metric = cfg.metric_for(problem)
    if meta.L1 is None or meta.rho is None or meta.L1 <= 0 or not metric.is_scaled_identity:
        return []
    lam, L1, rho = metric.lambda_max, meta.L1, meta.rho
    h1, h2 = cfg.h1.at(0), cfg.h2.at(0)
    issues = []
    if problem.is_constrained:
        if cfg.h1 != cfg.h2:
            issues.append("constrained runs assume h1 == h2")
        low, high = math.sqrt(6 * rho / (L1 * lam**2)), 1.0 / (2 * L1 * lam)
        if not low <= h1 <= high:
            issues.append(f"h={h1:g} outside the constrained window [{low:g}, {high:g}]")
    else:
        if h1 > 1.0 / (L1 * lam):
            issues.append(f"h1={h1:g} exceeds 1/(L1 lambda)={1.0 / (L1 * lam):g}")
        low = math.sqrt(2 * rho / (L1 * lam**2))
        if not low <= h2 <= h1 / 2:
            issues.append(f"h2={h2:g} outside [{low:g}, h1/2={h1 / 2:g}]")
    for issue in issues:
        logger.warning("%s: %s", problem.name, issue)
    return issues


def _start_point(problem: MinMaxProblem, cfg: SolverConfig, z0, project) -> NDArray:
    z = problem.start() if z0 is None else as_vector(z0, problem.dims).copy()
    if problem.contains(z):
        return z
    if cfg.project_start:
        logger.info("%s: projecting infeasible start onto the feasible set", problem.name)
        return project(z)
    raise InfeasibleStartError(f"{problem.name}: starting point is not feasible")


def _projector(problem: MinMaxProblem, cfg: SolverConfig) -> Callable[[NDArray], NDArray]:
    feasible = problem.feasible_set
    if feasible.is_unconstrained:
        return lambda v: v
    if cfg.projection == "metric":
        check_projection_metric(feasible, cfg.metric_for(problem))
    return feasible.project


class _Diagnostic:
    """|F(z)|, or the gradient-mapping norm on constrained problems, per recorded iterate."""

    def __init__(self, problem: MinMaxProblem, cfg: SolverConfig, estimator: Estimator):
        self.problem = problem
        self.cfg = cfg
        self.estimator = None
        if problem.has_gradient:
            self.kind = "F"
        elif isinstance(estimator, ZerothOrderEstimator):
            self.kind = "F_mu_estimate"
            self.estimator = estimator
            self.samples = cfg.diagnostic_samples or get_settings().diagnostic_samples
        else:
            raise ConfigurationError("no operator available for the trace diagnostic")
        if problem.is_constrained:
            self.kind = f"tau[{self.kind}]"

    def __call__(self, z: NDArray, k: int) -> tuple[float, int]:
        evals = 0
        if self.estimator is None:
            F = self.problem.operator(z)
        else:
            F, evals = self.estimator.estimate_at(z, k, self.samples)
        if self.problem.is_constrained:
            F = gradient_mapping_tau(self.problem, z, self.cfg.h1.at(k), self.cfg.h2.at(k), F)
        return float(np.linalg.norm(F)), evals


def _attach(exc, recorder: _Recorder, z: NDArray, evals: int) -> None:
    exc.partial_trace = recorder.freeze(z, evals)


def run_extragradient(
    problem: MinMaxProblem,
    cfg: SolverConfig,
    estimator: Estimator,
    z0=None,
    precondition: bool = False,
) -> RunTrace:
    """z_hat = P(z - h1 G(z)), z+ = P(z - h2 G(z_hat)), with G from `estimator`."""
    project = _projector(problem, cfg)
    z = _start_point(problem, cfg, z0, project)
    metric = cfg.metric_for(problem)
    validate_step_sizes(problem, cfg)
    diagnostic = _Diagnostic(problem, cfg, estimator)
    threshold = get_settings().divergence_threshold
    recorder = _Recorder(problem, cfg.variant.value, cfg.seed, diagnostic.kind)
    evals = diag_evals = 0
    logger.info("%s on %s: %d iterations", cfg.variant.value, problem.name, cfg.iterations)

    def direction(g: GradientEstimate) -> NDArray:
        return metric.apply_inverse(g.value) if precondition else g.value

    k = 0
    try:
        for k in range(cfg.iterations):
            start_evals = evals
            g = estimator(z, k, DIRECTIONS_EXTRAPOLATION)
            zhat = project(z - cfg.h1.at(k) * direction(g))
            evals += g.function_evals
            if k % cfg.record_every == 0:
                norm, spent = diagnostic(z, k)
                diag_evals += spent
                recorder.add(k, z, zhat, norm, start_evals, diag_evals)
            g_hat = estimator(zhat, k, DIRECTIONS_UPDATE)
            evals += g_hat.function_evals
            z = project(z - cfg.h2.at(k) * direction(g_hat))
            if not np.all(np.isfinite(z)) or np.linalg.norm(z) > threshold:
                raise DivergenceError(
                    f"{problem.name}: iterate norm exceeded {threshold:g} at k={k + 1}", k + 1
                )
        if cfg.iterations % cfg.record_every == 0:
            norm, spent = diagnostic(z, cfg.iterations)
            diag_evals += spent
            recorder.add(cfg.iterations, z, None, norm, evals, diag_evals)
    except (EvaluationError, DivergenceError) as exc:
        logger.error("%s stopped at k=%d: %s", cfg.variant.value, k, exc)
        _attach(exc, recorder, z, evals)
        raise
    return recorder.freeze(z, evals)


def run_zoeg(problem: MinMaxProblem, cfg: SolverConfig, z0=None) -> RunTrace:
    oracle = cfg.oracle.model_copy(update={"samples_per_call": Schedule(value=1)})
    cfg = cfg.model_copy(update={"oracle": oracle})
    estimator = ZerothOrderEstimator(problem, oracle, RandomStreams(cfg.seed))
    return run_extragradient(problem, cfg, estimator, z0)


def run_vr_zoeg(problem: MinMaxProblem, cfg: SolverConfig, z0=None) -> RunTrace:
    estimator = ZerothOrderEstimator(problem, cfg.oracle, RandomStreams(cfg.seed))
    return run_extragradient(problem, cfg, estimator, z0)


def run_modified_vr_zoeg(problem: MinMaxProblem, cfg: SolverConfig, z0=None) -> RunTrace:
    estimator = ZerothOrderEstimator(problem, cfg.oracle, RandomStreams(cfg.seed))
    return run_extragradient(problem, cfg, estimator, z0, precondition=True)


def run_first_order_eg(problem: MinMaxProblem, cfg: SolverConfig, z0=None) -> RunTrace:
    return run_extragradient(problem, cfg, AnalyticEstimator(problem), z0)


def run_gda(problem: MinMaxProblem, cfg: SolverConfig, z0=None) -> RunTrace:
    """z+ = P(z - h F(z)) with h taken from the h1 schedule."""
    estimator = AnalyticEstimator(problem)
    project = _projector(problem, cfg)
    z = _start_point(problem, cfg, z0, project)
    diagnostic = _Diagnostic(problem, cfg, estimator)
    threshold = get_settings().divergence_threshold
    recorder = _Recorder(problem, cfg.variant.value, cfg.seed, diagnostic.kind)
    evals = 0
    k = 0
    try:
        for k in range(cfg.iterations):
            if k % cfg.record_every == 0:
                recorder.add(k, z, None, diagnostic(z, k)[0], evals, 0)
            g = estimator(z, k, DIRECTIONS_EXTRAPOLATION)
            evals += g.function_evals
            z = project(z - cfg.h1.at(k) * g.value)
            if not np.all(np.isfinite(z)) or np.linalg.norm(z) > threshold:
                raise DivergenceError(
                    f"{problem.name}: iterate norm exceeded {threshold:g} at k={k + 1}", k + 1
                )
        if cfg.iterations % cfg.record_every == 0:
            recorder.add(cfg.iterations, z, None, diagnostic(z, cfg.iterations)[0], evals, 0)
    except (EvaluationError, DivergenceError) as exc:
        logger.error("gda stopped at k=%d: %s", k, exc)
        _attach(exc, recorder, z, evals)
        raise
    return recorder.freeze(z, evals)


RUNNERS = {
    SolverVariant.ZOEG: run_zoeg,
    SolverVariant.VRZOEG: run_vr_zoeg,
    SolverVariant.MODIFIED_VRZOEG: run_modified_vr_zoeg,
    SolverVariant.FIRST_ORDER_EG: run_first_order_eg,
    SolverVariant.GDA: run_gda,
}


def run_solver(problem: MinMaxProblem, cfg: SolverConfig, z0=None) -> RunTrace:
    return RUNNERS[cfg.variant](problem, cfg, z0)
