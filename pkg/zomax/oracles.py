"""Gaussian-smoothing zeroth-order estimators of the min-max operator.

For a direction u ~ N(0, B^-1) the forward estimate is

    q = (f(z + mu u) - f(z)) / mu,    G = [q B1 u1; -q B2 u2]

and its expectation is F_mu(z) = [grad_x f_mu; -grad_y f_mu]. Backward and central schemes
swap the difference quotient; averaging over t directions reduces the variance by 1/t.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass
from enum import Enum
from typing import Literal, NamedTuple, Union

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator

from zomax.errors import ConfigurationError, DimensionMismatchError, MissingGradientError
from zomax.geometry import (
    DIAGNOSTIC_DIRECTIONS,
    DIAGNOSTIC_NOISE,
    NOISE_EXTRAPOLATION,
    MetricMatrix,
    PointLike,
    RandomStreams,
    as_vector,
)
from zomax.problems.base import MinMaxProblem

logger = logging.getLogger(__name__)

# directions per vectorized evaluation when Monte-Carlo sample counts get large
CHUNK = 50_000


class SmoothingScheme(str, Enum):
    FORWARD = "forward"
    BACKWARD = "backward"
    CENTRAL = "central"


class NoiseModel(BaseModel):
    """Additive zero-mean Gaussian output noise; variance 0 means noiseless."""

    model_config = ConfigDict(frozen=True)

    variance: float = Field(0.0, ge=0)

    @property
    def is_noiseless(self) -> bool:
        return self.variance == 0

    def perturb(self, values: NDArray, rng: np.random.Generator | None) -> NDArray:
        if self.is_noiseless:
            return values
        if rng is None:
            raise ConfigurationError("noisy evaluations need a random generator")
        return values + rng.normal(0.0, np.sqrt(self.variance), size=values.shape)


Noiseless = NoiseModel()


def AdditiveGaussian(variance: float) -> NoiseModel:  # noqa: N802
    return NoiseModel(variance=variance)


class Schedule(BaseModel):
    """Iteration-indexed positive scalar: constant, value/(k+1) or value*(k+1)."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["constant", "harmonic", "linear"] = "constant"
    value: float = Field(..., gt=0)

    def at(self, k: int) -> float:
        if self.kind == "harmonic":
            return self.value / (k + 1)
        if self.kind == "linear":
            return self.value * (k + 1)
        return self.value

    @classmethod
    def coerce(cls, v):
        if isinstance(v, int | float) and not isinstance(v, bool):
            return cls(value=float(v))
        return v


class OracleConfig(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    mu: Schedule
    metric: MetricMatrix
    scheme: SmoothingScheme = SmoothingScheme.FORWARD
    samples_per_call: Schedule = Schedule(value=1)
    noise: NoiseModel = Noiseless
    # reuse f(z) across the directions of one call; None picks on for noiseless runs
    cache_base: bool | None = None

    @field_validator("mu", "samples_per_call", mode="before")
    @classmethod
    def coerce_schedule(cls, v):
        """Accept plain numbers as constant schedules."""
        return Schedule.coerce(v)

    @field_validator("samples_per_call")
    @classmethod
    def check_samples(cls, v: Schedule) -> Schedule:
        """Sample counts must round to at least one."""
        if round(v.at(0)) < 1:
            raise ValueError("samples_per_call must be at least 1")
        return v

    def mu_at(self, k: int) -> float:
        return self.mu.at(k)

    def samples_at(self, k: int) -> int:
        return max(1, int(round(self.samples_per_call.at(k))))

    @property
    def caches_base(self) -> bool:
        return self.noise.is_noiseless if self.cache_base is None else self.cache_base


@dataclass(frozen=True)
class GradientEstimate:
    value: NDArray
    samples_used: int
    function_evals: int


class OperatorEstimate(NamedTuple):
    value: NDArray
    std_error: NDArray
    function_evals: int


ObjectiveLike = Union[MinMaxProblem, Callable[[NDArray], float]]


def as_problem(f: ObjectiveLike, metric: MetricMatrix) -> MinMaxProblem:
    if isinstance(f, MinMaxProblem):
        if f.dims != metric.dims:
            raise DimensionMismatchError(f"problem dims {f.dims} differ from metric {metric.dims}")
        return f
    n, m = metric.dims
    return MinMaxProblem.from_scalar("objective", n, m, f)


def difference_quotients(
    problem: MinMaxProblem,
    z: NDArray,
    U: NDArray,
    mu: float,
    scheme: SmoothingScheme,
    noise: NoiseModel = Noiseless,
    noise_rng: np.random.Generator | None = None,
    cache_base: bool = True,
) -> tuple[NDArray, int]:
    """Scalar quotients q_i, one per direction row of U, and the evaluations spent."""
    if not mu > 0:
        raise ConfigurationError(f"mu must be positive, got {mu}")
    t = len(U)

    def values(points: NDArray) -> NDArray:
        return noise.perturb(problem.evaluate_batch(points), noise_rng)

    def base() -> NDArray:
        if cache_base:
            return values(z[None, :])
        return values(np.repeat(z[None, :], t, axis=0))

    if scheme is SmoothingScheme.CENTRAL:
        plus = values(z + mu * U)
        minus = values(z - mu * U)
        return (plus - minus) / (2.0 * mu), 2 * t
    evals = t + (1 if cache_base else t)
    if scheme is SmoothingScheme.FORWARD:
        plus = values(z + mu * U)
        return (plus - base()) / mu, evals
    minus = values(z - mu * U)
    return (base() - minus) / mu, evals


def block_estimates(q: NDArray, U: NDArray, metric: MetricMatrix) -> NDArray:
    """Rows [q_i B1 u1_i; -q_i B2 u2_i]."""
    estimates = q[:, None] * metric.apply(U)
    estimates[:, metric.dims[0] :] *= -1.0
    return estimates


def sample_estimates(
    f: ObjectiveLike,
    z: PointLike,
    U: NDArray,
    cfg: OracleConfig,
    iteration: int = 0,
    noise_rng: np.random.Generator | None = None,
    scheme: SmoothingScheme | None = None,
) -> tuple[NDArray, int]:
    """Per-direction estimates (t, d) for the directions in U."""
    problem = as_problem(f, cfg.metric)
    zv = as_vector(z, problem.dims)
    U = np.atleast_2d(np.asarray(U, dtype=float))
    q, evals = difference_quotients(
        problem,
        zv,
        U,
        cfg.mu_at(iteration),
        scheme or cfg.scheme,
        cfg.noise,
        noise_rng,
        cfg.caches_base,
    )
    return block_estimates(q, U, cfg.metric), evals


def _single(f, z, u, cfg, scheme, rng) -> GradientEstimate:
    U = as_vector(u, cfg.metric.dims)[None, :]
    estimates, evals = sample_estimates(f, z, U, cfg, noise_rng=rng, scheme=scheme)
    return GradientEstimate(estimates[0], 1, evals)


def forward_oracle(f, z, u, cfg: OracleConfig, rng=None) -> GradientEstimate:
    return _single(f, z, u, cfg, SmoothingScheme.FORWARD, rng)


def backward_oracle(f, z, u, cfg: OracleConfig, rng=None) -> GradientEstimate:
    return _single(f, z, u, cfg, SmoothingScheme.BACKWARD, rng)


def central_oracle(f, z, u, cfg: OracleConfig, rng=None) -> GradientEstimate:
    return _single(f, z, u, cfg, SmoothingScheme.CENTRAL, rng)


def averaged_oracle(
    f: ObjectiveLike,
    z: PointLike,
    cfg: OracleConfig,
    rng: np.random.Generator,
    iteration: int = 0,
    noise_rng: np.random.Generator | None = None,
) -> GradientEstimate:
    """Mean of t_k single-direction estimates; directions are rows 0..t-1 drawn from rng."""
    t = cfg.samples_at(iteration)
    U = cfg.metric.sample(rng, t)
    estimates, evals = sample_estimates(
        f, z, U, cfg, iteration, noise_rng if noise_rng is not None else rng
    )
    return GradientEstimate(estimates.mean(axis=0), t, evals)


def _chunks(total: int):
    done = 0
    while done < total:
        size = min(CHUNK, total - done)
        yield size
        done += size


def estimate_f_mu(
    f: ObjectiveLike,
    z: PointLike,
    mu: float,
    M: int,
    rng: np.random.Generator,
    metric: MetricMatrix | None = None,
) -> tuple[float, float]:
    """Monte-Carlo mean and standard error of f(z + mu u), u ~ N(0, B^-1)."""
    if M < 2:
        raise ValueError("M must be at least 2")
    metric = metric or _default_metric(f, z)
    problem = as_problem(f, metric)
    zv = as_vector(z, problem.dims)
    total, total_sq = 0.0, 0.0
    for size in _chunks(M):
        values = problem.evaluate_batch(zv + mu * metric.sample(rng, size))
        total += values.sum()
        total_sq += (values**2).sum()
    mean = total / M
    variance = max(total_sq / M - mean**2, 0.0) * M / (M - 1)
    return float(mean), float(np.sqrt(variance / M))


def estimate_F_mu(
    f: ObjectiveLike,
    z: PointLike,
    mu: float,
    M: int,
    rng: np.random.Generator,
    metric: MetricMatrix | None = None,
) -> OperatorEstimate:
    """Monte-Carlo mean of forward-oracle estimates, with per-coordinate standard errors."""
    if M < 2:
        raise ValueError("M must be at least 2")
    metric = metric or _default_metric(f, z)
    problem = as_problem(f, metric)
    zv = as_vector(z, problem.dims)
    base = problem.evaluate(zv)
    total = np.zeros(problem.d)
    total_sq = np.zeros(problem.d)
    for size in _chunks(M):
        U = metric.sample(rng, size)
        q = (problem.evaluate_batch(zv + mu * U) - base) / mu
        estimates = block_estimates(q, U, metric)
        total += estimates.sum(axis=0)
        total_sq += (estimates**2).sum(axis=0)
    mean = total / M
    variance = np.maximum(total_sq / M - mean**2, 0.0) * M / (M - 1)
    return OperatorEstimate(mean, np.sqrt(variance / M), M + 1)


def estimate_oracle_variance(
    f: ObjectiveLike,
    z: PointLike,
    cfg: OracleConfig,
    M: int,
    rng: np.random.Generator,
) -> float:
    """Empirical E ||G - mean(G)||_*^2 over M averaged-oracle calls at z."""
    if M < 10:
        raise ValueError("M must be at least 10")
    problem = as_problem(f, cfg.metric)
    zv = as_vector(z, problem.dims)
    t = cfg.samples_at(0)
    per_chunk = max(1, CHUNK // t)
    calls = []
    done = 0
    while done < M:
        reps = min(per_chunk, M - done)
        U = cfg.metric.sample(rng, reps * t)
        estimates, _ = sample_estimates(problem, zv, U, cfg, noise_rng=rng)
        calls.append(estimates.reshape(reps, t, -1).mean(axis=1))
        done += reps
    G = np.concatenate(calls)
    centered = G - G.mean(axis=0)
    dual_sq = np.einsum("ki,ki->k", centered, cfg.metric.apply_inverse(centered))
    return float(dual_sq.mean())


def _default_metric(f: ObjectiveLike, z: PointLike) -> MetricMatrix:
    if isinstance(f, MinMaxProblem):
        return f.metadata.metric or MetricMatrix.identity(f.n, f.m)
    raise ConfigurationError("a metric is needed when f is a plain function")


class ZerothOrderEstimator:
    """Averaged oracle bound to a problem, a configuration and the run's random streams."""

    def __init__(self, problem: MinMaxProblem, cfg: OracleConfig, streams: RandomStreams) -> None:
        self.problem = as_problem(problem, cfg.metric)
        self.cfg = cfg
        self.streams = streams

    def __call__(self, z: NDArray, k: int, call: int) -> GradientEstimate:
        t = self.cfg.samples_at(k)
        U = self.cfg.metric.sample(self.streams.generator(k, call), t)
        noise_rng = None
        if not self.cfg.noise.is_noiseless:
            noise_rng = self.streams.generator(k, NOISE_EXTRAPOLATION + call)
        estimates, evals = sample_estimates(self.problem, z, U, self.cfg, k, noise_rng)
        return GradientEstimate(estimates.mean(axis=0), t, evals)

    def estimate_at(self, z: NDArray, k: int, samples: int) -> tuple[NDArray, int]:
        """Cheap F_mu estimate for trace diagnostics, on its own sub-streams."""
        U = self.cfg.metric.sample(self.streams.generator(k, DIAGNOSTIC_DIRECTIONS), samples)
        noise_rng = self.streams.generator(k, DIAGNOSTIC_NOISE)
        estimates, evals = sample_estimates(self.problem, z, U, self.cfg, k, noise_rng)
        return estimates.mean(axis=0), evals


class AnalyticEstimator:
    """Exact operator F in place of the zeroth-order estimate."""

    def __init__(self, problem: MinMaxProblem) -> None:
        if not problem.has_gradient:
            raise MissingGradientError(f"{problem.name} has no analytic gradient")
        self.problem = problem

    def __call__(self, z: NDArray, k: int, call: int) -> GradientEstimate:
        return GradientEstimate(self.problem.operator(z), 0, 1)
