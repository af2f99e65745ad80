"""Stationarity measures: gradient mappings, projected residuals and Goldstein certificates."""

from __future__ import annotations

import logging
import math
from typing import NamedTuple

import numpy as np
from numpy.typing import NDArray
from scipy import optimize

from zomax.errors import ConfigurationError
from zomax.geometry import MetricMatrix, PointLike, as_vector, dual_norm
from zomax.oracles import estimate_F_mu
from zomax.problems.base import MinMaxProblem
from zomax.schemas import GoldsteinCertificate, StationarityReport

logger = logging.getLogger(__name__)


def _check_steps(*steps: float) -> None:
    for h in steps:
        if not h > 0:
            raise ConfigurationError(f"step sizes must be positive, got {h}")


def gradient_mapping_tau(
    problem: MinMaxProblem, z: PointLike, h1: float, h2: float, F_value: NDArray
) -> NDArray:
    """(z - P(z - h F)) / h with h1 on the x block and h2 on the y block."""
    _check_steps(h1, h2)
    F_value = np.asarray(F_value, dtype=float)
    if problem.feasible_set.is_unconstrained:
        return F_value.copy()
    zv = as_vector(z, problem.dims)
    steps = np.concatenate([np.full(problem.n, h1), np.full(problem.m, h2)])
    return (zv - problem.feasible_set.project(zv - steps * F_value)) / steps


def projected_residual_P(problem: MinMaxProblem, z: PointLike, h: float, g: NDArray) -> NDArray:
    _check_steps(h)
    g = np.asarray(g, dtype=float)
    if problem.feasible_set.is_unconstrained:
        return g.copy()
    zv = as_vector(z, problem.dims)
    return (zv - problem.feasible_set.project(zv - h * g)) / h


def stationarity_report(
    problem: MinMaxProblem,
    z: PointLike,
    h1: float,
    h2: float,
    F_value: NDArray | None = None,
    metric: MetricMatrix | None = None,
    evals_spent: int = 0,
) -> StationarityReport:
    """|F(z)| and, on constrained problems, the dual norm of the gradient mapping."""
    if F_value is None:
        F_value = problem.operator(z)
    metric = metric or MetricMatrix.identity(problem.n, problem.m)
    mapping_norm = None
    if problem.is_constrained:
        mapping_norm = dual_norm(gradient_mapping_tau(problem, z, h1, h2, F_value), metric)
    return StationarityReport(
        grad_norm=float(np.linalg.norm(F_value)),
        mapping_norm=mapping_norm,
        evals_spent=evals_spent,
    )


def goldstein_mu(delta: float, epsilon: float, L0: float, d: int) -> float:
    """Largest smoothing radius for which the smoothed gradient lies in the
    delta-Goldstein subdifferential up to epsilon/2."""
    if not 0 < delta < 1:
        raise ConfigurationError(f"delta must lie in (0, 1), got {delta}")
    if not epsilon > 0 or not L0 > 0 or d < 1:
        raise ConfigurationError("epsilon, L0 and d must be positive")
    return delta / math.sqrt(d * math.pi * math.e) * (epsilon / (8.0 * L0)) ** (1.0 / d)


def goldstein_surrogate(
    problem: MinMaxProblem,
    z: PointLike,
    delta: float,
    epsilon_target: float,
    L0: float,
    M: int,
    rng: np.random.Generator,
    metric: MetricMatrix | None = None,
) -> StationarityReport:
    """Certified upper bound on dist(0, delta-Goldstein subdifferential of f at z).

    Uses gamma = epsilon/2 and the smoothing radius from `goldstein_mu`; the bound is the
    Monte-Carlo estimate of |grad f_mu(z)| plus gamma plus three standard errors.
    """
    if metric is not None and not metric.is_identity:
        raise ConfigurationError("the Goldstein surrogate is only valid for B = I")
    zv = as_vector(z, problem.dims)
    box = problem.metadata.lipschitz_box
    if box is not None and (np.any(zv < box[0]) or np.any(zv > box[1])):
        logger.warning("%s: point lies outside the box on which L0 was derived", problem.name)
    gamma = epsilon_target / 2.0
    mu = goldstein_mu(delta, epsilon_target, L0, problem.d)
    estimate = estimate_F_mu(
        problem, zv, mu, M, rng, metric=MetricMatrix.identity(problem.n, problem.m)
    )
    norm = float(np.linalg.norm(estimate.value))
    std_error = float(np.linalg.norm(estimate.std_error))
    certificate = GoldsteinCertificate(
        delta=delta,
        gamma=gamma,
        mu=mu,
        estimate=norm,
        std_error=std_error,
        bound=norm + gamma + 3.0 * std_error,
    )
    return StationarityReport(
        grad_norm=norm, goldstein=certificate, evals_spent=estimate.function_evals
    )


class HullEstimate(NamedTuple):
    value: float
    weights: NDArray
    function_evals: int


def _sample_ball(rng: np.random.Generator, center: NDArray, radius: float, count: int) -> NDArray:
    d = center.size
    directions = rng.standard_normal((count, d))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = radius * rng.random(count) ** (1.0 / d)
    return center + radii[:, None] * directions


def _central_gradients(problem: MinMaxProblem, points: NDArray, step: float) -> NDArray:
    d = problem.d
    offsets = step * np.eye(d)
    plus = points[:, None, :] + offsets[None, :, :]
    minus = points[:, None, :] - offsets[None, :, :]
    values_plus = problem.evaluate_batch(plus.reshape(-1, d)).reshape(len(points), d)
    values_minus = problem.evaluate_batch(minus.reshape(-1, d)).reshape(len(points), d)
    grads = (values_plus - values_minus) / (2.0 * step)
    grads[:, problem.n :] *= -1.0
    return grads


def goldstein_hull_estimate(
    problem: MinMaxProblem,
    z: PointLike,
    delta: float,
    samples: int,
    rng: np.random.Generator,
    fd_step: float = 1e-7,
) -> HullEstimate:
    """Minimum-norm element of the convex hull of operator values sampled in the delta-ball.

    Heuristic only: sampled gradients approximate the Goldstein subdifferential from inside,
    so the value is not a certified bound. Gradients come from the analytic operator when
    available and from central differences otherwise.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    if not delta > 0:
        raise ConfigurationError(f"delta must be positive, got {delta}")
    zv = as_vector(z, problem.dims)
    points = _sample_ball(rng, zv, delta, samples)
    if problem.has_gradient:
        grads = np.array([problem.operator(p) for p in points])
        evals = 0
    else:
        grads = _central_gradients(problem, points, fd_step)
        evals = 2 * problem.d * samples
    # min |G^T w| s.t. w >= 0, sum w = 1, with the simplex row weighted heavily
    weight = 1e3 * max(1.0, float(np.max(np.abs(grads))))
    A = np.vstack([grads.T, weight * np.ones(samples)])
    b = np.concatenate([np.zeros(problem.d), [weight]])
    w, _ = optimize.nnls(A, b)
    w /= w.sum()
    return HullEstimate(float(np.linalg.norm(grads.T @ w)), w, evals)
