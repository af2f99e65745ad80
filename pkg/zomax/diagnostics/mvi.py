"""Empirical checks of the weak and proximal Minty conditions.

Both samplers only look for violations; a clean report is evidence, not a proof.
"""

from __future__ import annotations

import csv
import logging
from collections.abc import Callable
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg

from zomax.config import get_settings
from zomax.errors import ConfigurationError
from zomax.geometry import MetricMatrix, PointLike, as_vector
from zomax.oracles import estimate_F_mu
from zomax.problems.base import MinMaxProblem
from zomax.schemas import HistogramBin, MviReport

logger = logging.getLogger(__name__)

VIOLATION_TOL = 1e-12

Operator = Callable[[NDArray], NDArray]


def default_operator(
    problem: MinMaxProblem,
    rng: np.random.Generator,
    mu: float = 1e-4,
    estimate_samples: int = 64,
) -> Operator:
    """Analytic F when the problem has one, otherwise a Monte-Carlo estimate of F_mu."""
    if problem.has_gradient:
        return problem.operator
    logger.info(
        "%s: estimating F_mu with %d samples per point (mu=%g)", problem.name, estimate_samples, mu
    )
    metric = problem.metadata.metric or MetricMatrix.identity(problem.n, problem.m)

    def estimated(z: NDArray) -> NDArray:
        return estimate_F_mu(problem, z, mu, estimate_samples, rng, metric).value

    return estimated


def _dual_sq(rows: NDArray, metric: MetricMatrix | None) -> NDArray:
    if metric is None:
        return np.einsum("ki,ki->k", rows, rows)
    return np.einsum("ki,ki->k", rows, metric.apply_inverse(rows))


def _report(values: NDArray, rho: float, bins: int | None) -> MviReport:
    bins = bins or get_settings().mvi_histogram_bins
    counts, edges = np.histogram(values, bins=bins)
    histogram = [
        HistogramBin(left=float(edges[i]), right=float(edges[i + 1]), count=int(counts[i]))
        for i in range(len(counts))
    ]
    return MviReport(
        samples=len(values),
        min_value=float(values.min()),
        violating_fraction=float(np.mean(values < -VIOLATION_TOL)),
        rho_used=rho,
        histogram=histogram,
    )


def _gaussian_draws(
    rng: np.random.Generator, center: NDArray, cov: ArrayLike, count: int
) -> NDArray:
    cov = np.asarray(cov, dtype=float)
    standard = rng.standard_normal((count, center.size))
    if cov.ndim <= 1:
        return center + np.sqrt(cov) * standard
    factor = linalg.cholesky(cov, lower=True)
    return center + standard @ factor.T


def _check_count(count: int) -> None:
    if count < 1:
        raise ValueError(f"count must be at least 1, got {count}")


def prox_mvi_sampler(
    problem: MinMaxProblem,
    z_candidate: PointLike,
    h: float,
    count: int,
    sampling_cov: ArrayLike,
    rng: np.random.Generator,
    operator: Operator | None = None,
    rho: float = 0.0,
    metric: MetricMatrix | None = None,
    bins: int | None = None,
) -> MviReport:
    """Sample <Q(z, h, F(z_bar)), z_bar - z_c> + rho/2 |Q|_*^2 over independent pairs.

    Q(z, h, g) = (z - P(z - h g)) / h. Both z and z_bar are drawn from N(z_c, cov) and
    projected onto the feasible set; z is drawn first.
    """
    _check_count(count)
    if not h > 0:
        raise ConfigurationError(f"h must be positive, got {h}")
    center = as_vector(z_candidate, problem.dims)
    operator = operator or default_operator(problem, rng)
    project = problem.feasible_set.project
    Z = project(_gaussian_draws(rng, center, sampling_cov, count))
    Z_bar = project(_gaussian_draws(rng, center, sampling_cov, count))
    F_bar = np.array([operator(row) for row in Z_bar])
    Q = (Z - project(Z - h * F_bar)) / h
    values = np.einsum("ki,ki->k", Q, Z_bar - center)
    if rho > 0:
        values = values + 0.5 * rho * _dual_sq(Q, metric)
    report = _report(values, rho, bins)
    logger.info(
        "%s: proximal MVI check over %d pairs, min %.3e, violating %.4f",
        problem.name,
        count,
        report.min_value,
        report.violating_fraction,
    )
    return report


def weak_mvi_sampler(
    problem: MinMaxProblem,
    z_star: PointLike,
    rho: float,
    count: int,
    box: tuple[ArrayLike, ArrayLike],
    rng: np.random.Generator,
    operator: Operator | None = None,
    metric: MetricMatrix | None = None,
    bins: int | None = None,
) -> MviReport:
    """Sample <F(z), z - z*> + rho/2 |F(z)|_*^2 with z uniform in the box (lower, upper)."""
    _check_count(count)
    if rho < 0:
        raise ConfigurationError(f"rho must be nonnegative, got {rho}")
    center = as_vector(z_star, problem.dims)
    lower = np.broadcast_to(np.asarray(box[0], dtype=float), center.shape)
    upper = np.broadcast_to(np.asarray(box[1], dtype=float), center.shape)
    operator = operator or default_operator(problem, rng)
    Z = lower + (upper - lower) * rng.random((count, center.size))
    F = np.array([operator(row) for row in Z])
    values = np.einsum("ki,ki->k", F, Z - center) + 0.5 * rho * _dual_sq(F, metric)
    return _report(values, rho, bins)


def write_histogram_csv(report: MviReport, path: Path | str) -> Path:
    path = Path(path)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["bin_left", "bin_right", "count"])
        for b in report.histogram:
            writer.writerow([repr(b.left), repr(b.right), b.count])
    return path
