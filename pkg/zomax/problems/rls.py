"""Robust least squares: min over x, max over |delta| <= rho of |Ax - y0 + delta|^2."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from zomax.errors import ConfigurationError, DimensionMismatchError
from zomax.problems.base import MinMaxProblem, ProblemMetadata, ball_on_block


def rls_problem(
    A: NDArray, y0: NDArray, rho_ball: float, initial_point: NDArray | None = None
) -> MinMaxProblem:
    """A has shape (rows, cols); x lives in R^cols and delta in R^rows."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    y0 = np.asarray(y0, dtype=float).ravel()
    rows, cols = A.shape
    if y0.size != rows:
        raise DimensionMismatchError(f"y0 has length {y0.size}, A has {rows} rows")
    if not rho_ball > 0:
        raise ConfigurationError(f"rho_ball must be positive, got {rho_ball}")

    def residual(Z: NDArray) -> NDArray:
        return Z[:, :cols] @ A.T - y0 + Z[:, cols:]

    def objective(Z: NDArray) -> NDArray:
        r = residual(Z)
        return np.einsum("ki,ki->k", r, r)

    def gradient(z: NDArray) -> NDArray:
        r = residual(z[None, :])[0]
        return np.concatenate([2.0 * A.T @ r, -2.0 * r])

    stacked = np.hstack([A, np.eye(rows)])
    L1 = 2.0 * float(np.linalg.norm(stacked, 2)) ** 2
    return MinMaxProblem(
        name="rls",
        n=cols,
        m=rows,
        objective=objective,
        gradient=gradient,
        feasible_set=ball_on_block("y", cols, rows, rho_ball),
        metadata=ProblemMetadata(L1=L1),
        initial_point=initial_point,
    )


def random_rls_instance(n: int, m: int, seed: int) -> tuple[NDArray, NDArray, NDArray]:
    """A (n x m), y0 and a starting x, all standard normal."""
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, m))
    y0 = rng.standard_normal(n)
    x0 = rng.standard_normal(m)
    return A, y0, x0


def random_rls_problem(n: int, m: int, rho_ball: float, seed: int) -> MinMaxProblem:
    A, y0, x0 = random_rls_instance(n, m, seed)
    return rls_problem(A, y0, rho_ball, initial_point=np.concatenate([x0, np.zeros(n)]))


def save_rls_instance(path: Path | str, A: NDArray, y0: NDArray) -> Path:
    path = Path(path)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    header = ",".join([f"a_{j}" for j in range(A.shape[1])] + ["y0"])
    data = np.column_stack([A, np.asarray(y0, dtype=float)])
    np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.17g")
    return path


def load_rls_instance(path: Path | str) -> tuple[NDArray, NDArray]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"RLS instance not found: {path}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, :-1], data[:, -1]
