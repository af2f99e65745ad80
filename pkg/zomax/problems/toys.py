"""Two-variable benchmark objectives and small analytic examples."""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray
from scipy.special import expit
from scipy.stats import norm

from zomax.geometry import MetricMatrix
from zomax.problems.base import (
    Box,
    MinMaxProblem,
    NonnegativeOrthant,
    ProblemMetadata,
    Unconstrained,
)


def toy_f1() -> MinMaxProblem:
    """2x^2 - 2y^2 + 4xy + 10 sin(xy), unconstrained."""

    def objective(Z: NDArray) -> NDArray:
        x, y = Z[:, 0], Z[:, 1]
        return 2 * x**2 - 2 * y**2 + 4 * x * y + 10 * np.sin(x * y)

    def gradient(z: NDArray) -> NDArray:
        x, y = z
        grad_x = 4 * x + 4 * y + 10 * y * np.cos(x * y)
        grad_y = -4 * y + 4 * x + 10 * x * np.cos(x * y)
        return np.array([grad_x, -grad_y])

    return MinMaxProblem(
        name="toy_f1",
        n=1,
        m=1,
        objective=objective,
        gradient=gradient,
        feasible_set=Unconstrained(2),
        metadata=ProblemMetadata(z_star=np.zeros(2)),
        initial_point=np.array([5.0, -7.0]),
    )


def toy_f2() -> MinMaxProblem:
    """log(1 + e^x) + 3xy - log(1 + e^y) on |x| <= 3, |y| <= 2."""

    def objective(Z: NDArray) -> NDArray:
        x, y = Z[:, 0], Z[:, 1]
        return np.logaddexp(0.0, x) + 3 * x * y - np.logaddexp(0.0, y)

    def gradient(z: NDArray) -> NDArray:
        x, y = z
        return np.array([expit(x) + 3 * y, -(3 * x - expit(y))])

    return MinMaxProblem(
        name="toy_f2",
        n=1,
        m=1,
        objective=objective,
        gradient=gradient,
        feasible_set=Box(np.array([-3.0, -2.0]), np.array([3.0, 2.0])),
        initial_point=np.array([5.0, -7.0]),
    )


def toy_f3(lipschitz_bound: float = 10.0) -> MinMaxProblem:
    """|x^3 - 1| - |y^3 + 1|; nonsmooth, L0 valid on the square |x|, |y| <= lipschitz_bound."""

    def objective(Z: NDArray) -> NDArray:
        x, y = Z[:, 0], Z[:, 1]
        return np.abs(x**3 - 1) - np.abs(y**3 + 1)

    # |grad| <= 3 sqrt(x^4 + y^4) is largest at the corners of the square
    L0 = 3.0 * np.sqrt(2.0) * lipschitz_bound**2
    return MinMaxProblem(
        name="toy_f3",
        n=1,
        m=1,
        objective=objective,
        feasible_set=Unconstrained(2),
        metadata=ProblemMetadata(
            L0=L0,
            z_star=np.array([1.0, -1.0]),
            lipschitz_box=(np.full(2, -lipschitz_bound), np.full(2, lipschitz_bound)),
            nonsmooth=True,
        ),
        initial_point=np.array([7.0, -1.0]),
    )


def bilinear_problem(orthant: bool = False) -> MinMaxProblem:
    """f = xy, optionally on the nonnegative orthant."""

    def objective(Z: NDArray) -> NDArray:
        return Z[:, 0] * Z[:, 1]

    def gradient(z: NDArray) -> NDArray:
        x, y = z
        return np.array([y, -x])

    return MinMaxProblem(
        name="bilinear_orthant" if orthant else "bilinear",
        n=1,
        m=1,
        objective=objective,
        gradient=gradient,
        feasible_set=NonnegativeOrthant(2) if orthant else Unconstrained(2),
        metadata=ProblemMetadata(L0=None, L1=1.0, rho=0.0, z_star=np.zeros(2)),
        initial_point=np.ones(2),
    )


def linear_problem() -> MinMaxProblem:
    """f = x - y, whose operator is the constant (1, 1)."""

    def objective(Z: NDArray) -> NDArray:
        return Z[:, 0] - Z[:, 1]

    return MinMaxProblem(
        name="linear",
        n=1,
        m=1,
        objective=objective,
        gradient=lambda z: np.array([1.0, 1.0]),
        feasible_set=Unconstrained(2),
        metadata=ProblemMetadata(L0=np.sqrt(2.0), L1=0.0),
    )


def quadratic_problem(H: NDArray, c: NDArray | None = None, n: int | None = None) -> MinMaxProblem:
    """f = z^T H z / 2 + c^T z split into blocks of size n and d - n."""
    H = np.asarray(H, dtype=float)
    d = H.shape[0]
    n = d // 2 if n is None else n
    c = np.zeros(d) if c is None else np.asarray(c, dtype=float)
    sign = np.concatenate([np.ones(n), -np.ones(d - n)])

    def objective(Z: NDArray) -> NDArray:
        return 0.5 * np.einsum("ki,ij,kj->k", Z, H, Z) + Z @ c

    def gradient(z: NDArray) -> NDArray:
        return sign * (H @ z + c)

    return MinMaxProblem(
        name="quadratic",
        n=n,
        m=d - n,
        objective=objective,
        gradient=gradient,
        feasible_set=Unconstrained(d),
        metadata=ProblemMetadata(L1=float(np.abs(np.linalg.eigvalsh(H)).max())),
    )


def abs_diff_smoothed_operator(z: NDArray, mu: float, sigma: float = 1.0) -> NDArray:
    """Exact F_mu of |x| - |y| under u ~ N(0, sigma^2 I)."""
    x, y = np.asarray(z, dtype=float)
    scale = mu * sigma
    grad_x = 1.0 - 2.0 * norm.cdf(-x / scale)
    grad_y = -1.0 + 2.0 * norm.cdf(-y / scale)
    return np.array([grad_x, -grad_y])


def abs_diff_smoothed_value(z: NDArray, mu: float, sigma: float = 1.0) -> float:
    """Exact f_mu of |x| - |y| (folded-normal means)."""
    x, y = np.asarray(z, dtype=float)
    s = mu * sigma
    bumps = np.exp(-(x**2) / (2 * s**2)) - np.exp(-(y**2) / (2 * s**2))
    folded = s * np.sqrt(2.0 / np.pi) * bumps
    return float(folded + x - y - 2 * x * norm.cdf(-x / s) + 2 * y * norm.cdf(-y / s))


def abs_diff_problem(sigma: float = 1.0) -> MinMaxProblem:
    """|x| - |y| with its closed-form smoothed operator; sampling metric is sigma^-2 I."""

    def objective(Z: NDArray) -> NDArray:
        return np.abs(Z[:, 0]) - np.abs(Z[:, 1])

    return MinMaxProblem(
        name="abs_diff",
        n=1,
        m=1,
        objective=objective,
        feasible_set=Unconstrained(2),
        metadata=ProblemMetadata(
            L0=np.sqrt(2.0) * sigma,
            rho=0.0,
            z_star=np.zeros(2),
            metric=MetricMatrix.scaled_identity(1.0 / sigma**2, 1, 1),
            nonsmooth=True,
        ),
        initial_point=np.array([1.0, -1.0]),
        smoothed_operator=lambda z, mu: abs_diff_smoothed_operator(z, mu, sigma),
    )
