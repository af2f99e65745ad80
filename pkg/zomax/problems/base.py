"""Feasible sets, Euclidean projection and the min-max problem container."""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from zomax.errors import (
    ConfigurationError,
    DimensionMismatchError,
    EvaluationError,
    MissingGradientError,
)
from zomax.geometry import JointPoint, MetricMatrix, PointLike, as_vector

logger = logging.getLogger(__name__)


class FeasibleSet:
    """Closed convex set acting on the last axis of its input."""

    size: int

    def project(self, v: NDArray) -> NDArray:
        raise NotImplementedError

    def constrained_mask(self) -> NDArray:
        """Per-coordinate flag: True where the set restricts that coordinate."""
        return np.ones(self.size, dtype=bool)

    @property
    def diameter(self) -> float:
        return float("inf")

    @property
    def is_unconstrained(self) -> bool:
        return not self.constrained_mask().any()

    def contains(self, v: ArrayLike, tol: float = 1e-12) -> bool:
        v = np.asarray(v, dtype=float)
        gap = np.linalg.norm(self.project(v) - v, axis=-1)
        return bool(np.all(gap <= tol * np.maximum(1.0, np.linalg.norm(v, axis=-1))))


@dataclass(frozen=True)
class Unconstrained(FeasibleSet):
    size: int

    def project(self, v: NDArray) -> NDArray:
        return np.array(v, dtype=float)

    def constrained_mask(self) -> NDArray:
        return np.zeros(self.size, dtype=bool)


@dataclass(frozen=True)
class Box(FeasibleSet):
    lower: NDArray
    upper: NDArray
    size: int = field(init=False)

    def __post_init__(self) -> None:
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lower.shape != upper.shape:
            raise DimensionMismatchError("box bounds differ in length")
        if np.any(lower > upper):
            raise ConfigurationError("box lower bound exceeds upper bound")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "size", lower.size)

    @classmethod
    def symmetric(cls, bound: float, size: int) -> Box:
        return cls(np.full(size, -bound), np.full(size, bound))

    def project(self, v: NDArray) -> NDArray:
        return np.clip(v, self.lower, self.upper)

    def constrained_mask(self) -> NDArray:
        return np.isfinite(self.lower) | np.isfinite(self.upper)

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))


@dataclass(frozen=True)
class Ball(FeasibleSet):
    center: NDArray
    radius: float
    size: int = field(init=False)

    def __post_init__(self) -> None:
        center = np.atleast_1d(np.asarray(self.center, dtype=float))
        if not self.radius > 0:
            raise ConfigurationError(f"ball radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "size", center.size)

    def project(self, v: NDArray) -> NDArray:
        offset = np.asarray(v, dtype=float) - self.center
        norm = np.linalg.norm(offset, axis=-1, keepdims=True)
        scale = np.where(norm > self.radius, self.radius / np.maximum(norm, 1e-300), 1.0)
        return self.center + offset * scale

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius


@dataclass(frozen=True)
class NonnegativeOrthant(FeasibleSet):
    size: int

    def project(self, v: NDArray) -> NDArray:
        return np.maximum(v, 0.0)


@dataclass(frozen=True)
class Product(FeasibleSet):
    """Cartesian product; parts occupy consecutive coordinates in order."""

    parts: tuple[FeasibleSet, ...]
    size: int = field(init=False)

    def __post_init__(self) -> None:
        if not self.parts:
            raise ConfigurationError("product set needs at least one part")
        object.__setattr__(self, "parts", tuple(self.parts))
        object.__setattr__(self, "size", sum(p.size for p in self.parts))

    def project(self, v: NDArray) -> NDArray:
        v = np.asarray(v, dtype=float)
        out, start = [], 0
        for part in self.parts:
            out.append(part.project(v[..., start : start + part.size]))
            start += part.size
        return np.concatenate(out, axis=-1)

    def constrained_mask(self) -> NDArray:
        return np.concatenate([p.constrained_mask() for p in self.parts])

    @property
    def diameter(self) -> float:
        return float(np.sqrt(sum(p.diameter**2 for p in self.parts)))


def ball_on_block(block: str, n: int, m: int, radius: float, center=None) -> Product:
    """Ball constraint on one block, the other block left free."""
    if block == "x":
        return Product((Ball(np.zeros(n) if center is None else center, radius), Unconstrained(m)))
    if block == "y":
        return Product((Unconstrained(n), Ball(np.zeros(m) if center is None else center, radius)))
    raise ConfigurationError(f"block must be 'x' or 'y', got {block!r}")


def check_projection_metric(feasible_set: FeasibleSet, B: MetricMatrix) -> None:
    mask = feasible_set.constrained_mask()
    n = B.dims[0]
    for index, block_mask in enumerate((mask[:n], mask[n:])):
        if block_mask.any() and not B.block_is_scaled_identity(index):
            raise ConfigurationError(
                "projection needs a scalar multiple of the identity on every constrained block"
            )


def project(
    feasible_set: FeasibleSet, z: PointLike, B: MetricMatrix, *, euclidean: bool = False
) -> NDArray:
    """Projection onto the set in the B-norm, which is Euclidean for the supported metrics.

    With ``euclidean=True`` the metric check is skipped and the Euclidean projection is used
    whatever B is.
    """
    v = z.vector if isinstance(z, JointPoint) else np.asarray(z, dtype=float)
    if v.shape[-1] != feasible_set.size:
        raise DimensionMismatchError(f"point has length {v.shape[-1]}, set has {feasible_set.size}")
    if feasible_set.is_unconstrained:
        return np.array(v, dtype=float)
    if not euclidean:
        check_projection_metric(feasible_set, B)
    return feasible_set.project(v)


@dataclass(frozen=True)
class ProblemMetadata:
    L0: float | None = None
    L1: float | None = None
    rho: float | None = None
    z_star: NDArray | None = None
    # compact region on which L0 is valid, as (lower, upper)
    lipschitz_box: tuple[NDArray, NDArray] | None = None
    metric: MetricMatrix | None = None
    nonsmooth: bool = False


Objective = Callable[[NDArray], NDArray]


@dataclass(frozen=True)
class MinMaxProblem:
    """min over x, max over y of f(x, y).

    ``objective`` is vectorized: it maps a (k, d) array of stacked points to k values.
    ``gradient`` maps one point to F(z) = [grad_x f; -grad_y f].
    """

    name: str
    n: int
    m: int
    objective: Objective
    feasible_set: FeasibleSet
    gradient: Callable[[NDArray], NDArray] | None = None
    metadata: ProblemMetadata = field(default_factory=ProblemMetadata)
    initial_point: NDArray | None = None
    components: Callable[[NDArray], dict[str, float]] | None = None
    smoothed_operator: Callable[[NDArray, float], NDArray] | None = None

    def __post_init__(self) -> None:
        if self.feasible_set.size != self.n + self.m:
            raise DimensionMismatchError(
                f"feasible set has size {self.feasible_set.size}, problem has d={self.n + self.m}"
            )

    @classmethod
    def from_scalar(
        cls, name: str, n: int, m: int, f: Callable[[NDArray], float], **kwargs
    ) -> MinMaxProblem:
        """Wrap a function of one point."""

        def objective(Z: NDArray) -> NDArray:
            return np.array([f(row) for row in np.atleast_2d(Z)], dtype=float)

        kwargs.setdefault("feasible_set", Unconstrained(n + m))
        return cls(name=name, n=n, m=m, objective=objective, **kwargs)

    @property
    def dims(self) -> tuple[int, int]:
        return self.n, self.m

    @property
    def d(self) -> int:
        return self.n + self.m

    @property
    def has_gradient(self) -> bool:
        return self.gradient is not None

    @property
    def analytic_gradient(self):
        return self.gradient

    @property
    def is_constrained(self) -> bool:
        return not self.feasible_set.is_unconstrained

    def evaluate_batch(self, Z: NDArray) -> NDArray:
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        if Z.shape[1] != self.d:
            raise DimensionMismatchError(f"points have length {Z.shape[1]}, expected {self.d}")
        values = np.asarray(self.objective(Z), dtype=float).reshape(len(Z))
        bad = ~np.isfinite(values)
        if bad.any():
            index = int(np.argmax(bad))
            raise EvaluationError(
                f"{self.name}: non-finite objective value {values[index]}", point=Z[index].copy()
            )
        return values

    def evaluate(self, z: PointLike) -> float:
        return float(self.evaluate_batch(as_vector(z, self.dims)[None, :])[0])

    def operator(self, z: PointLike) -> NDArray:
        if self.gradient is None:
            raise MissingGradientError(f"{self.name} has no analytic gradient")
        return np.asarray(self.gradient(as_vector(z, self.dims)), dtype=float)

    def contains(self, z: PointLike, tol: float = 1e-12) -> bool:
        return self.feasible_set.contains(as_vector(z, self.dims), tol)

    def start(self) -> NDArray:
        if self.initial_point is None:
            return np.zeros(self.d)
        return np.array(self.initial_point, dtype=float)

    def split(self, z: NDArray) -> JointPoint:
        return JointPoint.from_vector(z, self.n)
