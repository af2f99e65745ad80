"""B-weighted norms and Gaussian sampling from N(0, B^-1).

The metric B = diag(B1, B2) is kept in block form. Points are handled as flat float
vectors of length d = n + m internally; `JointPoint` is the typed wrapper used at the
public surface.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg

from zomax.errors import ConfigurationError, DimensionMismatchError

logger = logging.getLogger(__name__)

PD_TOLERANCE = 1e-12

# call indices of the stream-splitting rule
DIRECTIONS_EXTRAPOLATION = 0
DIRECTIONS_UPDATE = 1
NOISE_EXTRAPOLATION = 2
NOISE_UPDATE = 3
DIAGNOSTIC_DIRECTIONS = 4
DIAGNOSTIC_NOISE = 5


def _readonly(a: NDArray) -> NDArray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class JointPoint:
    """z = (x, y) with x in R^n minimized over and y in R^m maximized over."""

    x: NDArray
    y: NDArray

    def __post_init__(self) -> None:
        x = _readonly(np.atleast_1d(np.asarray(self.x, dtype=float)).ravel())
        y = _readonly(np.atleast_1d(np.asarray(self.y, dtype=float)).ravel())
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("JointPoint entries must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def dims(self) -> tuple[int, int]:
        return self.x.size, self.y.size

    @property
    def vector(self) -> NDArray:
        return np.concatenate([self.x, self.y])

    @classmethod
    def from_vector(cls, v: ArrayLike, n: int) -> JointPoint:
        v = np.asarray(v, dtype=float).ravel()
        return cls(v[:n], v[n:])


PointLike = Union[JointPoint, ArrayLike]


def as_vector(z: PointLike, dims: tuple[int, int] | None = None) -> NDArray:
    """Flatten a JointPoint or array into a float vector, checking its length."""
    v = z.vector if isinstance(z, JointPoint) else np.asarray(z, dtype=float).ravel()
    if isinstance(z, JointPoint) and dims is not None and z.dims != tuple(dims):
        raise DimensionMismatchError(f"point has block sizes {z.dims}, expected {tuple(dims)}")
    if dims is not None and v.size != sum(dims):
        raise DimensionMismatchError(f"point has length {v.size}, expected {sum(dims)}")
    return v


def _check_block(b: NDArray, name: str) -> NDArray:
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if b.ndim != 2 or b.shape[0] != b.shape[1] or b.shape[0] == 0:
        raise ConfigurationError(f"{name} must be a non-empty square matrix, got {b.shape}")
    if not np.all(np.isfinite(b)):
        raise ConfigurationError(f"{name} has non-finite entries")
    if not np.allclose(b, b.T, rtol=1e-12, atol=1e-12 * np.abs(b).max()):
        raise ConfigurationError(f"{name} is not symmetric")
    return b


def _diagonal_of(b: NDArray) -> NDArray | None:
    if np.count_nonzero(b - np.diag(np.diag(b))) == 0:
        return np.diag(b).copy()
    return None


@dataclass(frozen=True)
class MetricMatrix:
    """Block SPD metric B = diag(b1, b2) with eigen-statistics and sampling factors."""

    b1: NDArray
    b2: NDArray
    lambda_min: float = field(init=False)
    lambda_max: float = field(init=False)
    kappa: float = field(init=False)
    _factors: tuple[NDArray, NDArray] = field(init=False, repr=False)
    _inverses: tuple[NDArray, NDArray] = field(init=False, repr=False)
    _diagonals: tuple[NDArray | None, NDArray | None] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        b1 = _check_block(self.b1, "b1")
        b2 = _check_block(self.b2, "b2")
        eigs = np.concatenate(
            [linalg.eigh(b1, eigvals_only=True), linalg.eigh(b2, eigvals_only=True)]
        )
        lo, hi = float(eigs.min()), float(eigs.max())
        if lo <= 0 or lo <= PD_TOLERANCE * hi:
            raise ConfigurationError(
                f"metric is not positive definite (eigenvalues in [{lo:g}, {hi:g}])"
            )
        diagonals = (_diagonal_of(b1), _diagonal_of(b2))
        factors, inverses = [], []
        for block, diag in zip((b1, b2), diagonals, strict=True):
            if diag is not None:
                inv = np.diag(1.0 / diag)
                factor = np.diag(np.sqrt(1.0 / diag))
            else:
                inv = linalg.cho_solve(linalg.cho_factor(block, lower=True), np.eye(len(block)))
                inv = 0.5 * (inv + inv.T)
                factor = linalg.cholesky(inv, lower=True)
            inverses.append(_readonly(inv))
            factors.append(_readonly(factor))
        object.__setattr__(self, "b1", _readonly(b1))
        object.__setattr__(self, "b2", _readonly(b2))
        object.__setattr__(self, "lambda_min", lo)
        object.__setattr__(self, "lambda_max", hi)
        object.__setattr__(self, "kappa", hi / lo)
        object.__setattr__(self, "_factors", tuple(factors))
        object.__setattr__(self, "_inverses", tuple(inverses))
        object.__setattr__(
            self, "_diagonals", tuple(None if d is None else _readonly(d) for d in diagonals)
        )

    # constructors

    @classmethod
    def identity(cls, n: int, m: int) -> MetricMatrix:
        return cls(np.eye(n), np.eye(m))

    @classmethod
    def scaled_identity(cls, lam: float, n: int, m: int) -> MetricMatrix:
        return cls(lam * np.eye(n), lam * np.eye(m))

    @classmethod
    def diagonal(cls, b1_diag: ArrayLike, b2_diag: ArrayLike) -> MetricMatrix:
        return cls(np.diag(np.asarray(b1_diag, float)), np.diag(np.asarray(b2_diag, float)))

    @classmethod
    def random_diagonal(
        cls, n: int, m: int, low: float, high: float, rng: np.random.Generator
    ) -> MetricMatrix:
        entries = rng.uniform(low, high, size=n + m)
        return cls.diagonal(entries[:n], entries[n:])

    @classmethod
    def half_split(
        cls,
        n: int,
        m: int,
        high: float,
        low: float,
        rng: np.random.Generator | None = None,
    ) -> MetricMatrix:
        """Half of all d coordinates weighted `high`, the rest `low`.

        Without rng the `high` entries come first; with rng they are placed by a random
        permutation of the d coordinates.
        """
        d = n + m
        entries = np.full(d, float(low))
        entries[: d // 2] = high
        if rng is not None:
            entries = rng.permutation(entries)
        return cls.diagonal(entries[:n], entries[n:])

    # structure

    @property
    def dims(self) -> tuple[int, int]:
        return self.b1.shape[0], self.b2.shape[0]

    @property
    def d(self) -> int:
        return sum(self.dims)

    @property
    def sampling_factor(self) -> tuple[NDArray, NDArray]:
        """Lower-triangular factors (L1, L2) with Li Li^T = Bi^-1."""
        return self._factors

    @property
    def inverse_blocks(self) -> tuple[NDArray, NDArray]:
        return self._inverses

    @property
    def is_identity(self) -> bool:
        return all(d is not None and np.all(d == 1.0) for d in self._diagonals)

    def block_is_scaled_identity(self, block: int) -> bool:
        diag = self._diagonals[block]
        return diag is not None and bool(np.all(diag == diag[0]))

    @property
    def is_scaled_identity_per_block(self) -> bool:
        return self.block_is_scaled_identity(0) and self.block_is_scaled_identity(1)

    @property
    def is_scaled_identity(self) -> bool:
        return self.is_scaled_identity_per_block and self._diagonals[0][0] == self._diagonals[1][0]

    # arithmetic on rows of shape (..., d)

    def _blockwise(self, v: NDArray, mats: tuple[NDArray, NDArray], diags) -> NDArray:
        v = np.asarray(v, dtype=float)
        if v.shape[-1] != self.d:
            raise DimensionMismatchError(f"vector has length {v.shape[-1]}, expected {self.d}")
        n = self.dims[0]
        parts = []
        for part, mat, diag in zip((v[..., :n], v[..., n:]), mats, diags, strict=True):
            parts.append(part * diag if diag is not None else part @ mat.T)
        return np.concatenate(parts, axis=-1)

    def apply(self, v: ArrayLike) -> NDArray:
        """B v."""
        return self._blockwise(v, (self.b1, self.b2), self._diagonals)

    def apply_inverse(self, v: ArrayLike) -> NDArray:
        """B^-1 v."""
        inv_diags = tuple(None if d is None else 1.0 / d for d in self._diagonals)
        return self._blockwise(v, self._inverses, inv_diags)

    def sample(self, rng: np.random.Generator, count: int) -> NDArray:
        """count rows drawn from N(0, B^-1); row i uses the i-th standard-normal row."""
        standard = rng.standard_normal((count, self.d))
        n = self.dims[0]
        parts = []
        for part, factor, diag in zip(
            (standard[:, :n], standard[:, n:]), self._factors, self._diagonals, strict=True
        ):
            parts.append(part * np.sqrt(1.0 / diag) if diag is not None else part @ factor.T)
        return np.concatenate(parts, axis=1)


def primal_norm(z: PointLike, B: MetricMatrix) -> float:
    v = as_vector(z, B.dims)
    return float(np.sqrt(max(v @ B.apply(v), 0.0)))


def dual_norm(g: PointLike, B: MetricMatrix) -> float:
    v = as_vector(g, B.dims)
    return float(np.sqrt(max(v @ B.apply_inverse(v), 0.0)))


def weighted_euclidean_norm(z: PointLike) -> float:
    """|z|; the metric plays no part."""
    return float(np.linalg.norm(as_vector(z)))


def sample_gaussian(B: MetricMatrix, rng: np.random.Generator, count: int) -> list[JointPoint]:
    if count < 0:
        raise ValueError("count must be non-negative")
    if count == 0:
        return []
    n = B.dims[0]
    return [JointPoint(row[:n], row[n:]) for row in B.sample(rng, count)]


class RandomStreams:
    """Counter-based sub-streams keyed by a 64-bit seed.

    Sub-stream (iteration k, call c) is Philox keyed by the seed with the two high counter
    words set to (c, k); draws inside the sub-stream only advance the low words, so distinct
    (k, c) pairs never overlap. Within one call, sample i is the i-th row of the
    standard-normal block drawn from the sub-stream.
    """

    def __init__(self, seed: int) -> None:
        if not 0 <= int(seed) < 2**64:
            raise ConfigurationError(f"seed must fit in 64 bits, got {seed}")
        self.seed = int(seed)

    def generator(self, iteration: int, call: int) -> np.random.Generator:
        counter = np.array([0, 0, call, iteration], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=self.seed, counter=counter))
