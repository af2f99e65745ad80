"""Data-poisoning attack on logistic regression.

The attacker (minimizer) shifts the features of the poisoned share of the training set by a
shared perturbation x with |x|_inf <= zeta; the learner (maximizer) fits weights y on the
poisoned and clean parts together:

    f(x, y) = -(h(x, y; D_p) + h(0, y; D_t) + lam |y|^2)

with h the binary cross-entropy of the logistic model sigmoid((a + x)^T y).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import NDArray
from scipy import optimize
from scipy.special import expit

from zomax.problems.base import Box, MinMaxProblem, ProblemMetadata, Product, Unconstrained

logger = logging.getLogger(__name__)

N_SAMPLES = 500
N_FEATURES = 20
CORRUPTION_RATIO = 0.15
REGULARIZATION = 1e-3
PERTURBATION_BOUND = 10.0
LABEL_NOISE_VARIANCE = 1e-3


@dataclass(frozen=True)
class PoisoningDataset:
    features: NDArray
    labels: NDArray
    poisoned_count: int
    holdout_features: NDArray | None = None
    holdout_labels: NDArray | None = None

    @property
    def poisoned(self) -> tuple[NDArray, NDArray]:
        k = self.poisoned_count
        return self.features[:k], self.labels[:k]

    @property
    def clean(self) -> tuple[NDArray, NDArray]:
        k = self.poisoned_count
        return self.features[k:], self.labels[k:]

    def accuracy(self, y: NDArray) -> float:
        """Training-set accuracy of y on the unperturbed features.

        These are the samples the attack is trained against; `holdout_accuracy` scores y on
        samples the attack never saw.
        """
        return _accuracy(self.features, self.labels, y)

    def holdout_accuracy(self, y: NDArray) -> float | None:
        if self.holdout_features is None:
            return None
        return _accuracy(self.holdout_features, self.holdout_labels, y)

    def fit_reference_model(self) -> NDArray:
        """Plain logistic regression on the unperturbed data."""
        def loss(y: NDArray) -> tuple[float, NDArray]:
            s = self.features @ y
            residual = expit(s) - self.labels
            value = float(np.mean(np.logaddexp(0.0, s) - self.labels * s))
            return value, self.features.T @ residual / len(s)

        result = optimize.minimize(loss, np.zeros(self.features.shape[1]), jac=True,
                                   method="L-BFGS-B")
        return result.x

    def save_csv(self, path: Path | str) -> Path:
        path = Path(path)
        header = ",".join([f"feature_{j}" for j in range(self.features.shape[1])] + ["label"])
        data = np.column_stack([self.features, self.labels])
        np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.17g")
        return path

    @classmethod
    def load_csv(
        cls, path: Path | str, corruption_ratio: float = CORRUPTION_RATIO
    ) -> PoisoningDataset:
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"poisoning dataset not found: {path}")
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, :-1], data[:, -1], int(round(corruption_ratio * len(data))))


def _accuracy(features: NDArray, labels: NDArray, y: NDArray) -> float:
    predictions = (features @ np.asarray(y, dtype=float) >= 0).astype(float)
    return float(np.mean(predictions == labels))


def _labels(rng: np.random.Generator, features: NDArray, theta: NDArray) -> NDArray:
    noise = rng.normal(0.0, np.sqrt(LABEL_NOISE_VARIANCE), size=len(features))
    return (expit(features @ theta + noise) >= 0.5).astype(float)


def generate_dataset(
    seed: int,
    n_samples: int = N_SAMPLES,
    n_features: int = N_FEATURES,
    corruption_ratio: float = CORRUPTION_RATIO,
    n_holdout: int = 0,
) -> PoisoningDataset:
    """Training samples, plus n_holdout samples from the same model drawn after them."""
    rng = np.random.default_rng(seed)
    features = rng.standard_normal((n_samples, n_features))
    theta = rng.standard_normal(n_features)
    labels = _labels(rng, features, theta)
    holdout_features = holdout_labels = None
    if n_holdout > 0:
        holdout_features = rng.standard_normal((n_holdout, n_features))
        holdout_labels = _labels(rng, holdout_features, theta)
    return PoisoningDataset(
        features,
        labels,
        int(round(corruption_ratio * n_samples)),
        holdout_features,
        holdout_labels,
    )


def _cross_entropy(scores: NDArray, labels: NDArray) -> NDArray:
    # scores: (samples, batch) -> mean loss per batch column
    return np.mean(np.logaddexp(0.0, scores) - labels[:, None] * scores, axis=0)


def poisoning_problem_from_dataset(
    dataset: PoisoningDataset,
    lam: float = REGULARIZATION,
    zeta: float = PERTURBATION_BOUND,
) -> MinMaxProblem:
    p_features, p_labels = dataset.poisoned
    t_features, t_labels = dataset.clean
    dim = dataset.features.shape[1]

    def objective(Z: NDArray) -> NDArray:
        X, Y = Z[:, :dim], Z[:, dim:]
        shift = np.einsum("ki,ki->k", X, Y)
        h_p = _cross_entropy(p_features @ Y.T + shift[None, :], p_labels)
        h_t = _cross_entropy(t_features @ Y.T, t_labels)
        return -(h_p + h_t + lam * np.einsum("ki,ki->k", Y, Y))

    def gradient(z: NDArray) -> NDArray:
        x, y = z[:dim], z[dim:]
        shifted = p_features + x
        r_p = expit(shifted @ y) - p_labels
        r_t = expit(t_features @ y) - t_labels
        grad_x = -np.mean(r_p) * y
        grad_y = -(shifted.T @ r_p / len(r_p) + t_features.T @ r_t / len(r_t) + 2 * lam * y)
        return np.concatenate([grad_x, -grad_y])

    return MinMaxProblem(
        name="poisoning",
        n=dim,
        m=dim,
        objective=objective,
        gradient=gradient,
        feasible_set=Product((Box.symmetric(zeta, dim), Unconstrained(dim))),
        metadata=ProblemMetadata(),
        initial_point=np.zeros(2 * dim),
    )


def poisoning_problem(seed: int, **kwargs) -> tuple[MinMaxProblem, PoisoningDataset]:
    dataset = generate_dataset(seed)
    logger.debug("generated poisoning dataset (seed=%d, poisoned=%d)", seed, dataset.poisoned_count)
    return poisoning_problem_from_dataset(dataset, **kwargs), dataset
