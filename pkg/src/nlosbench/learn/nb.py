"""Gaussian Naive Bayes for the two-class LoS/NLoS problem."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import SingleClass, TooFewSamples
from ..trace import Condition

# class index order used by every array in the model
CLASSES = (Condition.LOS, Condition.NLOS)


@dataclass(frozen=True)
class NbModel:
    """Class priors plus per-class, per-feature Gaussian mean and variance.

    ``var_smoothing`` is relative; ``epsilon`` is the absolute variance floor it
    produced on the training data (``var_smoothing`` times the largest
    per-feature variance over all samples).
    """

    prior: np.ndarray  # (2,)
    mean: np.ndarray  # (2, d)
    variance: np.ndarray  # (2, d)
    var_smoothing: float
    epsilon: float
    counts: tuple[int, int] = (0, 0)

    @property
    def n_features(self) -> int:
        return self.mean.shape[1]

    def joint_log_likelihood(self, X: np.ndarray) -> np.ndarray:
        """log P(y) + sum_i log N(x_i; mean, var) for each row of X and each class, shape (n, 2)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.empty((X.shape[0], 2))
        for k in range(2):
            var = self.variance[k]
            ll = -0.5 * np.sum(np.log(2.0 * np.pi * var))
            ll = ll - 0.5 * np.sum((X - self.mean[k]) ** 2 / var, axis=1)
            out[:, k] = math.log(self.prior[k]) + ll
        return out

    def to_dict(self) -> dict:
        return {
            "model_type": "nb",
            "classes": [c.value for c in CLASSES],
            "prior": self.prior.tolist(),
            "mean": self.mean.tolist(),
            "variance": self.variance.tolist(),
            "var_smoothing": self.var_smoothing,
            "epsilon": self.epsilon,
            "counts": list(self.counts),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NbModel":
        if d.get("model_type") != "nb":
            raise ValueError(f"not an nb model: {d.get('model_type')!r}")
        return cls(
            prior=np.array(d["prior"], dtype=float),
            mean=np.array(d["mean"], dtype=float),
            variance=np.array(d["variance"], dtype=float),
            var_smoothing=float(d["var_smoothing"]),
            epsilon=float(d["epsilon"]),
            counts=tuple(d.get("counts", (0, 0))),
        )


def nb_fit(X: np.ndarray, y: np.ndarray, var_smoothing: float = 1e-9) -> NbModel:
    """Fit on a feature matrix and +1 (NLoS) / -1 (LoS) labels."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    masks = (y == -1, y == 1)
    counts = tuple(int(m.sum()) for m in masks)
    if 0 in counts:
        raise SingleClass("training data holds only one class")
    if min(counts) < 2:
        raise TooFewSamples(f"need >= 2 samples per class, got LoS={counts[0]} NLoS={counts[1]}")

    epsilon = var_smoothing * float(X.var(axis=0).max())
    if epsilon <= 0.0:
        # every feature constant across the whole set
        epsilon = var_smoothing
    mean = np.vstack([X[m].mean(axis=0) for m in masks])
    variance = np.vstack([np.maximum(X[m].var(axis=0), epsilon) for m in masks])
    prior = np.array(counts, dtype=float) / len(y)
    return NbModel(prior, mean, variance, var_smoothing, epsilon, counts)


def nb_train(samples, var_smoothing: float = 1e-9) -> NbModel:
    from ..features import to_arrays

    X, y = to_arrays(samples)
    return nb_fit(X, y, var_smoothing)


def nb_scores(model: NbModel, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized prediction: labels as +1/-1 and the posterior of the chosen label."""
    jll = model.joint_log_likelihood(X)
    nlos = jll[:, 1] > jll[:, 0]  # ties go to LoS
    top = np.where(nlos, jll[:, 1], jll[:, 0])
    other = np.where(nlos, jll[:, 0], jll[:, 1])
    posterior = 1.0 / (1.0 + np.exp(other - top))
    return np.where(nlos, 1, -1), posterior


def nb_predict(model: NbModel, x) -> tuple[Condition, float]:
    labels, post = nb_scores(model, np.asarray(x, dtype=float).reshape(1, -1))
    return (Condition.NLOS if labels[0] == 1 else Condition.LOS), float(post[0])
