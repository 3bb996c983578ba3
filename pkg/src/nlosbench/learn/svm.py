"""Soft-margin kernel SVM trained by SMO.

The dual is solved with second-order working-set selection (maximal
violating pair refined by the curvature of the pair's sub-problem) and stops
once the largest KKT violation drops below ``tol``.

Feature vectors built from PDR windows repeat heavily, so training first
collapses identical (x, y) pairs. A point seen ``m`` times is equivalent to a
single point whose box constraint is ``m * C``; the collapsed solution is
mapped back to per-sample multipliers ``alpha / m`` which lie in ``(0, C]``.
"""

from __future__ import annotations

import logging
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from ..errors import EmptyModel, SingleClass, TooFewSamples
from ..trace import Condition

logger = logging.getLogger(__name__)

SV_THRESHOLD = 1e-12
_TAU = 1e-12


@dataclass(frozen=True)
class Kernel:
    kind: str = "rbf"  # "rbf" | "linear"
    gamma: float | None = None  # None: pick from training data

    def __post_init__(self):
        if self.kind not in ("rbf", "linear"):
            raise ValueError(f"unknown kernel {self.kind!r}")
        if self.gamma is not None and not self.gamma > 0:
            raise ValueError("gamma must be positive")

    def matrix(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        A = np.atleast_2d(A)
        B = np.atleast_2d(B)
        if self.kind == "linear":
            return A @ B.T
        # explicit differences: the expanded-norm form loses K(x, x) == 1
        d2 = np.zeros((A.shape[0], B.shape[0]))
        for k in range(A.shape[1]):
            d2 += (A[:, k:k + 1] - B[None, :, k]) ** 2
        return np.exp(-self.gamma * d2)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "gamma": self.gamma}


def default_gamma(X: np.ndarray) -> float:
    """1 / (n_features * mean per-feature variance); 1.0 for constant data."""
    v = float(np.mean(np.var(X, axis=0)))
    return 1.0 / (X.shape[1] * v) if v > 0 else 1.0


@dataclass(frozen=True)
class SvmModel:
    support_vectors: np.ndarray  # (s, d)
    alphas: np.ndarray  # (s,) per-sample multiplier, in (0, C]
    labels: np.ndarray  # (s,) +1 NLoS, -1 LoS
    multiplicity: np.ndarray  # (s,) how many training samples share each row
    bias: float
    kernel: Kernel
    c: float
    converged: bool = True
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def n_features(self) -> int:
        return self.support_vectors.shape[1]

    @property
    def coef(self) -> np.ndarray:
        return self.alphas * self.multiplicity * self.labels

    def decision(self, X: np.ndarray) -> np.ndarray:
        if len(self.alphas) == 0:
            raise EmptyModel("model has no support vectors")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.empty(X.shape[0])
        # bounded chunks keep the kernel block small on large inputs
        for lo in range(0, X.shape[0], 1024):
            out[lo:lo + 1024] = self.kernel.matrix(X[lo:lo + 1024], self.support_vectors) @ self.coef
        return out + self.bias

    def to_dict(self) -> dict:
        return {
            "model_type": "svm",
            "support_vectors": self.support_vectors.tolist(),
            "alphas": self.alphas.tolist(),
            "labels": self.labels.tolist(),
            "multiplicity": self.multiplicity.tolist(),
            "bias": self.bias,
            "kernel": self.kernel.to_dict(),
            "c": self.c,
            "converged": self.converged,
            "diagnostics": self.diagnostics,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SvmModel":
        if d.get("model_type") != "svm":
            raise ValueError(f"not an svm model: {d.get('model_type')!r}")
        sv = np.array(d["support_vectors"], dtype=float)
        if sv.size == 0:
            sv = sv.reshape(0, 3)
        return cls(
            support_vectors=sv,
            alphas=np.array(d["alphas"], dtype=float),
            labels=np.array(d["labels"], dtype=np.int64),
            multiplicity=np.array(d.get("multiplicity", [1] * len(d["alphas"])), dtype=np.int64),
            bias=float(d["bias"]),
            kernel=Kernel(**d["kernel"]),
            c=float(d["c"]),
            converged=bool(d.get("converged", True)),
            diagnostics=dict(d.get("diagnostics", {})),
        )


class _RowCache:
    """LRU cache of kernel rows over the training points."""

    def __init__(self, X: np.ndarray, kernel: Kernel, max_bytes: int):
        self.X = X
        self.kernel = kernel
        self.capacity = max(2, max_bytes // (8 * max(len(X), 1)))
        self.rows: OrderedDict[int, np.ndarray] = OrderedDict()

    def __getitem__(self, i: int) -> np.ndarray:
        row = self.rows.get(i)
        if row is not None:
            self.rows.move_to_end(i)
            return row
        row = self.kernel.matrix(self.X[i:i + 1], self.X)[0]
        self.rows[i] = row
        if len(self.rows) > self.capacity:
            self.rows.popitem(last=False)
        return row


def _solve_dual(Kr: _RowCache, diag: np.ndarray, y: np.ndarray, box: np.ndarray,
                tol: float, max_iter: int):
    """Minimise 0.5 a'Qa - sum(a) s.t. 0 <= a <= box, y'a = 0, with Q_ij = y_i y_j K_ij."""
    n = len(y)
    a = np.zeros(n)
    grad = -np.ones(n)
    pos = y > 0
    it = 0
    gap = np.inf
    while True:
        v = -y * grad
        at_upper = a >= box
        at_lower = a <= 0
        up = np.where(pos, ~at_upper, ~at_lower)
        low = np.where(pos, ~at_lower, ~at_upper)
        v_up = np.where(up, v, -np.inf)
        i = int(np.argmax(v_up))
        m = v_up[i]
        big_m = np.min(np.where(low, v, np.inf))
        gap = m - big_m
        if gap < tol or it >= max_iter:
            break

        Ki = Kr[i]
        b = m - v
        curv = diag[i] + diag - 2.0 * Ki
        curv = np.where(curv > 0, curv, _TAU)
        score = np.where(low & (b > 0), -(b * b) / curv, np.inf)
        j = int(np.argmin(score))
        Kj = Kr[j]

        yi, yj = y[i], y[j]
        ai, aj = a[i], a[j]
        ci, cj = box[i], box[j]
        quad = max(diag[i] + diag[j] - 2.0 * Ki[j], _TAU)
        if yi != yj:
            delta = (-grad[i] - grad[j]) / quad
            diff = ai - aj
            ai += delta
            aj += delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > ci - cj:
                if ai > ci:
                    ai, aj = ci, ci - diff
            elif aj > cj:
                aj, ai = cj, cj + diff
        else:
            delta = (grad[i] - grad[j]) / quad
            total = ai + aj
            ai -= delta
            aj += delta
            if total > ci:
                if ai > ci:
                    ai, aj = ci, total - ci
            elif aj < 0:
                aj, ai = 0.0, total
            if total > cj:
                if aj > cj:
                    aj, ai = cj, total - cj
            elif ai < 0:
                ai, aj = 0.0, total

        d_i, d_j = ai - a[i], aj - a[j]
        grad += y * (yi * d_i * Ki + yj * d_j * Kj)
        a[i], a[j] = ai, aj
        it += 1

    v = -y * grad
    free = (a > 0) & (a < box)
    if free.any():
        bias = float(v[free].mean())
    else:
        up = np.where(pos, a < box, a > 0)
        low = np.where(pos, a > 0, a < box)
        hi = np.max(v[up]) if up.any() else np.min(v[low])
        lo = np.min(v[low]) if low.any() else hi
        bias = 0.5 * float(hi + lo)
    return a, bias, it, float(gap)


def svm_fit(
    X: np.ndarray,
    y: np.ndarray,
    c: float = 1.0,
    kernel: Kernel | None = None,
    tol: float = 1e-3,
    max_passes: int = 10,
    cache_mb: int = 256,
) -> SvmModel:
    """Train on a feature matrix and +1 (NLoS) / -1 (LoS) labels.

    The iteration budget is ``max_passes`` sweeps' worth of pair updates over
    the distinct training points. Running out of budget does not raise: the
    last iterate comes back with ``converged=False`` and the remaining KKT gap
    in ``diagnostics``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if not c > 0:
        raise ValueError("C must be positive")
    if len(np.unique(y)) < 2:
        raise SingleClass("training data holds only one class")
    if len(y) < 2:
        raise TooFewSamples("need at least two samples")
    kernel = kernel or Kernel()
    if kernel.kind == "rbf" and kernel.gamma is None:
        kernel = Kernel("rbf", default_gamma(X))

    rows, counts = np.unique(np.column_stack([X, y]), axis=0, return_counts=True)
    Xu, yu = rows[:, :-1], rows[:, -1].astype(float)
    box = counts * float(c)
    diag = np.ones(len(yu)) if kernel.kind == "rbf" else (Xu * Xu).sum(1)
    cache = _RowCache(Xu, kernel, cache_mb << 20)
    max_iter = max_passes * max(len(yu), 100)

    a, bias, n_iter, gap = _solve_dual(cache, diag, yu, box, tol, max_iter)
    converged = gap < tol
    if not converged:
        logger.warning("SMO stopped after %d iterations with KKT gap %.3g > tol %.3g",
                       n_iter, gap, tol)

    per_sample = a / counts
    keep = per_sample > SV_THRESHOLD
    return SvmModel(
        support_vectors=Xu[keep],
        alphas=np.minimum(per_sample[keep], c),
        labels=yu[keep].astype(np.int64),
        multiplicity=counts[keep].astype(np.int64),
        bias=bias,
        kernel=kernel,
        c=float(c),
        converged=bool(converged),
        diagnostics={
            "iterations": int(n_iter),
            "max_iterations": int(max_iter),
            "kkt_gap": gap,
            "tol": tol,
            "distinct_points": int(len(yu)),
        },
    )


def svm_train(samples, c: float = 1.0, kernel: Kernel | None = None, tol: float = 1e-3,
              max_passes: int = 10) -> SvmModel:
    from ..features import to_arrays

    X, y = to_arrays(samples)
    return svm_fit(X, y, c, kernel, tol, max_passes)


def svm_labels(model: SvmModel, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    f = model.decision(X)
    return np.where(f > 0, 1, -1), f


def svm_predict(model: SvmModel, x) -> tuple[Condition, float]:
    f = float(model.decision(np.asarray(x, dtype=float).reshape(1, -1))[0])
    return (Condition.NLOS if f > 0 else Condition.LOS), f
