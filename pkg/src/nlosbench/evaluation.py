"""Detection metrics, k-fold cross-validation and the training-size experiment."""

from __future__ import annotations

import logging
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import EmptyInput, FoldError, KTooLarge, LengthMismatch, TooFewSamples, TrainingError
from .features import FeatureSample, to_arrays
from .learn import nb_fit, predict_labels, svm_fit
from .seeding import rng
from .trace import Condition

logger = logging.getLogger(__name__)

METRICS = ("accuracy", "precision", "recall", "fpr")
MODEL_KINDS = ("nb", "svm")


class _NotDefined:
    """Marker for a ratio whose denominator is zero."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NotDefined"

    def __reduce__(self):
        return (_NotDefined, ())


NotDefined = _NotDefined()


def _ratio(num: int, den: int):
    return num / den if den else NotDefined


def _json_value(v):
    return "NotDefined" if v is NotDefined else v


def _from_json_value(v):
    return NotDefined if v == "NotDefined" else v


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    precision: float | _NotDefined
    recall: float | _NotDefined
    fpr: float | _NotDefined
    matrix: ConfusionMatrix

    @classmethod
    def from_matrix(cls, cm: ConfusionMatrix) -> "MetricsReport":
        return cls(
            accuracy=_ratio(cm.tp + cm.tn, cm.total),
            precision=_ratio(cm.tp, cm.tp + cm.fp),
            recall=_ratio(cm.tp, cm.tp + cm.fn),
            fpr=_ratio(cm.fp, cm.fp + cm.tn),
            matrix=cm,
        )

    def to_dict(self) -> dict:
        d = {m: _json_value(getattr(self, m)) for m in METRICS}
        d["matrix"] = vars(self.matrix).copy()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsReport":
        return cls.from_matrix(ConfusionMatrix(**d["matrix"]))


def _as_positive(labels) -> np.ndarray:
    """Map Condition / 'nlos' / +1 to True, everything LoS to False."""
    arr = np.asarray(labels)
    if arr.dtype.kind in "iub":
        return arr.astype(np.int64) > 0 if arr.dtype.kind != "b" else arr
    return np.array([Condition(v) is Condition.NLOS for v in labels], dtype=bool)


def compute_metrics(truth, predicted) -> MetricsReport:
    """Confusion matrix and rates with NLoS as the positive class."""
    if len(truth) != len(predicted):
        raise LengthMismatch(f"{len(truth)} truths vs {len(predicted)} predictions")
    if len(truth) == 0:
        raise EmptyInput("no labels to score")
    t = _as_positive(truth)
    p = _as_positive(predicted)
    cm = ConfusionMatrix(
        tp=int(np.sum(t & p)),
        tn=int(np.sum(~t & ~p)),
        fp=int(np.sum(~t & p)),
        fn=int(np.sum(t & ~p)),
    )
    return MetricsReport.from_matrix(cm)


def kfold_split(n_samples: int, k: int, seed: int = 0, shuffle: bool = True) -> list[np.ndarray]:
    """Partition ``range(n_samples)`` into k contiguous chunks of a (seeded) permutation.

    The first ``n % k`` folds hold one extra index. With ``shuffle=False`` the
    folds are temporal blocks.
    """
    if k < 1 or n_samples < 1:
        raise ValueError("n_samples and k must be positive")
    if k > n_samples:
        raise KTooLarge(f"k={k} exceeds n_samples={n_samples}")
    order = rng(seed).permutation(n_samples) if shuffle else np.arange(n_samples)
    return [np.asarray(f) for f in np.array_split(order, k)]


@dataclass(frozen=True)
class ModelParams:
    var_smoothing: float = 1e-9
    c: float = 1.0
    kernel: str = "rbf"
    gamma: float | None = None
    tol: float = 1e-3
    max_passes: int = 10


def fit_model(kind: str, X: np.ndarray, y: np.ndarray, params: ModelParams = ModelParams()):
    from .learn import Kernel

    if kind == "nb":
        return nb_fit(X, y, params.var_smoothing)
    if kind == "svm":
        return svm_fit(X, y, params.c, Kernel(params.kernel, params.gamma), params.tol,
                       params.max_passes)
    raise ValueError(f"unknown model kind {kind!r}")


def _summarize(values: list) -> tuple:
    vals = [v for v in values if v is not NotDefined]
    mean = statistics.fmean(vals) if vals else NotDefined
    std = statistics.stdev(vals) if len(vals) >= 2 else NotDefined
    return mean, std


@dataclass
class CvReport:
    model_kind: str
    scenario: str
    folds: list[MetricsReport]
    fold_ids: list[int]
    skipped: list[int] = field(default_factory=list)
    shuffled: bool = True
    k: int = 10
    nonconverged: list[int] = field(default_factory=list)

    def mean(self, metric: str):
        return _summarize([getattr(f, metric) for f in self.folds])[0]

    def std(self, metric: str):
        return _summarize([getattr(f, metric) for f in self.folds])[1]

    def to_dict(self) -> dict:
        return {
            "model_kind": self.model_kind,
            "scenario": self.scenario,
            "k": self.k,
            "fold_mode": "shuffled" if self.shuffled else "temporal",
            "fold_ids": self.fold_ids,
            "skipped_folds": self.skipped,
            "nonconverged_folds": self.nonconverged,
            "folds": [f.to_dict() for f in self.folds],
            "mean": {m: _json_value(self.mean(m)) for m in METRICS},
            "std": {m: _json_value(self.std(m)) for m in METRICS},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CvReport":
        return cls(
            model_kind=d["model_kind"],
            scenario=d["scenario"],
            folds=[MetricsReport.from_dict(f) for f in d["folds"]],
            fold_ids=list(d["fold_ids"]),
            skipped=list(d.get("skipped_folds", [])),
            shuffled=d.get("fold_mode", "shuffled") == "shuffled",
            k=d.get("k", 10),
            nonconverged=list(d.get("nonconverged_folds", [])),
        )


def _run_fold(kind, X, y, train_idx, test_idx, params, fold):
    try:
        model = fit_model(kind, X[train_idx], y[train_idx], params)
    except TrainingError as exc:
        raise FoldError(fold, exc) from exc
    pred = predict_labels(model, X[test_idx])
    converged = getattr(model, "converged", True)
    return compute_metrics(y[test_idx], pred), converged


def _run_fold_packed(job):
    return _run_fold(*job)


def _map(jobs: list, workers: int):
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_fold_packed, jobs))
    return [_run_fold_packed(j) for j in jobs]


def cross_validate(
    samples: Sequence[FeatureSample] | tuple[np.ndarray, np.ndarray],
    model_kind: str,
    k: int = 10,
    seed: int = 0,
    *,
    shuffle: bool = True,
    scenario: str = "",
    params: ModelParams = ModelParams(),
    workers: int = 1,
) -> CvReport:
    """Train on k-1 folds, score on the held-out one, k times.

    Folds whose training union lacks a class are skipped with a warning and
    left out of the aggregates. Results do not depend on ``workers``.
    """
    X, y = samples if isinstance(samples, tuple) else to_arrays(samples)
    folds = kfold_split(len(y), k, seed, shuffle)
    jobs, fold_ids, skipped = [], [], []
    for i, test_idx in enumerate(folds):
        train_idx = np.concatenate([f for j, f in enumerate(folds) if j != i]) if k > 1 else test_idx
        train_y = y[train_idx]
        if len(np.unique(train_y)) < 2:
            logger.warning("fold %d skipped: training data holds a single class", i)
            skipped.append(i)
            continue
        jobs.append((model_kind, X, y, np.sort(train_idx), test_idx, params, i))
        fold_ids.append(i)
    results = _map(jobs, workers)
    nonconverged = [i for i, (_, ok) in zip(fold_ids, results) if not ok]
    return CvReport(
        model_kind=model_kind,
        scenario=scenario,
        folds=[r for r, _ in results],
        fold_ids=fold_ids,
        skipped=skipped,
        shuffled=shuffle,
        k=k,
        nonconverged=nonconverged,
    )


@dataclass
class RobustnessCurve:
    model_kind: str
    scenario: str
    fractions: list[float]
    accuracies: list
    validation_ids: list[int]
    seed: int
    nonconverged: list[int] = field(default_factory=list)

    @property
    def validation_set_id(self) -> str:
        """Short stable fingerprint of the validation indices."""
        import hashlib

        raw = np.asarray(self.validation_ids, dtype=np.int64).tobytes()
        return hashlib.blake2b(raw, digest_size=8).hexdigest()

    def to_dict(self) -> dict:
        return {
            "model_kind": self.model_kind,
            "scenario": self.scenario,
            "seed": self.seed,
            "validation_set_id": self.validation_set_id,
            "validation_size": len(self.validation_ids),
            "steps": [
                {"step": j + 1, "training_fraction": f, "accuracy": _json_value(a)}
                for j, (f, a) in enumerate(zip(self.fractions, self.accuracies))
            ],
            "nonconverged_steps": self.nonconverged,
        }


def robustness_split(n: int, seed: int) -> tuple[np.ndarray, list[np.ndarray]]:
    """Seeded 10% validation set and the 90% pool cut into 10 equal subsets."""
    order = rng(seed).permutation(n)
    n_val = math.ceil(n / 10)
    return order[:n_val], np.array_split(order[n_val:], 10)


def robustness_experiment(
    samples: Sequence[FeatureSample] | tuple[np.ndarray, np.ndarray],
    model_kind: str,
    seed: int = 0,
    *,
    scenario: str = "",
    params: ModelParams = ModelParams(),
    workers: int = 1,
) -> RobustnessCurve:
    """Accuracy on a fixed validation set as training grows by tenths of the pool."""
    X, y = samples if isinstance(samples, tuple) else to_arrays(samples)
    if len(y) < 20:
        raise TooFewSamples(f"need >= 20 samples, got {len(y)}")
    val, subsets = robustness_split(len(y), seed)
    jobs, steps = [], []
    accuracies: list = [NotDefined] * 10
    for j in range(10):
        train = np.sort(np.concatenate(subsets[: j + 1]))
        if len(np.unique(y[train])) < 2:
            logger.warning("step %d skipped: training data holds a single class", j + 1)
            continue
        jobs.append((model_kind, X, y, train, val, params, j))
        steps.append(j)
    nonconverged = []
    for j, (report, ok) in zip(steps, _map(jobs, workers)):
        accuracies[j] = report.accuracy
        if not ok:
            nonconverged.append(j + 1)
    return RobustnessCurve(
        model_kind=model_kind,
        scenario=scenario,
        fractions=[round(0.09 * (j + 1), 10) for j in range(10)],
        accuracies=accuracies,
        validation_ids=val.tolist(),
        seed=seed,
        nonconverged=nonconverged,
    )
