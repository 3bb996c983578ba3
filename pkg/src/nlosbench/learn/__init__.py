"""Gaussian Naive Bayes and kernel SVM detectors for NLoS conditions."""

from __future__ import annotations

import numpy as np

from .nb import NbModel, nb_fit, nb_predict, nb_scores, nb_train
from .svm import Kernel, SvmModel, default_gamma, svm_fit, svm_labels, svm_predict, svm_train

__all__ = [
    "Kernel", "NbModel", "SvmModel", "default_gamma", "load_model", "model_from_dict",
    "nb_fit", "nb_predict", "nb_scores", "nb_train", "predict_labels",
    "svm_fit", "svm_labels", "svm_predict", "svm_train",
]


def model_from_dict(d: dict) -> NbModel | SvmModel:
    kind = d.get("model_type")
    if kind == "nb":
        return NbModel.from_dict(d)
    if kind == "svm":
        return SvmModel.from_dict(d)
    raise ValueError(f"unknown model_type {kind!r}")


def load_model(path) -> NbModel | SvmModel:
    import json

    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))


def predict_labels(model: NbModel | SvmModel, X: np.ndarray) -> np.ndarray:
    """+1 (NLoS) / -1 (LoS) for each row of X."""
    if isinstance(model, NbModel):
        return nb_scores(model, X)[0]
    return svm_labels(model, X)[0]
