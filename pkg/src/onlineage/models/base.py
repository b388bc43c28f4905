"""Shared pieces of the model families: task names, input checks, the model
base class and the Dataset container."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from onlineage.platforms import PLATFORMS

REGRESSION = "regression"
CLASSIFICATION = "classification"
TASKS = (REGRESSION, CLASSIFICATION)


def check_task(task: str) -> None:
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}")


def check_X(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ValueError("X must be a 2-D matrix")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains non-finite values")
    return X


def check_xy(X, y, task: str = REGRESSION):
    X = check_X(X)
    y = np.asarray(y, dtype=float).ravel()
    if len(X) == 0:
        raise ValueError("empty training set")
    if len(X) != len(y):
        raise ValueError(f"X has {len(X)} rows but y has {len(y)}")
    if not np.all(np.isfinite(y)):
        raise ValueError("y contains non-finite values")
    if task == CLASSIFICATION and not np.all((y == 0) | (y == 1)):
        raise ValueError("classification targets must be 0 or 1")
    return np.ascontiguousarray(X), y


def require_two_classes(y) -> None:
    if len(np.unique(y)) < 2:
        raise ValueError("training labels contain a single class")


class Model:
    """Minimal inference interface shared by every fitted model."""

    kind = "model"
    task = REGRESSION
    n_features = 0

    def _check_X(self, X) -> np.ndarray:
        X = check_X(X)
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} columns, got {X.shape[1]}")
        return np.ascontiguousarray(X)

    def _require_classifier(self):
        if self.task != CLASSIFICATION:
            raise TypeError(f"{self.kind} model is not a classifier")

    def predict(self, X) -> np.ndarray:
        raise NotImplementedError

    def predict_score(self, X) -> np.ndarray:
        raise NotImplementedError

    def state(self) -> dict:
        raise NotImplementedError


def predict(model: Model, X) -> np.ndarray:
    return model.predict(X)


def predict_score(model: Model, X) -> np.ndarray:
    """Positive-class scores in [0, 1] for a fitted classifier."""
    return model.predict_score(X)


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    task: str = REGRESSION
    cluster_id: str = "all"
    feature_names: tuple[str, ...] = PLATFORMS

    def __post_init__(self):
        check_task(self.task)
        self.X, self.y = check_xy(self.X, self.y, self.task)
        if self.X.shape[1] != len(self.feature_names):
            raise ValueError("feature_names does not match the column count")

    def __len__(self):
        return len(self.y)

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset(self.X[idx], self.y[idx], self.task, self.cluster_id, self.feature_names)
