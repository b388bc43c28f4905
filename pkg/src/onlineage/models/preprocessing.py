"""Z-score standardization, train/test splitting and fold assignment."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from onlineage.models.base import check_X
from onlineage.rng import make_rng


@dataclass
class ScalerParams:
    mean: np.ndarray
    scale: np.ndarray

    def transform(self, X) -> np.ndarray:
        return apply_standardizer(self, X)

    def state(self) -> dict:
        return {"mean": self.mean, "scale": self.scale}


def fit_standardizer(X_train) -> ScalerParams:
    """Per-feature mean and population standard deviation; a zero deviation
    is stored as 1 so constant columns map to 0."""
    X = check_X(X_train)
    if len(X) == 0:
        raise ValueError("cannot fit a standardizer on zero rows")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    # a constant column can get a rounding-level std; pin it to (value, 1)
    const = X.max(axis=0) == X.min(axis=0)
    mean[const] = X[0, const]
    std[const | (std == 0)] = 1.0
    return ScalerParams(mean, std)


def apply_standardizer(params: ScalerParams, X) -> np.ndarray:
    X = check_X(X)
    if X.shape[1] != len(params.mean):
        raise ValueError(f"expected {len(params.mean)} columns, got {X.shape[1]}")
    return (X - params.mean) / params.scale


@dataclass
class SplitIndices:
    train: np.ndarray
    test: np.ndarray
    seed: int


def train_test_split(n: int, ratio: float = 0.8, seed: int = 0, stratify=None) -> SplitIndices:
    """Seeded shuffle then prefix split.

    With ``stratify`` each class is shuffled and split on its own with
    ``floor(ratio * n_c)`` training rows; the rows lost to flooring are then
    handed out one per class, largest remainder first, until the training set
    holds ``round(ratio * n)`` rows.
    """
    if n < 5:
        raise ValueError("need at least 5 rows to split")
    if not 0 < ratio < 1:
        raise ValueError("ratio must be in (0, 1)")
    rng = make_rng(seed, "split")
    if stratify is None:
        perm = rng.permutation(n)
        n_train = int(round(ratio * n))
        return SplitIndices(np.sort(perm[:n_train]), np.sort(perm[n_train:]), seed)

    labels = np.asarray(stratify)
    if len(labels) != n:
        raise ValueError("stratify labels must have length n")
    classes = np.unique(labels)
    members = {}
    for c in classes:
        idx = np.flatnonzero(labels == c)
        if len(idx) < 2:
            raise ValueError(f"stratum {c!r} has fewer than 2 rows")
        members[c] = rng.permutation(idx)
    exact = {c: ratio * len(members[c]) for c in classes}
    take = {c: int(np.floor(exact[c])) for c in classes}
    target = int(round(ratio * n))
    by_remainder = sorted(classes, key=lambda c: (-(exact[c] - take[c]), c))
    i = 0
    while sum(take.values()) < target and i < len(by_remainder):
        c = by_remainder[i]
        if take[c] < len(members[c]) - 1:
            take[c] += 1
        i += 1
    for c in classes:
        # each stratum keeps at least one row on each side
        take[c] = min(max(take[c], 1), len(members[c]) - 1)
    train = np.concatenate([members[c][: take[c]] for c in classes])
    test = np.concatenate([members[c][take[c]:] for c in classes])
    return SplitIndices(np.sort(train), np.sort(test), seed)


def kfold_indices(n: int, folds: int = 5, seed: int = 0, stratify=None) -> np.ndarray:
    """Fold number (0..folds-1) for every row; stratified folds deal each
    shuffled class round-robin so class proportions match across folds."""
    if n < folds:
        raise ValueError(f"need at least {folds} rows for {folds} folds")
    rng = make_rng(seed, "folds")
    fold_of = np.empty(n, dtype=np.int64)
    if stratify is None:
        perm = rng.permutation(n)
        fold_of[perm] = np.arange(n) % folds
        return fold_of
    labels = np.asarray(stratify)
    offset = 0
    for c in np.unique(labels):
        idx = rng.permutation(np.flatnonzero(labels == c))
        if len(idx) < folds:
            raise ValueError(f"class {c!r} has {len(idx)} rows, fewer than {folds} folds")
        fold_of[idx] = (np.arange(len(idx)) + offset) % folds
        offset += len(idx)
    return fold_of
