"""Model families, fitted-model wrapper and k-fold grid search."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from onlineage.models.base import CLASSIFICATION, REGRESSION, Dataset, Model
from onlineage.models.forest import RandomForest, fit_random_forest
from onlineage.models.linear import fit_linear_regression
from onlineage.models.logistic import fit_logistic_regression
from onlineage.models.mlp import fit_mlp_regressor
from onlineage.models.naive_bayes import fit_gaussian_nb
from onlineage.models.preprocessing import (
    ScalerParams,
    apply_standardizer,
    fit_standardizer,
    kfold_indices,
)
from onlineage.models.tree import fit_decision_tree
from onlineage.platforms import PLATFORMS
from onlineage.rng import derive_seed


@dataclass
class Family:
    name: str
    task: str
    label: str
    fit: Callable[..., Model]
    scaled: bool = False
    grid: dict = field(default_factory=dict)
    fit_grid: Callable | None = None


def _fit_forest_grid(X, y, task, combos, seed):
    """Fit every combination; combos differing only in n_trees share one fit
    (a forest's first k trees are the k-tree forest for the same seed)."""
    out = [None] * len(combos)
    groups: dict[tuple, list[int]] = {}
    for i, params in enumerate(combos):
        key = tuple(sorted((k, v) for k, v in params.items() if k != "n_trees"))
        groups.setdefault(key, []).append(i)
    for key, members in groups.items():
        n_max = max(combos[i].get("n_trees", 100) for i in members)
        forest = fit_random_forest(X, y, task, seed=seed, **dict(key, n_trees=n_max))
        for i in members:
            out[i] = forest.truncated(combos[i].get("n_trees", 100))
    return out


FAMILIES: dict[str, Family] = {
    "linear_reg": Family(
        "linear_reg", REGRESSION, "Multiple Linear Regression",
        lambda X, y, seed: fit_linear_regression(X, y), scaled=True,
    ),
    "tree_reg": Family(
        "tree_reg", REGRESSION, "Decision Tree",
        lambda X, y, seed, **p: fit_decision_tree(X, y, REGRESSION, **p),
        grid={"max_depth": [4, 8, 16, 32], "min_samples_leaf": [1, 5, 10]},
    ),
    "forest_reg": Family(
        "forest_reg", REGRESSION, "Random Forest",
        lambda X, y, seed, **p: fit_random_forest(X, y, REGRESSION, seed=seed, **p),
        grid={"n_trees": [100, 200]},
        fit_grid=lambda X, y, combos, seed: _fit_forest_grid(X, y, REGRESSION, combos, seed),
    ),
    "mlp_reg": Family(
        "mlp_reg", REGRESSION, "Multi-layer Perceptron",
        lambda X, y, seed, **p: fit_mlp_regressor(X, y, seed=seed, **p), scaled=True,
    ),
    "forest_clf": Family(
        "forest_clf", CLASSIFICATION, "Random Forest",
        lambda X, y, seed, **p: fit_random_forest(X, y, CLASSIFICATION, seed=seed, **p),
        grid={"n_trees": [100, 200]},
        fit_grid=lambda X, y, combos, seed: _fit_forest_grid(X, y, CLASSIFICATION, combos, seed),
    ),
    "tree_clf": Family(
        "tree_clf", CLASSIFICATION, "Decision Tree",
        lambda X, y, seed, **p: fit_decision_tree(X, y, CLASSIFICATION, **p),
        grid={"max_depth": [4, 8, 16, 32], "min_samples_leaf": [1, 5, 10]},
    ),
    "logistic_clf": Family(
        "logistic_clf", CLASSIFICATION, "Logistic Regression",
        lambda X, y, seed, **p: fit_logistic_regression(X, y, **p), scaled=True,
        grid={"lam": [1e-4, 1e-2]},
    ),
    "gnb_clf": Family(
        "gnb_clf", CLASSIFICATION, "Gaussian Naive Bayes",
        lambda X, y, seed, **p: fit_gaussian_nb(X, y, **p),
    ),
}

REGRESSION_MODELS = ("linear_reg", "tree_reg", "forest_reg", "mlp_reg")
CLASSIFICATION_MODELS = ("forest_clf", "tree_clf", "logistic_clf", "gnb_clf")


def get_family(name: str) -> Family:
    try:
        return FAMILIES[name]
    except KeyError:
        raise ValueError(f"unknown model {name!r}; choose from {sorted(FAMILIES)}") from None


class TrainedModel:
    """A fitted model plus the preprocessing and provenance needed to use it."""

    def __init__(self, family: str, model: Model, params: dict, seed: int,
                 scaler: ScalerParams | None = None, feature_names=PLATFORMS):
        self.family = family
        self.model = model
        self.params = dict(params)
        self.seed = int(seed)
        self.scaler = scaler
        self.feature_names = tuple(feature_names)

    @property
    def task(self) -> str:
        return get_family(self.family).task

    def _prep(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != len(self.feature_names):
            raise ValueError(f"expected {len(self.feature_names)} feature columns")
        return apply_standardizer(self.scaler, X) if self.scaler is not None else X

    def predict(self, X) -> np.ndarray:
        return self.model.predict(self._prep(X))

    def predict_score(self, X) -> np.ndarray:
        return self.model.predict_score(self._prep(X))


def fit_family(name: str, X, y, params: dict | None = None, seed: int = 0,
               feature_names=PLATFORMS) -> TrainedModel:
    """Fit one family with fixed hyperparameters, standardizing first when the
    family is scale sensitive."""
    fam = get_family(name)
    params = dict(params or {})
    X = np.asarray(X, dtype=float)
    scaler = fit_standardizer(X) if fam.scaled else None
    Xf = apply_standardizer(scaler, X) if scaler is not None else X
    model = fam.fit(Xf, y, seed, **params)
    return TrainedModel(name, model, params, seed, scaler, feature_names)


def _fit_combos(name, X, y, combos, seed):
    fam = get_family(name)
    if fam.fit_grid is None or fam.scaled:
        return [fit_family(name, X, y, p, seed) for p in combos]
    models = fam.fit_grid(np.asarray(X, dtype=float), y, combos, seed)
    return [TrainedModel(name, m, p, seed) for m, p in zip(models, combos)]


def expand_grid(grid: dict | None) -> list[dict]:
    """All combinations in declared order (last key varies fastest)."""
    if not grid:
        return [{}]
    keys = list(grid)
    return [dict(zip(keys, values)) for values in itertools.product(*(grid[k] for k in keys))]


@dataclass
class CVResult:
    family: str
    combos: list[dict]
    fold_scores: np.ndarray
    mean_scores: np.ndarray
    best_index: int
    folds: int
    model: TrainedModel

    @property
    def best_params(self) -> dict:
        return self.combos[self.best_index]


def score(task: str, y_true, y_pred) -> float:
    """Weighted F1 for classification, negative RMSE for regression."""
    from onlineage.evaluation import classification_metrics, regression_metrics

    if task == CLASSIFICATION:
        return classification_metrics(y_true, y_pred).weighted_f1
    return -regression_metrics(y_true, y_pred).rmse


def kfold_grid_search(family: str, grid: dict | None, dataset: Dataset, folds: int = 5,
                      seed: int = 0, scoring: Callable | None = None) -> CVResult:
    """Pick hyperparameters by k-fold cross-validation and refit on all rows.

    Folds are seeded (stratified for classification). Each combination's
    score is the mean of its fold scores; the best mean wins with ties going
    to the earliest combination in grid order. The refit uses ``seed`` itself,
    so a one-combination grid reproduces :func:`fit_family` exactly.
    """
    fam = get_family(family)
    if fam.task != dataset.task:
        raise ValueError(f"{family} is a {fam.task} model but the dataset is {dataset.task}")
    combos = expand_grid(grid if grid is not None else fam.grid)
    n = len(dataset)
    stratify = dataset.y if dataset.task == CLASSIFICATION else None
    fold_of = kfold_indices(n, folds, seed, stratify)
    scorer = scoring or (lambda yt, yp: score(dataset.task, yt, yp))
    fold_scores = np.zeros((len(combos), folds))
    for f in range(folds):
        tr = np.flatnonzero(fold_of != f)
        va = np.flatnonzero(fold_of == f)
        if dataset.task == CLASSIFICATION and len(np.unique(dataset.y[tr])) < 2:
            raise ValueError(f"fold {f} training rows contain a single class")
        fitted = _fit_combos(family, dataset.X[tr], dataset.y[tr], combos,
                             derive_seed(seed, "cv-fold", f))
        for c, model in enumerate(fitted):
            fold_scores[c, f] = scorer(dataset.y[va], model.predict(dataset.X[va]))
    means = fold_scores.mean(axis=1)
    best = int(np.argmax(means))
    model = fit_family(family, dataset.X, dataset.y, combos[best], seed, dataset.feature_names)
    return CVResult(family, combos, fold_scores, means, best, folds, model)
