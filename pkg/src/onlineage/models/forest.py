"""Random forests of CART trees."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from onlineage.models.base import CLASSIFICATION, REGRESSION, Model, check_task, check_xy
from onlineage.models.tree import DecisionTree, grow_tree, max_features_for
from onlineage.rng import stream


class RandomForest(Model):
    kind = "forest"

    def __init__(self, task, n_features, trees, seed, max_features, params=None):
        self.task = task
        self.n_features = int(n_features)
        self.trees: list[DecisionTree] = list(trees)
        self.seed = int(seed)
        self.max_features = int(max_features)
        self.params = dict(params or {})

    def _leaf_values(self, X) -> np.ndarray:
        X = self._check_X(X)
        return np.array([t.value[t.apply(X)] for t in self.trees])

    def predict(self, X):
        values = self._leaf_values(X)
        if self.task == REGRESSION:
            return values.mean(axis=0)
        # hard majority vote of per-tree classes; an even split goes to class 0
        votes = (values > 0.5).mean(axis=0)
        return (votes > 0.5).astype(np.int64)

    def predict_score(self, X):
        self._require_classifier()
        return self._leaf_values(X).mean(axis=0)

    def truncated(self, n_trees: int) -> "RandomForest":
        """The forest made of the first ``n_trees`` trees, which is exactly the
        forest a fit with ``n_trees`` and the same seed would produce."""
        params = dict(self.params, n_trees=n_trees)
        return RandomForest(self.task, self.n_features, self.trees[:n_trees], self.seed,
                            self.max_features, params)

    def state(self):
        return {
            "task": self.task,
            "n_features": self.n_features,
            "seed": self.seed,
            "max_features": self.max_features,
            "params": self.params,
            "trees": [t.state() for t in self.trees],
        }

    @classmethod
    def from_state(cls, state):
        trees = [DecisionTree.from_state(t) for t in state["trees"]]
        return cls(state["task"], state["n_features"], trees, state["seed"],
                   state["max_features"], state["params"])


def _tree_job(X, y, task, seed, index, max_depth, min_samples_leaf, max_features):
    n, d = X.shape
    rng = stream(seed, index)
    boot = rng.integers(0, n, size=n)
    keys = rng.random((2 * n + 1, d)) if max_features < d else None
    return grow_tree(X, y, task, samples=boot, max_depth=max_depth,
                     min_samples_leaf=min_samples_leaf, max_features=max_features, keys=keys)


def fit_random_forest(X, y, task=REGRESSION, n_trees=100, max_features=None, max_depth=None,
                      min_samples_leaf=1, seed=0, n_jobs=1) -> RandomForest:
    """Bagged CART trees with a fresh random feature subset at every node.

    Tree ``i`` draws its size-n bootstrap and its per-node feature subsets
    from stream (seed, i), so the result does not depend on ``n_jobs`` or on
    the order trees finish in. ``max_features`` defaults to ceil(sqrt(d)) for
    classification and ceil(d/3) for regression.
    """
    check_task(task)
    X, y = check_xy(X, y, task)
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    d = X.shape[1]
    m = max_features_for(task, d) if max_features is None else int(max_features)
    if not 1 <= m <= d:
        raise ValueError(f"max_features must be in [1, {d}]")
    args = (max_depth, min_samples_leaf, m)
    if n_jobs == 1:
        trees = [_tree_job(X, y, task, seed, i, *args) for i in range(n_trees)]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs if n_jobs > 0 else None) as pool:
            trees = list(pool.map(lambda i: _tree_job(X, y, task, seed, i, *args), range(n_trees)))
    params = {"n_trees": n_trees, "max_features": m, "max_depth": max_depth,
              "min_samples_leaf": min_samples_leaf}
    return RandomForest(task, d, trees, seed, m, params)


__all__ = ["RandomForest", "fit_random_forest", "CLASSIFICATION", "REGRESSION"]
