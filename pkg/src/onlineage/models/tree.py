"""CART decision trees (regression and binary classification).

Splits are found by an exhaustive scan over each candidate feature's sorted
values, with thresholds at midpoints between consecutive distinct values and
``x <= threshold`` going left. Ties in gain go to the lowest feature index,
then the lowest threshold.
"""

from __future__ import annotations

import math

import numba
import numpy as np

from onlineage.models.base import CLASSIFICATION, REGRESSION, Model, check_task, check_xy

# Gains closer than this (relative to the node impurity) count as ties.
TIE_RTOL = 1e-12


@numba.njit(cache=True, nogil=True)
def _impurity(classify, n, s, ss):
    # s, ss: sum and sum of squares of the (centred) targets
    if n == 0:
        return 0.0
    if classify:
        p1 = s / n
        p0 = (n - s) / n
        return 1.0 - p0 * p0 - p1 * p1
    v = ss / n - (s / n) * (s / n)
    return v if v > 0.0 else 0.0


@numba.njit(cache=True, nogil=True)
def _best_split(X, y, samples, start, end, feats, classify, min_leaf, parent_imp, shift):
    n = end - start
    best_gain = 0.0
    best_f = -1
    best_t = 0.0
    tol = TIE_RTOL * max(parent_imp, 1e-300)
    vals = np.empty(n)
    ys = np.empty(n)
    for f in feats:
        for i in range(n):
            vals[i] = X[samples[start + i], f]
        order = np.argsort(vals, kind="mergesort")
        sv = vals[order]
        if sv[0] == sv[n - 1]:
            continue
        for i in range(n):
            ys[i] = y[samples[start + order[i]]] - shift
        tot_s = 0.0
        tot_ss = 0.0
        for i in range(n):
            tot_s += ys[i]
            tot_ss += ys[i] * ys[i]
        ls = 0.0
        lss = 0.0
        for i in range(n - 1):
            ls += ys[i]
            lss += ys[i] * ys[i]
            nl = i + 1
            nr = n - nl
            if sv[i + 1] <= sv[i] or nl < min_leaf or nr < min_leaf:
                continue
            if classify:
                imp_l = _impurity(True, nl, ls, 0.0)
                imp_r = _impurity(True, nr, tot_s - ls, 0.0)
            else:
                imp_l = _impurity(False, nl, ls, lss)
                imp_r = _impurity(False, nr, tot_s - ls, tot_ss - lss)
            gain = parent_imp - (nl / n) * imp_l - (nr / n) * imp_r
            if gain > best_gain + tol and gain > tol:
                best_gain = gain
                best_f = f
                t = (sv[i] + sv[i + 1]) / 2.0
                best_t = t if t < sv[i + 1] else sv[i]
    return best_f, best_t, best_gain


@numba.njit(cache=True, nogil=True)
def _grow(X, y, samples, classify, max_depth, min_leaf, max_features, keys):
    n_total = samples.shape[0]
    d = X.shape[1]
    cap = 2 * n_total + 1
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    value = np.zeros(cap)
    impurity = np.zeros(cap)
    n_node = np.zeros(cap, dtype=np.int64)
    gain_arr = np.zeros(cap)

    stack_node = np.empty(cap, dtype=np.int64)
    stack_start = np.empty(cap, dtype=np.int64)
    stack_end = np.empty(cap, dtype=np.int64)
    stack_depth = np.empty(cap, dtype=np.int64)
    top = 0
    stack_node[0] = 0
    stack_start[0] = 0
    stack_end[0] = n_total
    stack_depth[0] = 0
    top = 1
    n_nodes = 1
    all_feats = np.arange(d)

    while top > 0:
        top -= 1
        node = stack_node[top]
        start = stack_start[top]
        end = stack_end[top]
        depth = stack_depth[top]
        n = end - start

        s = 0.0
        lo = np.inf
        hi = -np.inf
        for i in range(start, end):
            v = y[samples[i]]
            s += v
            lo = min(lo, v)
            hi = max(hi, v)
        mean = s / n
        n_node[node] = n
        value[node] = mean
        if classify:
            imp = _impurity(True, n, s, 0.0)
        else:
            ss = 0.0
            for i in range(start, end):
                c = y[samples[i]] - mean
                ss += c * c
            imp = ss / n
        impurity[node] = imp

        if lo == hi or (max_depth >= 0 and depth >= max_depth) or n < 2 * min_leaf:
            continue

        if max_features < d:
            feats = np.sort(np.argsort(keys[node])[:max_features])
        else:
            feats = all_feats
        shift = 0.0 if classify else mean
        f, t, g = _best_split(X, y, samples, start, end, feats, classify, min_leaf, imp, shift)
        if f < 0:
            continue

        # partition samples[start:end] stably into <= t and > t
        buf = samples[start:end].copy()
        k = start
        for i in range(n):
            if X[buf[i], f] <= t:
                samples[k] = buf[i]
                k += 1
        mid = k
        for i in range(n):
            if X[buf[i], f] > t:
                samples[k] = buf[i]
                k += 1

        feature[node] = f
        threshold[node] = t
        gain_arr[node] = g
        left[node] = n_nodes
        right[node] = n_nodes + 1
        # push right first so the left subtree gets the lower node ids
        stack_node[top] = n_nodes + 1
        stack_start[top] = mid
        stack_end[top] = end
        stack_depth[top] = depth + 1
        top += 1
        stack_node[top] = n_nodes
        stack_start[top] = start
        stack_end[top] = mid
        stack_depth[top] = depth + 1
        top += 1
        n_nodes += 2

    return (feature[:n_nodes], threshold[:n_nodes], left[:n_nodes], right[:n_nodes],
            value[:n_nodes], impurity[:n_nodes], n_node[:n_nodes], gain_arr[:n_nodes])


@numba.njit(cache=True, nogil=True)
def _apply(X, feature, threshold, left, right):
    out = np.empty(X.shape[0], dtype=np.int64)
    for r in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            if X[r, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[r] = node
    return out


class DecisionTree(Model):
    """A fitted CART tree stored as flat node arrays.

    Leaves carry the mean target (regression) or the positive-class fraction
    (classification). Internal nodes record the impurity decrease of their
    split in ``gain``.
    """

    kind = "tree"

    def __init__(self, task, n_features, feature, threshold, left, right, value, impurity,
                 n_node_samples, gain, params=None):
        self.task = task
        self.n_features = int(n_features)
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=float)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=float)
        self.impurity = np.asarray(impurity, dtype=float)
        self.n_node_samples = np.asarray(n_node_samples, dtype=np.int64)
        self.gain = np.asarray(gain, dtype=float)
        self.params = dict(params or {})

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def is_leaf(self) -> np.ndarray:
        return self.feature < 0

    def apply(self, X) -> np.ndarray:
        X = self._check_X(X)
        return _apply(X, self.feature, self.threshold, self.left, self.right)

    def predict_score(self, X) -> np.ndarray:
        self._require_classifier()
        return self.value[self.apply(X)]

    def predict(self, X) -> np.ndarray:
        leaf_values = self.value[self.apply(X)]
        if self.task == CLASSIFICATION:
            # argmax of (1 - p, p) with an exact tie going to class 0
            return (leaf_values > 0.5).astype(np.int64)
        return leaf_values

    def raw_importance(self) -> np.ndarray:
        """Sum of (node sample share x impurity decrease) per split feature."""
        imp = np.zeros(self.n_features)
        if self.n_nodes == 0:
            return imp
        root = self.n_node_samples[0]
        for node in np.flatnonzero(self.feature >= 0):
            imp[self.feature[node]] += self.n_node_samples[node] / root * self.gain[node]
        return imp

    def state(self) -> dict:
        return {
            "task": self.task,
            "n_features": self.n_features,
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left,
            "right": self.right,
            "value": self.value,
            "impurity": self.impurity,
            "n_node_samples": self.n_node_samples,
            "gain": self.gain,
            "params": self.params,
        }

    @classmethod
    def from_state(cls, state: dict) -> "DecisionTree":
        return cls(**state)


def grow_tree(X, y, task, samples=None, max_depth=None, min_samples_leaf=1,
              max_features=None, keys=None, params=None) -> DecisionTree:
    """Grow a tree on rows ``samples`` of ``X`` (duplicates allowed)."""
    n, d = X.shape
    if samples is None:
        samples = np.arange(n, dtype=np.int64)
    samples = np.array(samples, dtype=np.int64)
    m = d if max_features is None else int(max_features)
    if keys is None:
        keys = np.zeros((1, d))
    arrays = _grow(
        X, y, samples, task == CLASSIFICATION,
        -1 if max_depth is None else int(max_depth),
        int(min_samples_leaf), m, keys,
    )
    return DecisionTree(task, d, *arrays, params=params)


def fit_decision_tree(X, y, task=REGRESSION, max_depth=None, min_samples_leaf=1) -> DecisionTree:
    """Fit a single CART tree using every feature at every node."""
    check_task(task)
    X, y = check_xy(X, y, task)
    if min_samples_leaf < 1:
        raise ValueError("min_samples_leaf must be >= 1")
    params = {"max_depth": max_depth, "min_samples_leaf": min_samples_leaf}
    return grow_tree(X, y, task, max_depth=max_depth, min_samples_leaf=min_samples_leaf,
                     params=params)


def max_features_for(task: str, n_features: int) -> int:
    """Features examined per node in a forest: ceil(sqrt(d)) or ceil(d/3)."""
    if task == CLASSIFICATION:
        return max(1, math.ceil(math.sqrt(n_features)))
    return max(1, math.ceil(n_features / 3))
