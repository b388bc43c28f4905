"""Regression and classification metrics, ROC curves and Gini importance."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from onlineage.platforms import N_PLATFORMS, PLATFORMS


@dataclass
class RegressionMetrics:
    mae: float
    rmse: float
    r_squared: float  # nan when undefined (constant target, imperfect fit)

    @property
    def r_squared_defined(self) -> bool:
        return not math.isnan(self.r_squared)


def _pair(y, y_hat):
    y = np.asarray(y, dtype=float).ravel()
    y_hat = np.asarray(y_hat, dtype=float).ravel()
    if len(y) != len(y_hat):
        raise ValueError(f"length mismatch: {len(y)} vs {len(y_hat)}")
    if len(y) == 0:
        raise ValueError("no values to evaluate")
    return y, y_hat


def regression_metrics(y, y_hat) -> RegressionMetrics:
    y, y_hat = _pair(y, y_hat)
    err = y - y_hat
    ss_res = float(np.sum(err ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot > 0:
        r2 = 1.0 - ss_res / ss_tot
    else:
        r2 = 1.0 if ss_res == 0 else math.nan
    return RegressionMetrics(float(np.mean(np.abs(err))), math.sqrt(ss_res / len(y)), r2)


@dataclass
class ClassificationMetrics:
    accuracy: float
    precision: np.ndarray  # per class (0, 1)
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray
    confusion: np.ndarray  # rows true class, columns predicted class
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    flags: list[str] = field(default_factory=list)


def classification_metrics(y, y_hat) -> ClassificationMetrics:
    """Accuracy plus per-class and support-weighted precision/recall/F1.

    A class that is never predicted gets precision 0 (flagged); a class with
    no support gets weight 0 in the averages.
    """
    y, y_hat = _pair(y, y_hat)
    y = y.astype(np.int64)
    y_hat = y_hat.astype(np.int64)
    if not (np.isin(y, (0, 1)).all() and np.isin(y_hat, (0, 1)).all()):
        raise ValueError("labels must be 0 or 1")
    n = len(y)
    confusion = np.zeros((2, 2), dtype=np.int64)
    np.add.at(confusion, (y, y_hat), 1)
    tp = np.diag(confusion)
    support = confusion.sum(axis=1)
    predicted = confusion.sum(axis=0)
    flags = []
    precision = np.zeros(2)
    recall = np.zeros(2)
    f1 = np.zeros(2)
    for c in (0, 1):
        if predicted[c]:
            precision[c] = tp[c] / predicted[c]
        elif support[c]:
            flags.append(f"class {c} never predicted: precision set to 0")
        if support[c]:
            recall[c] = tp[c] / support[c]
        if precision[c] + recall[c] > 0:
            f1[c] = 2 * precision[c] * recall[c] / (precision[c] + recall[c])
    weights = support / n
    accuracy = float(tp.sum() / n)
    return ClassificationMetrics(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        support=support,
        confusion=confusion,
        weighted_precision=float(weights @ precision),
        # sum_c (s_c/n)(tp_c/s_c) simplifies to sum_c tp_c / n
        weighted_recall=accuracy,
        weighted_f1=float(weights @ f1),
        flags=flags,
    )


@dataclass
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float


def roc_auc(y, scores) -> RocCurve:
    """ROC points at every distinct score (descending) and trapezoid AUC.

    Tied scores collapse into a single step, which gives ties half credit.
    """
    y, scores = _pair(y, scores)
    pos = y == 1
    n_pos = int(pos.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC needs both classes present")
    order = np.argsort(-scores, kind="mergesort")
    s = scores[order]
    p = pos[order].astype(np.int64)
    last_of_group = np.r_[s[1:] != s[:-1], True]
    tps = np.cumsum(p)[last_of_group]
    fps = np.cumsum(1 - p)[last_of_group]
    tpr = np.r_[0, tps] / n_pos
    fpr = np.r_[0, fps] / n_neg
    thresholds = np.r_[np.inf, s[last_of_group]]
    # trapezoids in integer counts, one division at the end
    fp_all = np.r_[0, fps]
    tp_all = np.r_[0, tps]
    area2 = np.sum(np.diff(fp_all) * (tp_all[1:] + tp_all[:-1]))
    return RocCurve(fpr, tpr, thresholds, float(area2) / (2.0 * n_pos * n_neg))


@dataclass
class ImportanceVector:
    weights: np.ndarray
    source: str = ""
    uniform_fallback: bool = False


def _tree_importance(tree) -> tuple[np.ndarray, bool]:
    raw = tree.raw_importance()
    total = raw.sum()
    if total <= 0:
        return np.full(tree.n_features, 1.0 / tree.n_features), True
    return raw / total, False


def gini_importance(model, source: str = "") -> ImportanceVector:
    """Impurity-decrease importance of a tree or forest, summing to one.

    Each split contributes (share of the tree's samples at the node) x (its
    impurity decrease) to its feature; per-tree vectors are normalized, then
    averaged over a forest. A tree without splits counts as uniform.
    """
    from onlineage.models.forest import RandomForest
    from onlineage.models.selection import TrainedModel
    from onlineage.models.tree import DecisionTree

    if isinstance(model, TrainedModel):
        source = source or model.family
        model = model.model
    if isinstance(model, DecisionTree):
        w, fallback = _tree_importance(model)
    elif isinstance(model, RandomForest):
        parts = [_tree_importance(t) for t in model.trees]
        w = np.mean([p[0] for p in parts], axis=0)
        w = w / w.sum()
        fallback = all(p[1] for p in parts)
    else:
        raise TypeError(f"Gini importance needs a tree or forest, got {type(model).__name__}")
    return ImportanceVector(w, source, fallback)


def top_k_features(importance: ImportanceVector | np.ndarray, k: int = 10,
                   names=PLATFORMS) -> list[tuple[str, float]]:
    """Highest weights first; equal weights keep canonical platform order."""
    w = importance.weights if isinstance(importance, ImportanceVector) else np.asarray(importance)
    k = max(0, min(k, len(w)))
    order = sorted(range(len(w)), key=lambda i: (-w[i], i))
    return [(names[i], float(w[i])) for i in order[:k]]


def leading_features(importance, share: float = 0.5, cap: int = 2, names=PLATFORMS) -> list[str]:
    """Top features, in order, until their cumulative weight reaches ``share``
    (at most ``cap``)."""
    out = []
    total = 0.0
    for name, weight in top_k_features(importance, N_PLATFORMS, names):
        out.append(name)
        total += weight
        if total >= share or len(out) >= cap:
            break
    return out
