import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from onlineage.evaluation import (
    classification_metrics,
    gini_importance,
    leading_features,
    regression_metrics,
    roc_auc,
    top_k_features,
)
from onlineage.models.base import CLASSIFICATION, REGRESSION
from onlineage.models.forest import fit_random_forest
from onlineage.models.linear import fit_linear_regression
from onlineage.models.tree import fit_decision_tree
from onlineage.platforms import PLATFORMS
from oracles import confusion_report, pairwise_auc

# fixed cases: (y, y_hat)
FIXED_CASES = [
    ([1, 1, 1, 0], [1, 0, 1, 0]),
    ([0, 0, 1, 1], [0, 0, 1, 1]),
    ([0, 0, 1, 1], [1, 1, 0, 0]),
    ([1, 1, 1, 1], [1, 1, 1, 1]),
    ([1, 1, 1, 1], [0, 1, 0, 1]),
    ([0, 0, 0, 0], [0, 1, 0, 0]),
    ([0, 1, 0, 1, 0, 1], [1, 1, 1, 1, 1, 1]),
    ([0, 1, 0, 1, 0, 1], [0, 0, 0, 0, 0, 0]),
    ([1, 0, 0, 0, 0], [1, 0, 0, 0, 1]),
    ([1, 0, 0, 0, 0], [0, 1, 0, 0, 0]),
    ([1, 1, 0, 0, 1, 0, 1], [1, 0, 0, 1, 1, 0, 1]),
    ([0, 1], [1, 0]),
    ([0, 1], [0, 1]),
    ([1], [1]),
    ([0], [1]),
    ([1, 1, 1, 0, 0, 0, 0, 0], [1, 1, 0, 0, 0, 0, 0, 1]),
    ([1, 0, 1, 0, 1, 0, 1, 0, 1, 0], [1, 1, 1, 1, 1, 0, 0, 0, 0, 0]),
    ([0, 0, 0, 1, 1, 1, 1, 1, 1], [0, 1, 1, 1, 1, 1, 1, 1, 0]),
    ([1, 1, 0], [0, 0, 1]),
    ([0, 0, 0, 0, 1], [0, 0, 0, 0, 0]),
]


def test_regression_examples():
    m = regression_metrics([1, 2, 3], [1, 2, 3])
    assert (m.mae, m.rmse, m.r_squared) == (0, 0, 1)
    y = np.array([1.0, 4.0, 7.0])
    assert regression_metrics(y, np.full(3, y.mean())).r_squared == pytest.approx(0)
    m = regression_metrics([0, 2, 4], [1, 2, 3])
    assert m.mae == pytest.approx(2 / 3)
    assert m.rmse == pytest.approx(math.sqrt(2 / 3))
    assert m.r_squared == pytest.approx(0.75)


def test_regression_constant_target():
    assert regression_metrics([2, 2], [2, 2]).r_squared == 1
    m = regression_metrics([2, 2], [1, 3])
    assert math.isnan(m.r_squared) and not m.r_squared_defined
    with pytest.raises(ValueError):
        regression_metrics([1, 2], [1])
    with pytest.raises(ValueError):
        regression_metrics([], [])


@given(st.lists(st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)), min_size=2, max_size=40),
       st.randoms())
def test_regression_permutation_invariant(pairs, rnd):
    a = regression_metrics(*zip(*pairs))
    shuffled = list(pairs)
    rnd.shuffle(shuffled)
    b = regression_metrics(*zip(*shuffled))
    assert a.mae == pytest.approx(b.mae) and a.rmse == pytest.approx(b.rmse)
    assert a.mae >= 0 and a.rmse >= 0
    if a.r_squared_defined:
        assert a.r_squared <= 1 + 1e-12


def test_classification_worked_example():
    m = classification_metrics([1, 1, 1, 0], [1, 0, 1, 0])
    assert m.accuracy == 0.75
    assert m.precision.tolist() == pytest.approx([0.5, 1.0])
    assert m.recall.tolist() == pytest.approx([1.0, 2 / 3])
    assert m.f1.tolist() == pytest.approx([2 / 3, 0.8])
    assert m.weighted_f1 == pytest.approx((3 * 0.8 + 2 / 3) / 4)


@pytest.mark.parametrize("y,y_hat", FIXED_CASES)
def test_weighted_scores_match_confusion_table(y, y_hat):
    m = classification_metrics(y, y_hat)
    expected = confusion_report(y, y_hat)
    assert m.accuracy == pytest.approx(expected["accuracy"], abs=1e-12)
    assert m.weighted_precision == pytest.approx(expected["precision"], abs=1e-12)
    assert m.weighted_recall == pytest.approx(expected["recall"], abs=1e-12)
    assert m.weighted_f1 == pytest.approx(expected["f1"], abs=1e-12)


def test_degenerate_support_and_flags():
    m = classification_metrics([1, 1, 1], [1, 1, 1])
    assert m.accuracy == 1 and m.weighted_f1 == 1 and m.support[0] == 0
    m = classification_metrics([0, 1, 1], [1, 1, 1])
    assert m.precision[0] == 0 and m.flags


def test_weighted_recall_is_accuracy_1000_cases():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        n = int(rng.integers(1, 50))
        y = rng.integers(0, 2, n)
        y_hat = rng.integers(0, 2, n)
        m = classification_metrics(y, y_hat)
        assert m.weighted_recall == m.accuracy
        assert m.weighted_recall == pytest.approx(confusion_report(y, y_hat)["recall"], abs=1e-12)
        for v in (m.accuracy, m.weighted_precision, m.weighted_f1):
            assert 0 <= v <= 1


def test_roc_examples():
    assert roc_auc([0, 0, 1, 1], [0.1, 0.2, 0.8, 0.9]).auc == 1.0
    flat = roc_auc([0, 1, 0, 1], [0.5] * 4)
    assert flat.auc == 0.5
    assert flat.fpr.tolist() == [0, 1] and flat.tpr.tolist() == [0, 1]
    with pytest.raises(ValueError):
        roc_auc([1, 1], [0.2, 0.3])


def test_auc_equals_pair_statistic():
    rng = np.random.default_rng(1)
    for n in list(range(2, 11)) * 5 + [50, 120, 200]:
        y = rng.integers(0, 2, n)
        if len(set(y)) < 2:
            y[0], y[1] = 0, 1
        scores = rng.integers(0, 6, n) / 5.0  # many ties
        roc = roc_auc(y, scores)
        assert abs(roc.auc - pairwise_auc(y, scores)) <= 1e-12
        assert roc.fpr[0] == 0 and roc.tpr[0] == 0 and roc.fpr[-1] == 1 and roc.tpr[-1] == 1
        assert np.all(np.diff(roc.fpr) >= 0) and np.all(np.diff(roc.tpr) >= 0)


def test_single_split_importance():
    X = np.column_stack([np.zeros(8), np.arange(8.0)])
    t = fit_decision_tree(X, (np.arange(8) >= 4).astype(float), CLASSIFICATION)
    assert gini_importance(t).weights.tolist() == [0.0, 1.0]


def test_splitless_tree_uniform():
    t = fit_decision_tree(np.zeros((5, 4)), np.ones(5))
    imp = gini_importance(t)
    assert imp.uniform_fallback and np.allclose(imp.weights, 0.25)


def test_importance_needs_tree_family():
    with pytest.raises(TypeError):
        gini_importance(fit_linear_regression(np.eye(3), [1, 2, 3]))


def test_importance_rank_invariant_under_monotone_transform():
    rng = np.random.default_rng(2)
    X = rng.gamma(2.0, 3.0, size=(300, 4))
    y = X[:, 1] * 2 + np.sqrt(X[:, 2]) + rng.normal(size=300)
    Xt = X.copy()
    Xt[:, 1] = np.argsort(np.argsort(X[:, 1]))  # ranks
    a = gini_importance(fit_random_forest(X, y, REGRESSION, n_trees=10, seed=0))
    b = gini_importance(fit_random_forest(Xt, y, REGRESSION, n_trees=10, seed=0))
    assert np.allclose(a.weights, b.weights, atol=1e-12)
    assert np.argsort(a.weights).tolist() == np.argsort(b.weights).tolist()


def test_forest_importance_sums_to_one():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(100, 21))
    f = fit_random_forest(X, (X[:, 4] > 0).astype(float), CLASSIFICATION, n_trees=15, seed=1)
    assert abs(gini_importance(f).weights.sum() - 1) <= 1e-9


def test_top_k():
    uniform = np.full(21, 1 / 21)
    assert [p for p, _ in top_k_features(uniform)] == list(PLATFORMS[:10])
    w = np.zeros(21)
    w[:3] = [0.5, 0.3, 0.2]
    assert top_k_features(w, 2) == [(PLATFORMS[0], 0.5), (PLATFORMS[1], 0.3)]
    assert len(top_k_features(w, 50)) == 21
    assert leading_features(w) == [PLATFORMS[0]]
    w[:3] = [0.4, 0.35, 0.25]
    assert leading_features(w) == [PLATFORMS[0], PLATFORMS[1]]
