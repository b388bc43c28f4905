import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from onlineage.models.linear import fit_linear_regression
from onlineage.models.preprocessing import (
    apply_standardizer,
    fit_standardizer,
    kfold_indices,
    train_test_split,
)
from oracles import normal_equations


def test_exact_line():
    x = np.linspace(-3, 5, 20)
    m = fit_linear_regression(x[:, None], 2 * x + 1)
    assert m.weights[0] == pytest.approx(2, abs=1e-6)
    assert m.intercept == pytest.approx(1, abs=1e-6)


def test_constant_target():
    X = np.random.default_rng(0).normal(size=(15, 3))
    m = fit_linear_regression(X, np.full(15, 4.5))
    assert np.allclose(m.weights, 0, atol=1e-9)
    assert m.intercept == pytest.approx(4.5)


def test_matches_normal_equations_oracle():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(40, 3))
    y = X @ [1.5, -2, 0.3] + rng.normal(size=40)
    m = fit_linear_regression(X, y)
    w, b = normal_equations(X, y)
    assert np.allclose(m.weights, w, atol=1e-8)
    assert m.intercept == pytest.approx(b, abs=1e-8)


def test_residuals_orthogonal():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(60, 5))
    y = X @ rng.normal(size=5) + rng.normal(size=60)
    Xs = apply_standardizer(fit_standardizer(X), X)
    r = y - fit_linear_regression(Xs, y).predict(Xs)
    assert np.all(np.abs(Xs.T @ r) < 1e-6 * len(y))
    assert abs(r.sum()) < 1e-6 * len(y)


def test_rank_deficient_is_solvable():
    x = np.arange(10.0)
    X = np.column_stack([x, 2 * x, np.zeros(10)])
    m = fit_linear_regression(X, 3 * x + 2)
    assert np.allclose(m.predict(X), 3 * x + 2, atol=1e-5)


def test_empty_training_set():
    with pytest.raises(ValueError):
        fit_linear_regression(np.zeros((0, 2)), np.zeros(0))


def test_standardizer_examples():
    p = fit_standardizer(np.array([[1.0], [3.0]]))
    assert p.mean[0] == 2 and p.scale[0] == 1
    assert apply_standardizer(p, np.array([[1.0], [3.0]])).ravel().tolist() == [-1, 1]
    c = np.array([[5.0], [5.0], [5.0]])
    assert apply_standardizer(fit_standardizer(c), c).ravel().tolist() == [0, 0, 0]
    with pytest.raises(ValueError):
        fit_standardizer(np.array([[np.inf]]))


@given(arrays(float, st.tuples(st.integers(2, 50), st.integers(1, 21)),
              elements=st.floats(-1e4, 1e4)))
def test_standardized_moments(X):
    Z = apply_standardizer(fit_standardizer(X), X)
    assert np.all(np.abs(Z.mean(axis=0)) < 1e-9)
    sd = X.std(axis=0)
    ok = sd > 1e-6 * (1 + np.abs(X).max(axis=0))
    assert np.allclose(Z.var(axis=0)[ok], 1, atol=1e-6)


def test_random_matrix_means():
    X = np.random.default_rng(3).normal(5, 3, size=(50, 21))
    Z = apply_standardizer(fit_standardizer(X), X)
    assert np.all(np.abs(Z.mean(axis=0)) < 1e-9)


def test_split_counts_and_determinism():
    s = train_test_split(10, 0.8, seed=4)
    assert len(s.train) == 8 and len(s.test) == 2
    assert not set(s.train) & set(s.test)
    t = train_test_split(10, 0.8, seed=4)
    assert s.train.tolist() == t.train.tolist()


def test_stratified_rounding_rule():
    labels = np.array([1] * 6 + [0] * 4)
    s = train_test_split(10, 0.8, seed=0, stratify=labels)
    assert int(labels[s.train].sum()) == 5 and int((labels[s.train] == 0).sum()) == 3


@given(st.integers(5, 300), st.integers(0, 10**6), st.booleans())
def test_split_partition(n, seed, stratified):
    labels = np.arange(n) % 2 if stratified else None
    s = train_test_split(n, 0.8, seed, labels)
    assert sorted(s.train.tolist() + s.test.tolist()) == list(range(n))
    assert abs(len(s.train) - 0.8 * n) <= 1


def test_split_errors():
    with pytest.raises(ValueError):
        train_test_split(4)
    with pytest.raises(ValueError):
        train_test_split(10, stratify=[0] * 9 + [1])


@given(st.integers(5, 200), st.integers(0, 1000), st.booleans())
def test_kfold_partition(n, seed, stratified):
    labels = (np.arange(n) % 3 == 0).astype(int) if stratified else None
    if stratified and min(np.bincount(labels)) < 5:
        with pytest.raises(ValueError):
            kfold_indices(n, 5, seed, labels)
        return
    folds = kfold_indices(n, 5, seed, labels)
    assert folds.min() == 0 and folds.max() == 4
    assert np.bincount(folds).max() - np.bincount(folds).min() <= 2
