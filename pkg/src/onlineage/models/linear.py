"""Ordinary least squares."""

import numpy as np

from onlineage.models.base import REGRESSION, Model, check_xy

RIDGE_JITTER = 1e-8


class LinearModel(Model):
    kind = "linear"
    task = REGRESSION

    def __init__(self, weights, intercept):
        self.weights = np.asarray(weights, dtype=float)
        self.intercept = float(intercept)
        self.n_features = len(self.weights)

    def predict(self, X):
        return self._check_X(X) @ self.weights + self.intercept

    def state(self):
        return {"weights": self.weights, "intercept": self.intercept}

    @classmethod
    def from_state(cls, state):
        return cls(state["weights"], state["intercept"])


def fit_linear_regression(X, y) -> LinearModel:
    """Least squares with an intercept via the normal equations.

    Columns are centred first so the intercept is unpenalised; a 1e-8 jitter
    on the Gram diagonal keeps rank-deficient designs solvable.
    """
    X, y = check_xy(X, y)
    x_mean = X.mean(axis=0)
    y_mean = y.mean()
    Xc = X - x_mean
    gram = Xc.T @ Xc
    gram[np.diag_indices_from(gram)] += RIDGE_JITTER
    w = np.linalg.solve(gram, Xc.T @ (y - y_mean))
    return LinearModel(w, y_mean - x_mean @ w)
