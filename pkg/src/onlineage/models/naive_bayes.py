"""Gaussian naive Bayes for binary labels."""

import numpy as np
from scipy.special import logsumexp

from onlineage.models.base import CLASSIFICATION, Model, check_xy, require_two_classes


class GaussianNB(Model):
    kind = "gnb"
    task = CLASSIFICATION

    def __init__(self, priors, means, variances, var_smoothing=1e-9):
        self.priors = np.asarray(priors, dtype=float)
        self.means = np.asarray(means, dtype=float)
        self.variances = np.asarray(variances, dtype=float)
        self.var_smoothing = float(var_smoothing)
        self.n_features = self.means.shape[1]

    def joint_log_likelihood(self, X) -> np.ndarray:
        """log prior + sum of per-feature Gaussian log densities, shape (n, 2)."""
        X = self._check_X(X)
        out = np.empty((len(X), 2))
        for c in range(2):
            var = self.variances[c]
            ll = -0.5 * np.sum(np.log(2.0 * np.pi * var)) - 0.5 * np.sum(
                (X - self.means[c]) ** 2 / var, axis=1
            )
            out[:, c] = np.log(self.priors[c]) + ll
        return out

    def predict_proba(self, X):
        jll = self.joint_log_likelihood(X)
        return np.exp(jll - logsumexp(jll, axis=1, keepdims=True))

    def predict_score(self, X):
        return self.predict_proba(X)[:, 1]

    def predict(self, X):
        jll = self.joint_log_likelihood(X)
        # argmax with an exact tie going to class 0
        return (jll[:, 1] > jll[:, 0]).astype(np.int64)

    def state(self):
        return {"priors": self.priors, "means": self.means, "variances": self.variances,
                "var_smoothing": self.var_smoothing}

    @classmethod
    def from_state(cls, state):
        return cls(**state)


def fit_gaussian_nb(X, y, var_smoothing=1e-9) -> GaussianNB:
    """Class frequencies as priors; per-class feature means and variances with
    ``var_smoothing`` times the largest feature variance added to every
    variance (plain ``var_smoothing`` if all features are constant)."""
    X, y = check_xy(X, y, CLASSIFICATION)
    require_two_classes(y)
    eps = var_smoothing * float(np.max(X.var(axis=0)))
    if eps <= 0:
        eps = var_smoothing
    priors, means, variances = [], [], []
    for c in (0, 1):
        rows = X[y == c]
        priors.append(len(rows) / len(X))
        means.append(rows.mean(axis=0))
        variances.append(rows.var(axis=0) + eps)
    return GaussianNB(priors, np.array(means), np.array(variances), var_smoothing)
