"""L2-regularised logistic regression by gradient descent with backtracking."""

import numpy as np

from onlineage.models.base import CLASSIFICATION, Model, check_xy, require_two_classes


def _sigmoid(z):
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def objective(w, b, X, y, lam):
    """Mean log-loss plus (lam/2)*||w||^2; the intercept is not penalised."""
    z = X @ w + b
    # log(1 + e^z) - y*z, computed stably
    return float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * lam * (w @ w))


def gradient(w, b, X, y, lam):
    r = _sigmoid(X @ w + b) - y
    return X.T @ r / len(y) + lam * w, float(r.mean())


class LogisticModel(Model):
    kind = "logistic"
    task = CLASSIFICATION

    def __init__(self, weights, intercept, lam, losses=None, n_iter=0):
        self.weights = np.asarray(weights, dtype=float)
        self.intercept = float(intercept)
        self.lam = float(lam)
        self.losses = list(losses or [])
        self.n_iter = int(n_iter)
        self.n_features = len(self.weights)

    def predict_score(self, X):
        return _sigmoid(self._check_X(X) @ self.weights + self.intercept)

    def predict(self, X):
        return (self.predict_score(X) >= 0.5).astype(np.int64)

    def state(self):
        return {"weights": self.weights, "intercept": self.intercept, "lam": self.lam,
                "losses": self.losses, "n_iter": self.n_iter}

    @classmethod
    def from_state(cls, state):
        return cls(state["weights"], state["intercept"], state["lam"], state["losses"],
                   state["n_iter"])


def fit_logistic_regression(X, y, lam=1e-4, max_iter=1000, tol=1e-6) -> LogisticModel:
    """Full-batch gradient descent with Armijo backtracking.

    Stops when the gradient's infinity norm drops below ``tol`` or after
    ``max_iter`` iterations. ``losses`` holds the objective after every
    accepted step.
    """
    X, y = check_xy(X, y, CLASSIFICATION)
    require_two_classes(y)
    w = np.zeros(X.shape[1])
    b = 0.0
    f = objective(w, b, X, y, lam)
    losses = [f]
    step = 1.0
    for _ in range(max_iter):
        gw, gb = gradient(w, b, X, y, lam)
        gnorm = max(np.max(np.abs(gw), initial=0.0), abs(gb))
        if gnorm < tol:
            break
        sq = gw @ gw + gb * gb
        step = min(step * 2.0, 1e6)
        while True:
            w_new, b_new = w - step * gw, b - step * gb
            f_new = objective(w_new, b_new, X, y, lam)
            if f_new <= f - 0.5 * step * sq or step < 1e-16:
                break
            step *= 0.5
        if f_new > f:
            break
        w, b, f = w_new, b_new, f_new
        losses.append(f)
    return LogisticModel(w, b, lam, losses, len(losses) - 1)
