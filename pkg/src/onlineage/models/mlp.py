"""One-hidden-layer ReLU regressor trained with Adam on mean squared error.

Inputs are expected to be standardized by the caller. The target is centred
and scaled internally and mapped back at prediction time.
"""

from __future__ import annotations

import numpy as np

from onlineage.models.base import REGRESSION, Model, check_xy
from onlineage.rng import make_rng

BETA1 = 0.9
BETA2 = 0.999
EPS = 1e-8


def init_params(n_in: int, hidden: int, rng: np.random.Generator) -> dict:
    """Glorot-uniform weights, zero biases."""
    def glorot(fan_in, fan_out):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-limit, limit, size=(fan_in, fan_out))

    return {
        "W1": glorot(n_in, hidden),
        "b1": np.zeros(hidden),
        "W2": glorot(hidden, 1),
        "b2": np.zeros(1),
    }


def forward(params, X):
    z = X @ params["W1"] + params["b1"]
    h = np.maximum(z, 0.0)
    out = (h @ params["W2"] + params["b2"])[:, 0]
    return out, (z, h)


def loss(params, X, y) -> float:
    out, _ = forward(params, X)
    return float(np.mean((out - y) ** 2))


def loss_and_grad(params, X, y):
    """Mean squared error and its gradient with respect to every parameter."""
    n = len(y)
    out, (z, h) = forward(params, X)
    err = out - y
    d_out = (2.0 / n) * err[:, None]
    grads = {
        "W2": h.T @ d_out,
        "b2": d_out.sum(axis=0),
    }
    d_h = d_out @ params["W2"].T
    d_z = d_h * (z > 0)
    grads["W1"] = X.T @ d_z
    grads["b1"] = d_z.sum(axis=0)
    return float(np.mean(err ** 2)), grads


class MLPRegressor(Model):
    kind = "mlp"
    task = REGRESSION

    def __init__(self, params, y_mean, y_scale, curve=None, hyper=None):
        self.params = {k: np.asarray(v, dtype=float) for k, v in params.items()}
        self.y_mean = float(y_mean)
        self.y_scale = float(y_scale)
        self.curve = curve or {"train": [], "val": []}
        self.hyper = dict(hyper or {})
        self.n_features = self.params["W1"].shape[0]

    def predict(self, X):
        out, _ = forward(self.params, self._check_X(X))
        return out * self.y_scale + self.y_mean

    def state(self):
        return {"params": self.params, "y_mean": self.y_mean, "y_scale": self.y_scale,
                "curve": self.curve, "hyper": self.hyper}

    @classmethod
    def from_state(cls, state):
        return cls(state["params"], state["y_mean"], state["y_scale"], state["curve"],
                   state["hyper"])


def fit_mlp_regressor(X, y, hidden=100, epochs=200, batch=32, lr=1e-3, seed=0,
                      val_fraction=0.1, patience=10, tol=1e-4) -> MLPRegressor:
    """Mini-batch Adam training with early stopping.

    A seeded 10% of the rows is held out for validation. Training stops once
    the validation loss has not improved on its best value by a relative
    ``tol`` for ``patience`` epochs, and the best-validation weights are kept.
    ``curve`` records the training and validation loss, entry 0 being the
    initial weights.
    """
    X, y = check_xy(X, y)
    n = len(y)
    rng = make_rng(seed, "mlp")
    y_mean = y.mean()
    y_scale = y.std() or 1.0
    t = (y - y_mean) / y_scale

    perm = rng.permutation(n)
    n_val = int(round(val_fraction * n)) if n >= 10 else 0
    val_idx, train_idx = perm[:n_val], perm[n_val:]
    Xt, tt = X[train_idx], t[train_idx]
    Xv, tv = X[val_idx], t[val_idx]

    params = init_params(X.shape[1], hidden, rng)
    m = {k: np.zeros_like(v) for k, v in params.items()}
    v = {k: np.zeros_like(v) for k, v in params.items()}
    step = 0

    def val_loss(p):
        return loss(p, Xv, tv) if n_val else loss(p, Xt, tt)

    curve = {"train": [loss(params, Xt, tt)], "val": [val_loss(params)]}
    best = curve["val"][0]
    best_params = {k: a.copy() for k, a in params.items()}
    stale = 0
    for _ in range(epochs):
        order = rng.permutation(len(tt))
        for start in range(0, len(order), batch):
            idx = order[start:start + batch]
            _, grads = loss_and_grad(params, Xt[idx], tt[idx])
            step += 1
            for key in params:
                g = grads[key]
                m[key] = BETA1 * m[key] + (1 - BETA1) * g
                v[key] = BETA2 * v[key] + (1 - BETA2) * g * g
                m_hat = m[key] / (1 - BETA1 ** step)
                v_hat = v[key] / (1 - BETA2 ** step)
                params[key] -= lr * m_hat / (np.sqrt(v_hat) + EPS)
        curve["train"].append(loss(params, Xt, tt))
        current = val_loss(params)
        curve["val"].append(current)
        if current < best * (1 - tol):
            best = current
            best_params = {k: a.copy() for k, a in params.items()}
            stale = 0
        else:
            if current < best:
                best = current
                best_params = {k: a.copy() for k, a in params.items()}
            stale += 1
            if stale >= patience:
                break
    hyper = {"hidden": hidden, "epochs": epochs, "batch": batch, "lr": lr, "seed": seed}
    return MLPRegressor(best_params, y_mean, y_scale, curve, hyper)
