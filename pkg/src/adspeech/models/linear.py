"""Linear regression fit by stochastic gradient descent."""
from __future__ import annotations

import numpy as np

from .base import check_X

__all__ = ["SGDRegressor"]


class SGDRegressor:
    """Squared-loss SGD with L2 penalty and step ``eta0 / (1 + l2 * t)``.

    ``t`` counts samples seen. Targets are standardized internally. Rows
    are reshuffled each epoch from ``default_rng(seed)``. All ``epochs``
    run by default; with ``tol > 0`` training stops once the epoch's mean
    loss has failed to improve on the best by ``tol`` for
    ``n_iter_no_change`` consecutive epochs.
    """

    def __init__(self, eta0=0.01, l2=1e-4, epochs=1000, tol=0.0, n_iter_no_change=5, seed=0):
        self.eta0 = float(eta0)
        self.l2 = float(l2)
        self.epochs = int(epochs)
        self.tol = float(tol)
        self.n_iter_no_change = int(n_iter_no_change)
        self.seed = int(seed)

    def fit(self, X, y):
        X = check_X(X)
        y = np.asarray(y, float)
        n, d = X.shape
        if n < 2:
            raise ValueError("LR-SGD needs at least 2 rows")
        self.y_mean_ = float(y.mean())
        sd = float(y.std(ddof=1))
        self.y_sd_ = sd if sd > 0 else 1.0
        z = (y - self.y_mean_) / self.y_sd_
        rng = np.random.default_rng(self.seed)
        w = np.zeros(d)
        b = 0.0
        t = 0
        best, stall = np.inf, 0
        self.n_epochs_ = 0
        for _ in range(self.epochs):
            total = 0.0
            for i in rng.permutation(n):
                eta = self.eta0 / (1.0 + self.l2 * t)
                err = X[i] @ w + b - z[i]
                total += 0.5 * err * err
                w -= eta * (err * X[i] + self.l2 * w)
                b -= eta * err
                t += 1
            self.n_epochs_ += 1
            if self.tol > 0:
                loss = total / n
                stall = stall + 1 if loss > best - self.tol else 0
                best = min(best, loss)
                if stall >= self.n_iter_no_change:
                    break
        self.coef_, self.intercept_ = w, b
        return self

    def predict(self, X):
        X = check_X(X, self.coef_.size)
        return (X @ self.coef_ + self.intercept_) * self.y_sd_ + self.y_mean_

    def to_params(self):
        return {"coef": self.coef_.tolist(), "intercept": self.intercept_,
                "y_mean": self.y_mean_, "y_sd": self.y_sd_}

    @classmethod
    def from_params(cls, p):
        m = cls()
        m.coef_ = np.array(p["coef"], float)
        m.intercept_ = float(p["intercept"])
        m.y_mean_, m.y_sd_ = float(p["y_mean"]), float(p["y_sd"])
        return m
