"""One-hidden-layer perceptron trained by full-batch gradient descent with momentum."""
from __future__ import annotations

import numpy as np

from .base import check_X

__all__ = ["MLP", "sigmoid", "mlp_loss_and_grad"]


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _forward(params, X, linear_out):
    W1, b1, W2, b2 = params
    H = sigmoid(X @ W1 + b1)
    Z = H @ W2 + b2
    return H, (Z if linear_out else sigmoid(Z))


def mlp_loss_and_grad(params, X, T, linear_out):
    """Mean squared error ``0.5 * mean_i |out_i - t_i|^2`` and its gradient."""
    W1, b1, W2, b2 = params
    n = X.shape[0]
    H, O = _forward(params, X, linear_out)
    E = O - T
    loss = 0.5 * float((E ** 2).sum()) / n
    dZ = E / n if linear_out else E * O * (1.0 - O) / n
    gW2 = H.T @ dZ
    gb2 = dZ.sum(axis=0)
    dH = (dZ @ W2.T) * H * (1.0 - H)
    gW1 = X.T @ dH
    gb1 = dH.sum(axis=0)
    return loss, [gW1, gb1, gW2, gb2]


class MLP:
    """Sigmoid hidden layer; sigmoid one-hot outputs (classes) or a linear output (regression).

    Regression targets are standardized internally. Weights start
    uniform on (-0.5, 0.5) from ``default_rng(seed)``.
    """

    def __init__(self, classification: bool, hidden=2, lr=0.1, momentum=0.2, epochs=500, seed=0):
        self.classification = classification
        self.hidden = int(hidden)
        self.lr = float(lr)
        self.momentum = float(momentum)
        self.epochs = int(epochs)
        self.seed = int(seed)

    def _init(self, d, k):
        rng = np.random.default_rng(self.seed)
        u = lambda *shape: rng.uniform(-0.5, 0.5, shape)
        return [u(d, self.hidden), u(self.hidden), u(self.hidden, k), u(k)]

    def fit(self, X, y):
        X = check_X(X)
        if X.shape[0] < 2:
            raise ValueError("MLP needs at least 2 rows")
        if self.classification:
            self.classes_ = sorted(set(y))
            T = np.array([[1.0 if v == c else 0.0 for c in self.classes_] for v in y])
            self.y_mean_, self.y_sd_ = 0.0, 1.0
        else:
            self.classes_ = []
            y = np.asarray(y, float)
            self.y_mean_ = float(y.mean())
            sd = float(y.std(ddof=1))
            self.y_sd_ = sd if sd > 0 else 1.0
            T = ((y - self.y_mean_) / self.y_sd_)[:, None]
        params = self._init(X.shape[1], T.shape[1])
        vel = [np.zeros_like(p) for p in params]
        linear = not self.classification
        self.loss_curve_ = []
        for _ in range(self.epochs):
            loss, grads = mlp_loss_and_grad(params, X, T, linear)
            self.loss_curve_.append(loss)
            for p, v, g in zip(params, vel, grads):
                v *= self.momentum
                v -= self.lr * g
                p += v
        self.params_ = params
        self.d_ = X.shape[1]
        return self

    def _output(self, X):
        return _forward(self.params_, check_X(X, self.d_), not self.classification)[1]

    def predict(self, X):
        O = self._output(X)
        if self.classification:
            return [self.classes_[int(np.argmax(o))] for o in O]
        return O[:, 0] * self.y_sd_ + self.y_mean_

    def to_params(self):
        return {"classification": self.classification, "classes": self.classes_,
                "y_mean": self.y_mean_, "y_sd": self.y_sd_,
                "weights": [p.tolist() for p in self.params_]}

    @classmethod
    def from_params(cls, p):
        m = cls(p["classification"])
        m.classes_ = list(p["classes"])
        m.y_mean_, m.y_sd_ = float(p["y_mean"]), float(p["y_sd"])
        W1, b1, W2, b2 = (np.array(w, float) for w in p["weights"])
        m.params_ = [W1.reshape(-1, b1.size), b1, W2.reshape(b1.size, -1), b2]
        m.d_ = m.params_[0].shape[0]
        return m
