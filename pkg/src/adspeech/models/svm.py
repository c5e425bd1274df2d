"""Support vector classification and epsilon-regression trained with SMO.

Both problems are instances of the dual

    min 0.5 a'Qa + p'a   subject to   s'a = 0,  0 <= a <= C

with ``Q_ij = s_i s_j K_ij`` and signs ``s`` in {+1, -1}. The solver picks
the maximal violating pair each step and stops once the KKT gap is below
``tol``.

Kernel: ``(scale * <u, v> + coef0) ** degree`` where ``scale`` is
``1 / (d * var(X_train))`` on the (standardized) training matrix.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .base import check_X

__all__ = ["SMOResult", "smo_solve", "SVC", "SVR", "kkt_violation_svc", "kkt_violation_svr",
           "poly_kernel", "kernel_scale"]

_TAU = 1e-12


def kernel_scale(X) -> float:
    v = float(np.var(X)) * X.shape[1]
    return 1.0 / v if v > 0 else 1.0


def poly_kernel(A, B, scale, coef0, degree):
    return (scale * (A @ B.T) + coef0) ** degree


@dataclass
class SMOResult:
    alpha: np.ndarray
    rho: float
    iterations: int
    gap: float


def smo_solve(Q, p, s, C, tol=1e-3, max_iter=100000) -> SMOResult:
    """Solve the signed box-constrained dual by SMO with maximal violating pairs."""
    n = p.size
    alpha = np.zeros(n)
    G = p.astype(float).copy()
    gap = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        up = ((s > 0) & (alpha < C)) | ((s < 0) & (alpha > 0))
        low = ((s > 0) & (alpha > 0)) | ((s < 0) & (alpha < C))
        score = -s * G
        if not up.any() or not low.any():
            gap = 0.0
            break
        i = int(np.flatnonzero(up)[np.argmax(score[up])])
        j = int(np.flatnonzero(low)[np.argmin(score[low])])
        gap = score[i] - score[j]
        if gap < tol:
            break
        Qii, Qjj, Qij = Q[i, i], Q[j, j], Q[i, j]
        ai, aj = alpha[i], alpha[j]
        if s[i] != s[j]:
            quad = max(Qii + Qjj + 2 * Qij, _TAU)
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            ai += delta
            aj += delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            quad = max(Qii + Qjj - 2 * Qij, _TAU)
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            ai -= delta
            aj += delta
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
            elif aj < 0:
                aj, ai = 0.0, total
            if total > C:
                if aj > C:
                    aj, ai = C, total - C
            elif ai < 0:
                ai, aj = 0.0, total
        di, dj = ai - alpha[i], aj - alpha[j]
        alpha[i], alpha[j] = ai, aj
        G += Q[:, i] * di + Q[:, j] * dj
    else:
        warnings.warn(f"SMO stopped at max_iter={max_iter} with gap {gap:.2e}", RuntimeWarning,
                      stacklevel=2)
    score = -s * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        rho = -float(score[free].mean())
    else:
        up = ((s > 0) & (alpha < C)) | ((s < 0) & (alpha > 0))
        low = ((s > 0) & (alpha > 0)) | ((s < 0) & (alpha < C))
        hi = score[up].max() if up.any() else score[low].min()
        lo = score[low].min() if low.any() else hi
        rho = -0.5 * float(hi + lo)
    return SMOResult(alpha, rho, it, float(gap))


class _KernelModel:
    def __init__(self, C=1.0, degree=3, coef0=0.0, tol=1e-3, max_iter=100000, scale=None):
        self.C = float(C)
        self.scale = scale
        self.degree = int(degree)
        self.coef0 = float(coef0)
        self.tol = float(tol)
        self.max_iter = int(max_iter)

    def _kernel(self, A, B):
        return poly_kernel(A, B, self.scale_, self.coef0, self.degree)

    def decision_function(self, X):
        X = check_X(X, self.sv_.shape[1])
        if self.sv_.shape[0] == 0:
            return np.full(X.shape[0], self.b_)
        return self._kernel(X, self.sv_) @ self.coef_ + self.b_

    def _keep(self, X, coef):
        nz = coef != 0
        self.sv_ = X[nz]
        self.coef_ = coef[nz]

    def to_params(self):
        return {"scale": self.scale_, "degree": self.degree, "coef0": self.coef0, "C": self.C,
                "b": self.b_, "sv": self.sv_.tolist(), "coef": self.coef_.tolist()}

    def _load(self, p):
        self.scale_, self.b_ = float(p["scale"]), float(p["b"])
        self.sv_ = np.array(p["sv"], float).reshape(-1, len(p["sv"][0]) if p["sv"] else 0)
        self.coef_ = np.array(p["coef"], float)
        return self


class SVC(_KernelModel):
    """Binary soft-margin SVM. Labels are mapped to +1 (first sorted) and -1."""

    def fit(self, X, y):
        X = check_X(X)
        self.classes_ = sorted(set(y))
        if len(self.classes_) != 2:
            raise ValueError(f"SVC needs exactly two classes, got {len(self.classes_)}")
        s = np.array([1.0 if v == self.classes_[0] else -1.0 for v in y])
        self.scale_ = kernel_scale(X) if self.scale is None else float(self.scale)
        K = self._kernel(X, X)
        res = smo_solve(np.outer(s, s) * K, -np.ones(len(s)), s, self.C, self.tol, self.max_iter)
        self.result_ = res
        self.alpha_, self.s_, self.X_train_ = res.alpha, s, X
        self.b_ = -res.rho
        self._keep(X, res.alpha * s)
        return self

    def predict(self, X):
        f = self.decision_function(X)
        return [self.classes_[0] if v >= 0 else self.classes_[1] for v in f]

    def to_params(self):
        p = super().to_params()
        p["classes"] = self.classes_
        return p

    @classmethod
    def from_params(cls, p):
        m = cls(C=p["C"], degree=p["degree"], coef0=p["coef0"])._load(p)
        m.classes_ = list(p["classes"])
        return m


class SVR(_KernelModel):
    """Epsilon-insensitive support vector regression on raw targets."""

    def __init__(self, C=1.0, epsilon=0.1, **kw):
        super().__init__(C=C, **kw)
        self.epsilon = float(epsilon)

    def fit(self, X, y):
        X = check_X(X)
        y = np.asarray(y, float)
        n = y.size
        if n < 2:
            raise ValueError("SVR needs at least 2 rows")
        self.scale_ = kernel_scale(X) if self.scale is None else float(self.scale)
        K = self._kernel(X, X)
        s = np.concatenate([np.ones(n), -np.ones(n)])
        Q = np.block([[K, -K], [-K, K]])
        p = np.concatenate([self.epsilon - y, self.epsilon + y])
        res = smo_solve(Q, p, s, self.C, self.tol, self.max_iter)
        a, a_star = res.alpha[:n].copy(), res.alpha[n:].copy()
        # both of a pair positive only adds a constant to the objective; keep the difference
        common = np.minimum(a, a_star)
        a -= common
        a_star -= common
        self.result_ = res
        self.alpha_, self.alpha_star_, self.X_train_ = a, a_star, X
        self.b_ = -res.rho
        self._keep(X, a - a_star)
        return self

    def predict(self, X):
        return self.decision_function(X)

    def to_params(self):
        p = super().to_params()
        p["epsilon"] = self.epsilon
        return p

    @classmethod
    def from_params(cls, p):
        return cls(C=p["C"], epsilon=p["epsilon"], degree=p["degree"], coef0=p["coef0"])._load(p)


def kkt_violation_svc(model: SVC) -> float:
    """Largest KKT violation in units of the margin function y*f(x)."""
    a, s, C = model.alpha_, model.s_, model.C
    yf = s * model.decision_function(model.X_train_)
    eps = 1e-12 * C
    v = np.zeros_like(a)
    at_zero = a <= eps
    at_c = a >= C - eps
    free = ~at_zero & ~at_c
    v[at_zero] = np.maximum(0.0, 1.0 - yf[at_zero])
    v[at_c] = np.maximum(0.0, yf[at_c] - 1.0)
    v[free] = np.abs(yf[free] - 1.0)
    return float(v.max()) if v.size else 0.0


def kkt_violation_svr(model: SVR, y) -> tuple[float, float]:
    """(largest KKT violation of the residuals, largest alpha * alpha_star)."""
    y = np.asarray(y, float)
    a, a_s, C, e = model.alpha_, model.alpha_star_, model.C, model.epsilon
    r = y - model.decision_function(model.X_train_)
    eps = 1e-12 * C
    v = np.zeros_like(r)
    for i in range(r.size):
        # alpha pushes predictions up (r > e), alpha_star down (r < -e)
        if a[i] <= eps and a_s[i] <= eps:
            v[i] = max(0.0, abs(r[i]) - e)
        elif a[i] > eps:
            v[i] = abs(r[i] - e) if a[i] < C - eps else max(0.0, e - r[i])
        else:
            v[i] = abs(r[i] + e) if a_s[i] < C - eps else max(0.0, r[i] + e)
    return float(v.max()), float(np.max(a * a_s))
