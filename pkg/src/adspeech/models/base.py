"""Model configuration, standardization and the common estimator protocol."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "KINDS",
    "CLASSIFIERS",
    "REGRESSORS",
    "DEFAULTS",
    "ModelConfig",
    "Standardizer",
    "check_X",
]

DEFAULTS = {
    "rf_class": {"trees": 100, "max_depth": 0, "min_split": 2, "mtry": 0, "bootstrap": True},
    "rf_reg": {"trees": 100, "max_depth": 0, "min_split": 2, "mtry": 0, "bootstrap": True},
    "knn": {"k": 5},
    "svm_smo": {"C": 1.0, "degree": 3, "coef0": 0.0, "tol": 1e-3, "max_iter": 100000},
    "svr_smo": {"C": 1.0, "epsilon": 0.1, "degree": 3, "coef0": 0.0, "tol": 1e-3,
                "max_iter": 100000},
    "mlp_class": {"hidden": 2, "lr": 0.1, "momentum": 0.2, "epochs": 500},
    "mlp_reg": {"hidden": 2, "lr": 0.1, "momentum": 0.2, "epochs": 500},
    "linreg_sgd": {"eta0": 0.01, "l2": 1e-4, "epochs": 1000, "tol": 0.0, "n_iter_no_change": 5},
}
KINDS = tuple(DEFAULTS)
CLASSIFIERS = ("rf_class", "knn", "svm_smo", "mlp_class")
REGRESSORS = ("rf_reg", "svr_smo", "mlp_reg", "linreg_sgd")

# Kinds that see z-scored features; forests split on raw values.
STANDARDIZED = {"knn", "svm_smo", "svr_smo", "mlp_class", "mlp_reg", "linreg_sgd"}

_POSITIVE = {"trees", "min_split", "k", "C", "lr", "eta0", "degree", "max_iter"}
_NONNEG = {"max_depth", "mtry", "coef0", "epsilon", "momentum", "l2", "tol", "hidden",
           "n_iter_no_change"}


@dataclass(frozen=True)
class ModelConfig:
    """A model kind, its hyperparameters (defaults filled in) and a seed.

    ``max_depth = 0`` means unlimited and ``mtry = 0`` means
    ``floor(log2(d)) + 1``. ``epochs = 0`` is allowed for the MLP.
    """

    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in DEFAULTS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        merged = dict(DEFAULTS[self.kind])
        unknown = set(self.params) - set(merged)
        if unknown:
            raise ValueError(f"unknown hyperparameter(s) for {self.kind}: {', '.join(sorted(unknown))}")
        merged.update(self.params)
        for k, v in merged.items():
            default = DEFAULTS[self.kind][k]
            if isinstance(default, bool):
                v = bool(v)
            elif isinstance(default, int):
                if float(v) != int(v):
                    raise ValueError(f"{k} must be an integer")
                v = int(v)
            else:
                v = float(v)
            if k in _POSITIVE and not v > 0:
                raise ValueError(f"{k} must be positive, got {v}")
            if k in _NONNEG and v < 0:
                raise ValueError(f"{k} must be non-negative, got {v}")
            merged[k] = v
        if self.kind.startswith("mlp") and merged["hidden"] < 1:
            raise ValueError("hidden must be at least 1")
        if self.kind == "linreg_sgd" and merged["epochs"] < 1:
            raise ValueError("epochs must be at least 1")
        object.__setattr__(self, "params", merged)

    @property
    def is_classifier(self) -> bool:
        return self.kind in CLASSIFIERS

    @property
    def standardized(self) -> bool:
        return self.kind in STANDARDIZED

    def with_seed(self, seed: int) -> "ModelConfig":
        return ModelConfig(self.kind, dict(self.params), int(seed))

    def to_dict(self):
        return {"kind": self.kind, "params": dict(self.params), "seed": self.seed}

    @classmethod
    def from_dict(cls, d):
        return cls(d["kind"], dict(d.get("params", {})), int(d.get("seed", 0)))


def check_X(X, d=None) -> np.ndarray:
    X = np.asarray(X, float)
    if X.ndim != 2:
        raise ValueError("X must be a 2-D array")
    if d is not None and X.shape[1] != d:
        raise ValueError(f"dimension mismatch: model expects {d} features, got {X.shape[1]}")
    return X


@dataclass
class Standardizer:
    """Per-feature z-scores with training mean and sample sd (denominator n-1).

    Features with zero training sd pass through unchanged.
    """

    mean: np.ndarray
    sd: np.ndarray

    @classmethod
    def fit(cls, X) -> "Standardizer":
        X = check_X(X)
        if X.shape[0] < 2:
            raise ValueError("standardization needs at least 2 training rows")
        return cls(X.mean(axis=0), X.std(axis=0, ddof=1))

    @classmethod
    def identity(cls, d: int) -> "Standardizer":
        return cls(np.zeros(d), np.zeros(d))

    def transform(self, X) -> np.ndarray:
        X = check_X(X, self.mean.size)
        live = self.sd > 0
        out = X.copy()
        out[:, live] = (X[:, live] - self.mean[live]) / self.sd[live]
        return out

    def to_dict(self):
        return {"mean": self.mean.tolist(), "sd": self.sd.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(np.array(d["mean"], float), np.array(d["sd"], float))


def standardize_fit_apply(train, *others):
    """Fit a :class:`Standardizer` on ``train`` and apply it to every array given."""
    s = Standardizer.fit(train)
    return (s.transform(train),) + tuple(s.transform(o) for o in others) + (s,)
