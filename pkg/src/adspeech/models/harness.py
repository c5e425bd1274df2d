"""Training, JSON model files, stratified cross-validation and holdout scoring."""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .base import ModelConfig, Standardizer, check_X
from .forest import RandomForest
from .knn import KNNClassifier
from .linear import SGDRegressor
from .metrics import EvalReport, classification_report, regression_report
from .mlp import MLP
from .svm import SVC, SVR

__all__ = [
    "MODEL_FORMAT_VERSION",
    "TrainedModel",
    "build_estimator",
    "train_model",
    "save_model",
    "load_model",
    "stratified_folds",
    "cross_validate",
    "FoldResult",
    "CVResult",
]

MODEL_FORMAT_VERSION = 1

_LOADERS = {
    "rf_class": RandomForest.from_params, "rf_reg": RandomForest.from_params,
    "knn": KNNClassifier.from_params, "svm_smo": SVC.from_params, "svr_smo": SVR.from_params,
    "mlp_class": MLP.from_params, "mlp_reg": MLP.from_params, "linreg_sgd": SGDRegressor.from_params,
}


def build_estimator(cfg: ModelConfig):
    p, s = cfg.params, cfg.seed
    k = cfg.kind
    if k in ("rf_class", "rf_reg"):
        return RandomForest(k == "rf_class", p["trees"], p["max_depth"], p["min_split"], p["mtry"],
                            p["bootstrap"], s)
    if k == "knn":
        return KNNClassifier(p["k"])
    if k == "svm_smo":
        return SVC(p["C"], p["degree"], p["coef0"], p["tol"], p["max_iter"])
    if k == "svr_smo":
        return SVR(p["C"], p["epsilon"], degree=p["degree"], coef0=p["coef0"], tol=p["tol"],
                   max_iter=p["max_iter"])
    if k in ("mlp_class", "mlp_reg"):
        return MLP(k == "mlp_class", p["hidden"], p["lr"], p["momentum"], p["epochs"], s)
    return SGDRegressor(p["eta0"], p["l2"], p["epochs"], p["tol"], p["n_iter_no_change"], s)


@dataclass
class TrainedModel:
    config: ModelConfig
    preprocessing: Standardizer
    estimator: object
    feature_names: list

    def predict(self, X):
        X = self.preprocessing.transform(check_X(X, len(self.feature_names)))
        out = self.estimator.predict(X)
        return list(out) if self.config.is_classifier else np.asarray(out, float)

    def to_dict(self):
        return {"format": "adspeech-model", "version": MODEL_FORMAT_VERSION,
                "config": self.config.to_dict(), "feature_names": list(self.feature_names),
                "preprocessing": self.preprocessing.to_dict(),
                "parameters": self.estimator.to_params()}

    @classmethod
    def from_dict(cls, d):
        if d.get("format") != "adspeech-model":
            raise ValueError("not an adspeech model file")
        if d.get("version") != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model file version {d.get('version')}")
        cfg = ModelConfig.from_dict(d["config"])
        return cls(cfg, Standardizer.from_dict(d["preprocessing"]),
                   _LOADERS[cfg.kind](d["parameters"]), list(d["feature_names"]))


def train_model(cfg: ModelConfig, X, y, feature_names=None) -> TrainedModel:
    """Fit preprocessing and estimator on training rows only."""
    X = check_X(X)
    names = list(feature_names) if feature_names is not None else [f"x{i}" for i in range(X.shape[1])]
    pre = Standardizer.fit(X) if cfg.standardized else Standardizer.identity(X.shape[1])
    est = build_estimator(cfg).fit(pre.transform(X), y)
    return TrainedModel(cfg, pre, est, names)


def save_model(path, model: TrainedModel, header: dict | None = None) -> None:
    d = model.to_dict()
    if header:
        d["provenance"] = header
    Path(path).write_text(json.dumps(d), encoding="utf-8")


def load_model(path) -> TrainedModel:
    return TrainedModel.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# ---------------------------------------------------------------- folds

def mmse_strata(y, n_bins=4):
    """Quartile bin of each target (ties share a bin)."""
    y = np.asarray(y, float)
    edges = np.quantile(y, np.linspace(0, 1, n_bins + 1)[1:-1])
    return np.searchsorted(edges, y, side="right")


def stratified_folds(strata, k=10, seed=0, stratify=True) -> list[np.ndarray]:
    """Test-index arrays of ``k`` folds.

    Rows are shuffled within each stratum, strata are laid end to end in
    sorted order and dealt round-robin, so fold sizes differ by at most one
    and every stratum is spread evenly.
    """
    strata = list(strata)
    n = len(strata)
    if k < 2 or k > n:
        raise ValueError(f"need 2 <= folds <= {n}, got {k}")
    rng = np.random.default_rng(seed)
    if stratify:
        order = []
        for s in sorted(set(strata), key=str):
            idx = np.array([i for i, v in enumerate(strata) if v == s])
            order.extend(rng.permutation(idx).tolist())
    else:
        order = rng.permutation(n).tolist()
    folds = [[] for _ in range(k)]
    for pos, i in enumerate(order):
        folds[pos % k].append(i)
    return [np.array(sorted(f), int) for f in folds]


@dataclass
class FoldResult:
    fold: int
    test_index: np.ndarray
    predictions: list


@dataclass
class CVResult:
    report: EvalReport
    predictions: list
    folds: list


def _run_fold(args):
    f, cfg, X, y, test_idx, names = args
    train_idx = np.setdiff1d(np.arange(X.shape[0]), test_idx)
    model = train_model(cfg.with_seed(cfg.seed * 1000 + f), X[train_idx],
                        [y[i] for i in train_idx], names)
    pred = model.predict(X[test_idx])
    return FoldResult(f, test_idx, list(pred))


def cross_validate(cfg: ModelConfig, X, y, folds=10, seed=0, stratify=True, n_jobs=1,
                   feature_names=None, model_fn=None) -> CVResult:
    """K-fold cross-validation with out-of-fold predictions pooled into one report.

    Classification folds are stratified by label, regression folds by
    target quartile. Fold ``f`` trains with seed ``seed * 1000 + f`` so the
    result does not depend on ``n_jobs``. ``model_fn(train_X, train_y,
    test_X)`` replaces the configured model when given (for oracle checks).
    """
    X = check_X(X)
    n = X.shape[0]
    if len(y) != n:
        raise ValueError("X and y differ in length")
    y = list(y)
    if cfg.is_classifier:
        strata = y
        counts = {c: y.count(c) for c in set(y)}
        if stratify and min(counts.values()) < folds:
            raise ValueError(f"class {min(counts, key=counts.get)!r} has fewer than {folds} rows")
    else:
        strata = mmse_strata(y).tolist()
    test_sets = stratified_folds(strata, folds, seed, stratify)
    cfg = cfg.with_seed(seed)
    if model_fn is not None:
        results = []
        for f, te in enumerate(test_sets):
            tr = np.setdiff1d(np.arange(n), te)
            results.append(FoldResult(f, te, list(model_fn(X[tr], [y[i] for i in tr], X[te]))))
    else:
        jobs = [(f, cfg, X, y, te, feature_names) for f, te in enumerate(test_sets)]
        if n_jobs > 1:
            with ThreadPoolExecutor(max_workers=n_jobs) as ex:
                results = list(ex.map(_run_fold, jobs))
        else:
            results = [_run_fold(j) for j in jobs]
    pooled = [None] * n
    for r in results:
        for i, p in zip(r.test_index, r.predictions):
            pooled[int(i)] = p
    if cfg.is_classifier:
        report = classification_report(y, pooled, labels=sorted(set(y)))
        fold_scores = [classification_report([y[i] for i in r.test_index], r.predictions,
                                             labels=sorted(set(y))).accuracy for r in results]
    else:
        report = regression_report(y, pooled)
        fold_scores = [regression_report([y[i] for i in r.test_index], r.predictions).rmse
                       for r in results]
    report.folds = [{"fold": r.fold, "n": int(r.test_index.size), "score": s}
                    for r, s in zip(results, fold_scores)]
    return CVResult(report, pooled, results)
