"""Random forests of CART trees (Gini for classes, variance for targets)."""
from __future__ import annotations

import math

import numpy as np

from .base import check_X

__all__ = ["DecisionTree", "RandomForest"]


def _gini_curve(y_sorted, n_classes):
    """Weighted child Gini impurity for every cut position 1..n-1."""
    n = y_sorted.size
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y_sorted] = 1.0
    left = np.cumsum(onehot, axis=0)[:-1]
    right = left[-1] + onehot[-1] - left
    nl = np.arange(1, n, dtype=float)
    nr = n - nl
    gl = 1.0 - ((left / nl[:, None]) ** 2).sum(axis=1)
    gr = 1.0 - ((right / nr[:, None]) ** 2).sum(axis=1)
    return (nl * gl + nr * gr) / n


def _variance_curve(y_sorted):
    n = y_sorted.size
    cs = np.cumsum(y_sorted)[:-1]
    cs2 = np.cumsum(y_sorted ** 2)[:-1]
    tot, tot2 = y_sorted.sum(), (y_sorted ** 2).sum()
    nl = np.arange(1, n, dtype=float)
    nr = n - nl
    sse_l = cs2 - cs ** 2 / nl
    sse_r = (tot2 - cs2) - (tot - cs) ** 2 / nr
    return (sse_l + sse_r) / n


class DecisionTree:
    """CART tree over ``mtry`` randomly drawn features per split.

    Drawing continues past ``mtry`` features only while none of the drawn
    ones admits a split, so a node becomes a leaf only when it is pure,
    too small, at maximum depth, or constant on every feature.
    Nodes are stored flat: ``feature`` is -1 at leaves.
    """

    def __init__(self, classification: bool, mtry: int, max_depth: int = 0, min_split: int = 2,
                 n_classes: int = 0):
        self.classification = classification
        self.mtry = mtry
        self.max_depth = max_depth
        self.min_split = min_split
        self.n_classes = n_classes

    def fit(self, X, y, rng):
        self.feature, self.threshold, self.left, self.right, self.value = [], [], [], [], []
        self._grow(X, y, 0, rng)
        return self

    def _leaf_value(self, y):
        if self.classification:
            return np.bincount(y, minlength=self.n_classes).tolist()
        return float(y.mean())

    def _new_node(self, value):
        for lst, v in ((self.feature, -1), (self.threshold, 0.0), (self.left, -1), (self.right, -1),
                       (self.value, value)):
            lst.append(v)
        return len(self.feature) - 1

    def _best_split(self, X, y, rng):
        d = X.shape[1]
        best = None
        for count, f in enumerate(rng.permutation(d), 1):
            col = X[:, f]
            order = np.argsort(col, kind="stable")
            xs = col[order]
            valid = xs[1:] > xs[:-1]
            if valid.any():
                ys = y[order]
                curve = _gini_curve(ys, self.n_classes) if self.classification else _variance_curve(ys)
                curve = np.where(valid, curve, np.inf)
                k = int(np.argmin(curve))
                if best is None or curve[k] < best[0]:
                    thr = 0.5 * (xs[k] + xs[k + 1])
                    if not xs[k] <= thr < xs[k + 1]:
                        thr = xs[k]           # midpoint of adjacent floats rounds up
                    best = (curve[k], int(f), thr)
            if best is not None and count >= self.mtry:
                break
        return best

    def _grow(self, X, y, depth, rng):
        node = self._new_node(self._leaf_value(y))
        pure = (np.all(y == y[0]))
        if pure or y.size < self.min_split or (self.max_depth and depth >= self.max_depth):
            return node
        split = self._best_split(X, y, rng)
        if split is None:
            return node
        _, f, thr = split
        mask = X[:, f] <= thr
        self.feature[node], self.threshold[node] = f, float(thr)
        self.left[node] = self._grow(X[mask], y[mask], depth + 1, rng)
        self.right[node] = self._grow(X[~mask], y[~mask], depth + 1, rng)
        return node

    def apply(self, X):
        out = np.empty(X.shape[0], int)
        for i, row in enumerate(X):
            n = 0
            while self.feature[n] >= 0:
                n = self.left[n] if row[self.feature[n]] <= self.threshold[n] else self.right[n]
            out[i] = n
        return out

    def to_params(self):
        return {"feature": self.feature, "threshold": self.threshold, "left": self.left,
                "right": self.right, "value": self.value}

    @classmethod
    def from_params(cls, p, classification, n_classes):
        t = cls(classification, 0, n_classes=n_classes)
        t.feature, t.threshold = list(p["feature"]), list(p["threshold"])
        t.left, t.right, t.value = list(p["left"]), list(p["right"]), list(p["value"])
        return t


class RandomForest:
    """Bagged CART trees. Tree ``i`` draws from ``default_rng([seed, i])``.

    Classification predicts the majority of per-tree leaf majorities (ties
    to the lexicographically smaller label); regression averages leaf means.
    """

    def __init__(self, classification: bool, trees=100, max_depth=0, min_split=2, mtry=0,
                 bootstrap=True, seed=0):
        self.classification = classification
        self.n_trees = int(trees)
        self.max_depth = int(max_depth)
        self.min_split = int(min_split)
        self.mtry = int(mtry)
        self.bootstrap = bool(bootstrap)
        self.seed = int(seed)

    def fit(self, X, y):
        X = check_X(X)
        n, d = X.shape
        if n < 2 or d < 1:
            raise ValueError("random forest needs at least 2 rows and 1 feature")
        if self.classification:
            self.classes_ = sorted(set(y))
            if len(self.classes_) < 1:
                raise ValueError("no classes")
            codes = np.array([self.classes_.index(v) for v in y])
        else:
            self.classes_ = []
            codes = np.asarray(y, float)
        mtry = self.mtry or int(math.floor(math.log2(d))) + 1
        self.d_ = d
        self.trees_ = []
        for i in range(self.n_trees):
            rng = np.random.default_rng([self.seed, i])
            idx = rng.integers(0, n, n) if self.bootstrap else np.arange(n)
            tree = DecisionTree(self.classification, min(mtry, d), self.max_depth, self.min_split,
                                len(self.classes_))
            self.trees_.append(tree.fit(X[idx], codes[idx], rng))
        return self

    def predict(self, X):
        X = check_X(X, self.d_)
        if self.classification:
            votes = np.zeros((X.shape[0], len(self.classes_)))
            for t in self.trees_:
                leaf = t.apply(X)
                for i, node in enumerate(leaf):
                    counts = t.value[node]
                    votes[i, int(np.argmax(counts))] += 1
            # argmax returns the first maximum; classes_ is sorted
            return [self.classes_[int(np.argmax(v))] for v in votes]
        preds = np.zeros(X.shape[0])
        for t in self.trees_:
            vals = np.array(t.value)
            preds += vals[t.apply(X)]
        return preds / len(self.trees_)

    def to_params(self):
        return {"classification": self.classification, "classes": self.classes_, "d": self.d_,
                "trees": [t.to_params() for t in self.trees_]}

    @classmethod
    def from_params(cls, p):
        m = cls(p["classification"])
        m.classes_ = list(p["classes"])
        m.d_ = int(p["d"])
        m.trees_ = [DecisionTree.from_params(t, m.classification, len(m.classes_)) for t in p["trees"]]
        m.n_trees = len(m.trees_)
        return m
