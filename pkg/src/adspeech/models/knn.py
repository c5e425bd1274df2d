"""Distance-weighted k-nearest-neighbour classification."""
from __future__ import annotations

import numpy as np

from .base import check_X

__all__ = ["KNNClassifier"]


class KNNClassifier:
    """Votes of the ``k`` nearest training rows weighted by 1/distance.

    A training row at distance 0 decides outright (several such rows vote
    by count). Neighbour ties at equal distance keep the lower training
    index; class ties go to the lexicographically smaller label.
    """

    def __init__(self, k: int = 5):
        self.k = int(k)

    def fit(self, X, y):
        X = check_X(X)
        if X.shape[0] == 0:
            raise ValueError("empty training set")
        if self.k > X.shape[0]:
            raise ValueError(f"k={self.k} exceeds training size {X.shape[0]}")
        self.X_ = X.copy()
        self.y_ = np.asarray(y, dtype=object)
        self.classes_ = sorted(set(self.y_.tolist()))
        return self

    def _vote(self, dist):
        order = np.argsort(dist, kind="stable")[: self.k]
        d = dist[order]
        labels = self.y_[order]
        score = dict.fromkeys(self.classes_, 0.0)
        if d[0] == 0.0:
            for lab in labels[d == 0.0]:
                score[lab] += 1.0
        else:
            for lab, w in zip(labels, 1.0 / d):
                score[lab] += w
        best = max(score.values())
        return min(c for c, s in score.items() if s == best)

    def predict(self, X):
        X = check_X(X, self.X_.shape[1])
        d2 = ((X[:, None, :] - self.X_[None, :, :]) ** 2).sum(axis=2)
        return [self._vote(np.sqrt(row)) for row in d2]

    def to_params(self):
        return {"k": self.k, "X": self.X_.tolist(), "y": self.y_.tolist()}

    @classmethod
    def from_params(cls, p):
        m = cls(p["k"])
        m.X_ = np.array(p["X"], float)
        m.y_ = np.array(p["y"], dtype=object)
        m.classes_ = sorted(set(m.y_.tolist()))
        return m
