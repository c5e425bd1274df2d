"""Classification and regression scores."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = ["ClassScores", "EvalReport", "confusion", "class_scores", "classification_report",
           "rmse", "regression_report"]


@dataclass(frozen=True)
class ClassScores:
    label: str
    precision: float
    recall: float
    f1: float
    support: int


@dataclass
class EvalReport:
    """Pooled scores plus per-fold breakdown.

    ``confusion[i][j]`` counts true ``labels[i]`` predicted as ``labels[j]``.
    """

    task: str
    n: int
    accuracy: Optional[float] = None
    per_class: list = field(default_factory=list)
    labels: list = field(default_factory=list)
    confusion: list = field(default_factory=list)
    rmse: Optional[float] = None
    folds: list = field(default_factory=list)

    def summary(self) -> str:
        if self.task == "classification":
            parts = [f"acc={self.accuracy:.4f}"]
            for c in self.per_class:
                parts.append(f"{c.label}: P={c.precision:.3f} R={c.recall:.3f} F1={c.f1:.3f}")
            return "  ".join(parts)
        return f"rmse={self.rmse:.4f}"


def confusion(y_true, y_pred, labels=None):
    labels = sorted(set(y_true) | set(y_pred)) if labels is None else list(labels)
    pos = {l: i for i, l in enumerate(labels)}
    m = np.zeros((len(labels), len(labels)), int)
    for t, p in zip(y_true, y_pred):
        m[pos[t], pos[p]] += 1
    return labels, m


def class_scores(m, labels) -> list[ClassScores]:
    """Precision, recall and F1 per class from a confusion matrix."""
    m = np.asarray(m)
    out = []
    for i, lab in enumerate(labels):
        tp = int(m[i, i])
        fp = int(m[:, i].sum()) - tp
        fn = int(m[i, :].sum()) - tp
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * tp / (2 * tp + fp + fn) if tp else 0.0      # = 2PR/(P+R), one rounding
        out.append(ClassScores(lab, p, r, f1, tp + fn))
    return out


def classification_report(y_true, y_pred, labels=None) -> EvalReport:
    if len(y_true) == 0 or len(y_true) != len(y_pred):
        raise ValueError("need equal-length, nonempty label lists")
    labels, m = confusion(y_true, y_pred, labels)
    acc = float(np.trace(m)) / m.sum()
    return EvalReport("classification", int(m.sum()), accuracy=acc,
                      per_class=class_scores(m, labels), labels=labels, confusion=m.tolist())


def rmse(y_true, y_pred) -> float:
    y_true = np.asarray(y_true, float)
    y_pred = np.asarray(y_pred, float)
    if y_true.size == 0 or y_true.shape != y_pred.shape:
        raise ValueError("need equal-length, nonempty arrays")
    return math.sqrt(float(np.mean((y_true - y_pred) ** 2)))


def regression_report(y_true, y_pred) -> EvalReport:
    return EvalReport("regression", len(y_true), rmse=rmse(y_true, y_pred))
