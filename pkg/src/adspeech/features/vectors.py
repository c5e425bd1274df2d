"""Named feature sets, vector assembly and the feature CSV format.

Canonical orders
----------------
``pros``      14 prosodic features (F0, intensity, rhythm)
``vq``        14 voice-quality features (jitter, shimmer, harmonicity)
``lex``       50 word scores ``lex_w01..lex_w50`` then ``inv_turns_norm``
``sel``       the nine acoustic group-difference features, ``lex_mean``
              (mean of the 50 word scores) and ``inv_turns_norm``
``pros+vq``, ``lex+pros`` and ``all`` concatenate in the order named;
``all`` is ``pros + vq + lex``.

``age`` and ``gender`` (female 0, male 1) close every set unless
demographics are switched off.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .acoustic import PROSODY_NAMES, VOICE_QUALITY_NAMES
from .lexical import lexical_names

__all__ = [
    "SET_TAGS",
    "DEMOGRAPHIC_NAMES",
    "LEXICAL_NAMES",
    "SELECTED_NAMES",
    "ALL_NAMES",
    "FeatureVector",
    "FeatureTable",
    "FeatureTableError",
    "set_names",
    "assemble",
    "gender_code",
    "write_feature_csv",
    "read_feature_csv",
]

DEMOGRAPHIC_NAMES = ["age", "gender"]
LEXICAL_NAMES = lexical_names() + ["inv_turns_norm"]
SELECTED_NAMES = ["mean_f0", "std_f0", "slope_f0", "slope_f0_no_jump", "jitter_abs",
                  "avg_pause_len", "speech_rate", "articulation_rate", "avg_syllable_dur",
                  "lex_mean", "inv_turns_norm"]
ALL_NAMES = PROSODY_NAMES + VOICE_QUALITY_NAMES + LEXICAL_NAMES

_SETS = {
    "pros": PROSODY_NAMES,
    "vq": VOICE_QUALITY_NAMES,
    "pros+vq": PROSODY_NAMES + VOICE_QUALITY_NAMES,
    "lex": LEXICAL_NAMES,
    "lex+pros": LEXICAL_NAMES + PROSODY_NAMES,
    "sel": SELECTED_NAMES,
    "all": ALL_NAMES,
}
SET_TAGS = tuple(_SETS)


class FeatureTableError(ValueError):
    pass


def set_names(tag: str, demographics: bool = True) -> list[str]:
    try:
        names = list(_SETS[tag])
    except KeyError:
        raise ValueError(f"unknown feature set {tag!r}; choose from {', '.join(SET_TAGS)}") from None
    return names + DEMOGRAPHIC_NAMES if demographics else names


def gender_code(gender: str) -> float:
    return {"female": 0.0, "male": 1.0}[gender]


@dataclass(frozen=True)
class FeatureVector:
    session_id: str
    set_tag: str
    names: tuple
    values: np.ndarray


def _with_lex_mean(features: dict) -> dict:
    if "lex_mean" in features:
        return features
    words = lexical_names()
    if all(w in features for w in words):
        features = dict(features)
        features["lex_mean"] = float(np.mean([features[w] for w in words]))
    return features


def assemble(session_id: str, features: dict, set_tag: str, age: Optional[float] = None,
             gender: Optional[str] = None, demographics: bool = True) -> FeatureVector:
    """Order a session's named features into the vector for ``set_tag``.

    Raises
    ------
    KeyError
        If a constituent feature (or a demographic) is missing; the message
        names it.
    """
    features = _with_lex_mean(features)
    names = set_names(set_tag, demographics=False)
    missing = [n for n in names if n not in features]
    if missing:
        raise KeyError(f"missing feature {missing[0]!r} for set {set_tag!r}")
    values = [float(features[n]) for n in names]
    if demographics:
        if age is None or gender is None:
            raise KeyError("missing demographic 'age'" if age is None else "missing demographic 'gender'")
        names = names + DEMOGRAPHIC_NAMES
        values += [float(age), gender_code(gender)]
    return FeatureVector(session_id, set_tag, tuple(names), np.array(values))


# ---------------------------------------------------------------- CSV

@dataclass
class FeatureTable:
    """Rows of the feature CSV: ``session_id,label,mmse,<features...>``."""

    session_ids: list
    labels: list
    mmse: list
    names: list
    X: np.ndarray

    def __len__(self):
        return len(self.session_ids)

    def column(self, name) -> np.ndarray:
        if name == "lex_mean" and name not in self.names:
            return self.columns(lexical_names()).mean(axis=1)
        try:
            return self.X[:, self.names.index(name)]
        except ValueError:
            raise FeatureTableError(f"feature {name!r} not in table") from None

    def columns(self, names) -> np.ndarray:
        if not names:
            return np.zeros((len(self), 0))
        return np.column_stack([self.column(n) for n in names])

    def subset(self, tag: str, demographics: bool = True) -> tuple[list, np.ndarray]:
        names = set_names(tag, demographics)
        return names, self.columns(names)

    def select_rows(self, index) -> "FeatureTable":
        index = list(index)
        return FeatureTable([self.session_ids[i] for i in index], [self.labels[i] for i in index],
                            [self.mmse[i] for i in index], list(self.names), self.X[index])

    def mmse_array(self) -> np.ndarray:
        if any(m is None for m in self.mmse):
            missing = next(s for s, m in zip(self.session_ids, self.mmse) if m is None)
            raise FeatureTableError(f"session {missing!r} has no MMSE")
        return np.array(self.mmse, float)


def _fmt(v) -> str:
    return repr(float(v))


def write_feature_csv(path, table: FeatureTable, header_comment: Optional[str] = None) -> None:
    buf = io.StringIO()
    if header_comment:
        buf.write(f"# {header_comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["session_id", "label", "mmse"] + list(table.names))
    for i, sid in enumerate(table.session_ids):
        m = table.mmse[i]
        w.writerow([sid, table.labels[i], "" if m is None else m] + [_fmt(v) for v in table.X[i]])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def read_feature_csv(path) -> FeatureTable:
    """Read a feature CSV; ``#`` comment lines are skipped."""
    text = Path(path).read_text(encoding="utf-8")
    rows = [r for r in csv.reader(ln for ln in text.splitlines() if ln and not ln.startswith("#"))]
    if not rows:
        raise FeatureTableError(f"{path}: empty feature file")
    header = rows[0]
    if header[:3] != ["session_id", "label", "mmse"]:
        raise FeatureTableError(f"{path}: header must start with session_id,label,mmse")
    names = header[3:]
    ids, labels, mmse, X = [], [], [], []
    for k, r in enumerate(rows[1:], 2):
        if len(r) != len(header):
            raise FeatureTableError(f"{path}: row {k} has {len(r)} cells, expected {len(header)}")
        ids.append(r[0])
        labels.append(r[1])
        mmse.append(int(r[2]) if r[2] else None)
        try:
            vals = [float(v) for v in r[3:]]
        except ValueError as e:
            raise FeatureTableError(f"{path}: row {k}: {e}") from None
        if not all(math.isfinite(v) for v in vals):
            raise FeatureTableError(f"{path}: row {k} has non-finite values")
        X.append(vals)
    if len(set(ids)) != len(ids):
        raise FeatureTableError(f"{path}: duplicate session ids")
    arr = np.array(X, float).reshape(len(ids), len(names))
    return FeatureTable(ids, labels, mmse, names, arr)
