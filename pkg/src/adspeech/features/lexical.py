"""Transcript features: first-mention word scores and interviewer turn counts.

A word's score is ``1 - min(turn, max_turns) / max_turns`` where ``turn`` is
the 1-based global turn index (both speakers count) of the first
participant utterance containing it; absent words score 0.
"""
from __future__ import annotations

import json
import warnings
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..chat import PAR, Transcript, content_class, interviewer_turn_count

__all__ = [
    "VOCAB_SIZE",
    "Vocabulary",
    "VocabularyError",
    "InvTurnScaler",
    "build_vocabulary",
    "lexical_scores",
    "normalize_inv_turns",
    "lexical_names",
]

VOCAB_SIZE = 50


class VocabularyError(ValueError):
    pass


def lexical_names(n: int = VOCAB_SIZE) -> list[str]:
    return [f"lex_w{i:02d}" for i in range(1, n + 1)]


@dataclass(frozen=True)
class Vocabulary:
    """Top content lemmas of a training set.

    ``words`` holds ``(lemma, class)`` pairs in rank order, ``frequencies``
    the matching training counts.
    """

    words: tuple
    frequencies: tuple
    max_turns: int

    def __post_init__(self):
        if len(self.words) != len(self.frequencies):
            raise VocabularyError("words and frequencies differ in length")
        if self.max_turns < 1:
            raise VocabularyError("max_turns must be at least 1")

    def to_dict(self):
        return {"words": [list(w) for w in self.words], "frequencies": list(self.frequencies),
                "max_turns": self.max_turns}

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(tuple(w) for w in d["words"]), tuple(int(f) for f in d["frequencies"]),
                   int(d["max_turns"]))


def _content_lemmas(u):
    """(lemma, class) pairs of the content words in one aligned utterance."""
    if u.mor_tags is None:
        return []
    out = []
    for pos, lemma in u.mor_tags:
        cls = content_class(pos)
        if cls is not None:
            out.append((lemma, cls))
    return out


def build_vocabulary(transcripts, size: int = VOCAB_SIZE) -> Vocabulary:
    """Count participant content lemmas and keep the ``size`` most frequent.

    Ties are broken by ``(lemma, class)`` order so the result does not
    depend on transcript order.
    """
    transcripts = list(transcripts)
    if not transcripts:
        raise VocabularyError("no training transcripts")
    counts = Counter()
    for t in transcripts:
        for u in t.utterances:
            if u.speaker == PAR:
                counts.update(_content_lemmas(u))
    if len(counts) < size:
        raise VocabularyError(f"only {len(counts)} distinct content lemmas, need {size}")
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:size]
    return Vocabulary(tuple(w for w, _ in ranked), tuple(c for _, c in ranked),
                      max(t.n_turns for t in transcripts))


def first_turns(t: Transcript, vocab: Vocabulary) -> list:
    """First participant turn index of every vocabulary word, None when absent.

    Aligned utterances match on lemma and class; utterances without a usable
    %mor tier fall back to surface tokens.
    """
    index = {w: k for k, w in enumerate(vocab.words)}
    by_lemma = {}
    for k, (lemma, _) in enumerate(vocab.words):
        by_lemma.setdefault(lemma, []).append(k)
    first = [None] * len(vocab.words)
    for u in t.utterances:
        if u.speaker != PAR:
            continue
        if u.mor_tags is not None:
            hits = [index[p] for p in _content_lemmas(u) if p in index]
        else:
            hits = [k for tok in u.tokens for k in by_lemma.get(tok, ())]
        for k in hits:
            if first[k] is None:
                first[k] = u.turn_index
    return first


def lexical_scores(t: Transcript, vocab: Vocabulary) -> np.ndarray:
    m = vocab.max_turns
    return np.array([0.0 if f is None else 1.0 - min(f, m) / m for f in first_turns(t, vocab)])


def normalize_inv_turns(counts, train_min: int, train_max: int) -> np.ndarray:
    """Min-max scale interviewer turn counts with training constants, clamped to [0, 1]."""
    counts = np.asarray(counts, float)
    if train_max <= train_min:
        warnings.warn(f"degenerate interviewer-turn range [{train_min}, {train_max}]; "
                      "normalized values set to 0", RuntimeWarning, stacklevel=2)
        return np.zeros_like(counts)
    return np.clip((counts - train_min) / (train_max - train_min), 0.0, 1.0)


@dataclass(frozen=True)
class InvTurnScaler:
    train_min: int
    train_max: int

    @classmethod
    def fit(cls, transcripts):
        c = [interviewer_turn_count(t) for t in transcripts]
        return cls(min(c), max(c))

    def transform(self, t: Transcript) -> float:
        return float(normalize_inv_turns([interviewer_turn_count(t)], self.train_min,
                                         self.train_max)[0])


def save_lexicon(path, vocab: Vocabulary, scaler: InvTurnScaler, extra=None) -> None:
    """Write the fitted vocabulary and turn constants as a JSON sidecar."""
    d = {"vocabulary": vocab.to_dict(),
         "inv_turns": {"min": scaler.train_min, "max": scaler.train_max}}
    if extra:
        d.update(extra)
    Path(path).write_text(json.dumps(d, indent=1), encoding="utf-8")


def load_lexicon(path) -> tuple[Vocabulary, InvTurnScaler]:
    d = json.loads(Path(path).read_text(encoding="utf-8"))
    return (Vocabulary.from_dict(d["vocabulary"]),
            InvTurnScaler(int(d["inv_turns"]["min"]), int(d["inv_turns"]["max"])))
