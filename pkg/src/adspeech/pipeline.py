"""Corpus-level feature extraction and holdout evaluation.

A corpus directory holds ``metadata.csv``, ``audio/<id>.wav`` and
``transcripts/<id>.cha``. Extraction is per session; the only shared
state is the fitted lexicon (vocabulary plus interviewer-turn range),
which is fit on a training corpus and reused unchanged for test corpora.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .chat import ChatParseError, read_chat
from .corpus.audio import WavError, load_wav
from .corpus.metadata import SessionRecord, load_metadata
from .features import (ALL_NAMES, AcousticParams, FeatureTable, InvTurnScaler, build_vocabulary,
                       lexical_names, lexical_scores)
from .features.acoustic import acoustic_features
from .models.base import ModelConfig
from .models.harness import TrainedModel, train_model
from .models.metrics import EvalReport, classification_report, regression_report
from .stats import OutlierRule, filter_outliers

__all__ = [
    "CorpusError",
    "SessionFailure",
    "ExtractionResult",
    "discover_sessions",
    "write_contours",
    "extract_corpus",
    "table_xy",
    "HoldoutResult",
    "evaluate_holdout",
]

log = logging.getLogger(__name__)


class CorpusError(ValueError):
    pass


def discover_sessions(corpus_dir) -> list[SessionRecord]:
    root = Path(corpus_dir)
    meta_path = root / "metadata.csv"
    if not meta_path.is_file():
        raise CorpusError(f"{root}: no metadata.csv")
    return [SessionRecord(m, root / "audio" / f"{m.session_id}.wav",
                          root / "transcripts" / f"{m.session_id}.cha")
            for m in load_metadata(meta_path)]


@dataclass(frozen=True)
class SessionFailure:
    session_id: str
    reason: str


@dataclass
class ExtractionResult:
    table: FeatureTable
    invalid: dict = field(default_factory=dict)       # session id -> sorted invalid names
    failures: list = field(default_factory=list)
    vocabulary: object = None
    scaler: object = None


def _acoustic(record, params, contour_dir=None):
    clip = load_wav(record.audio_path)
    if contour_dir is None:
        return acoustic_features(clip, params)
    c = {}
    feats = acoustic_features(clip, params, contours=c)
    write_contours(Path(contour_dir) / f"{record.meta.session_id}.csv", c["pitch"], c["intensity"])
    return feats


def write_contours(path, pc, ic) -> None:
    """Frame-level F0 (empty when unvoiced) and intensity as CSV."""
    lines = ["time,f0,intensity_db"]
    for t, f, db in zip(pc.frame_times, pc.f0, ic.intensity_db):
        lines.append(f"{t:.5f},{'' if np.isnan(f) else f'{f:.3f}'},{db:.3f}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def extract_corpus(corpus_dir, lexicon=None, params: AcousticParams | None = None,
                   n_jobs: int = 1, contour_dir=None) -> ExtractionResult:
    """All 79 features plus age and gender for every readable session.

    ``lexicon`` is a fitted ``(Vocabulary, InvTurnScaler)`` pair; when None
    it is fit on this corpus's transcripts. Sessions with missing or
    unreadable files are skipped and reported in ``failures``.
    """
    records = discover_sessions(corpus_dir)
    failures, transcripts, usable = [], {}, []
    for r in records:
        missing = r.missing_files()
        if missing:
            failures.append(SessionFailure(r.meta.session_id,
                                           "missing " + ", ".join(str(p) for p in missing)))
            continue
        try:
            transcripts[r.meta.session_id] = read_chat(r.transcript_path, r.meta.session_id)
        except (ChatParseError, UnicodeDecodeError) as e:
            failures.append(SessionFailure(r.meta.session_id, f"transcript: {e}"))
            continue
        usable.append(r)
    if not usable:
        raise CorpusError("no session could be read")

    if lexicon is None:
        ts = [transcripts[r.meta.session_id] for r in usable]
        vocab, scaler = build_vocabulary(ts), InvTurnScaler.fit(ts)
    else:
        vocab, scaler = lexicon

    params = params or AcousticParams()
    if contour_dir is not None:
        Path(contour_dir).mkdir(parents=True, exist_ok=True)
    work = lambda r: _safe_acoustic(r, params, contour_dir)
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as ex:
            acoustic = list(ex.map(work, usable))
    else:
        acoustic = [work(r) for r in usable]

    words = lexical_names(len(vocab.words))
    ids, labels, mmse, rows, invalid = [], [], [], [], {}
    for r, ac in zip(usable, acoustic):
        sid = r.meta.session_id
        if isinstance(ac, str):
            failures.append(SessionFailure(sid, ac))
            continue
        t = transcripts[sid]
        values = dict(ac.values)
        values.update(zip(words, lexical_scores(t, vocab).tolist()))
        values["inv_turns_norm"] = scaler.transform(t)
        values["age"] = float(r.meta.age)
        values["gender"] = 0.0 if r.meta.gender == "female" else 1.0
        ids.append(sid)
        labels.append(r.meta.label)
        mmse.append(r.meta.mmse)
        rows.append([values[n] for n in ALL_NAMES + ["age", "gender"]])
        if ac.invalid:
            invalid[sid] = sorted(ac.invalid)
    for f in failures:
        log.warning("skipped session %s: %s", f.session_id, f.reason)
    if not ids:
        raise CorpusError("every session failed")
    X = np.array(rows, float)
    table = FeatureTable(ids, labels, mmse, ALL_NAMES + ["age", "gender"], X)
    return ExtractionResult(table, invalid, failures, vocab, scaler)


def _safe_acoustic(record, params, contour_dir=None):
    try:
        return _acoustic(record, params, contour_dir)
    except (WavError, ValueError) as e:
        return f"audio: {e}"


def table_xy(table: FeatureTable, tag: str, classification: bool, demographics: bool = True):
    names, X = table.subset(tag, demographics)
    y = list(table.labels) if classification else table.mmse_array()
    return names, X, y


@dataclass
class HoldoutResult:
    report: EvalReport
    predictions: list
    dropped_ids: list
    model: TrainedModel


def evaluate_holdout(train: FeatureTable, test: FeatureTable, cfg: ModelConfig, tag: str,
                     rule: OutlierRule | None = None, demographics: bool = True) -> HoldoutResult:
    """Fit on (optionally outlier-filtered) training rows and score the test rows.

    Test labels or MMSE are needed only for the report; predictions are
    returned in test order regardless.
    """
    overlap = set(train.session_ids) & set(test.session_ids)
    if overlap:
        raise CorpusError(f"train and test share session ids: {', '.join(sorted(overlap)[:5])}")
    if list(train.names) != list(test.names):
        raise CorpusError("train and test feature names differ")
    dropped = []
    if rule is not None and not rule.is_noop:
        kept, drop_idx = filter_outliers(train.session_ids, train.labels, train.mmse,
                                         train.column("lex_mean"), rule)
        dropped = [train.session_ids[i] for i in drop_idx]
        train = train.select_rows(kept)
    names, X, y = table_xy(train, tag, cfg.is_classifier, demographics)
    model = train_model(cfg, X, y, names)
    Xt = test.subset(tag, demographics)[1]
    pred = model.predict(Xt)
    if cfg.is_classifier:
        report = classification_report(list(test.labels), list(pred),
                                       labels=sorted(set(train.labels) | set(test.labels)))
    elif all(m is not None for m in test.mmse):
        report = regression_report(test.mmse_array(), pred)
    else:
        report = EvalReport("regression", len(test))
    return HoldoutResult(report, list(pred), dropped, model)
