"""Prosodic and voice-quality features computed from DSP contours."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..corpus.audio import AudioClip
from ..dsp import (NoVoicedSpeechError, NucleusParams, NucleusTrack, PeriodTrack, PitchContour,
                   PitchParams, detect_nuclei, extract_periods, harmonicity, intensity_contour,
                   pitch_track)

__all__ = [
    "F0_NAMES",
    "RHYTHM_NAMES",
    "PROSODY_NAMES",
    "JITTER_NAMES",
    "SHIMMER_NAMES",
    "HARMONICITY_NAMES",
    "VOICE_QUALITY_NAMES",
    "ACOUSTIC_NAMES",
    "InsufficientVoicingError",
    "TooFewPeriodsError",
    "AcousticFeatures",
    "f0_features",
    "mean_intensity",
    "rhythm_features",
    "jitter_features",
    "shimmer_features",
    "AcousticParams",
    "acoustic_features",
]

F0_NAMES = ["mean_f0", "std_f0", "max_f0", "min_f0", "range_f0", "slope_f0", "slope_f0_no_jump"]
RHYTHM_NAMES = ["pause_ratio", "avg_pause_len", "speech_rate", "articulation_rate",
                "avg_syllable_dur", "effective_dur"]
PROSODY_NAMES = F0_NAMES + ["mean_intensity"] + RHYTHM_NAMES
JITTER_NAMES = ["jitter_loc", "jitter_abs", "jitter_rap", "jitter_ppq5", "jitter_ddp"]
SHIMMER_NAMES = ["shimmer_loc", "shimmer_db", "shimmer_apq3", "shimmer_apq5", "shimmer_apq11",
                 "shimmer_dda"]
HARMONICITY_NAMES = ["autocorr_mean", "nhr", "hnr_db"]
VOICE_QUALITY_NAMES = JITTER_NAMES + SHIMMER_NAMES + HARMONICITY_NAMES
ACOUSTIC_NAMES = PROSODY_NAMES + VOICE_QUALITY_NAMES

OCTAVE_JUMP_RATIO = 1.5


class InsufficientVoicingError(ValueError):
    pass


class TooFewPeriodsError(ValueError):
    pass


@dataclass
class AcousticFeatures:
    """Named acoustic values plus flags for quantities that could not be measured.

    A flagged value is stored as 0.0.
    """

    values: dict
    invalid: set = field(default_factory=set)

    def vector(self, names=ACOUSTIC_NAMES):
        return np.array([self.values[n] for n in names])


def f0_features(pc: PitchContour) -> tuple[dict, set]:
    """F0 statistics on the log10 scale.

    The slopes are mean absolute log10-F0 change per second between
    adjacent voiced frames; the jump-free slope skips frame pairs whose F0
    ratio exceeds 1.5 (octave errors).
    """
    voiced = pc.voiced
    if voiced.sum() < 2:
        raise InsufficientVoicingError("insufficient voicing")
    logf = np.log10(pc.f0[voiced])
    out = {
        "mean_f0": float(logf.mean()),
        "std_f0": float(logf.std(ddof=1)),
        "max_f0": float(logf.max()),
        "min_f0": float(logf.min()),
    }
    out["range_f0"] = out["max_f0"] - out["min_f0"]
    invalid = set()

    pair = voiced[:-1] & voiced[1:]
    if not pair.any():
        out["slope_f0"] = out["slope_f0_no_jump"] = 0.0
        return out, {"slope_f0", "slope_f0_no_jump"}
    f_a, f_b = pc.f0[:-1][pair], pc.f0[1:][pair]
    dt = np.diff(pc.frame_times)[pair]
    rates = np.abs(np.log10(f_b) - np.log10(f_a)) / dt
    out["slope_f0"] = float(rates.mean())
    keep = np.maximum(f_a, f_b) / np.minimum(f_a, f_b) <= OCTAVE_JUMP_RATIO
    if keep.any():
        out["slope_f0_no_jump"] = float(rates[keep].mean())
    else:
        out["slope_f0_no_jump"] = 0.0
        invalid.add("slope_f0_no_jump")
    return out, invalid


def mean_intensity(db) -> float:
    """Energy-averaged intensity in dB (loud frames dominate, silence barely counts)."""
    db = np.asarray(db, float)
    return float(10.0 * np.log10(np.mean(10.0 ** (db / 10.0))))


def rhythm_features(nt: NucleusTrack, clip_dur: float) -> tuple[dict, set]:
    if clip_dur <= 0:
        raise ValueError("clip duration must be positive")
    pauses = [b - a for a, b in nt.pause_spans]
    total_pause = float(sum(pauses))
    n = nt.count
    phon = float(nt.phonation_time)
    invalid = set()
    out = {
        "pause_ratio": total_pause / clip_dur,
        "avg_pause_len": total_pause / len(pauses) if pauses else 0.0,
        "speech_rate": n / clip_dur,
        "articulation_rate": n / phon if phon > 0 else 0.0,
        "avg_syllable_dur": phon / n if n else 0.0,
        "effective_dur": phon,
    }
    if n == 0:
        invalid.add("avg_syllable_dur")
    if phon <= 0:
        invalid.add("articulation_rate")
    return out, invalid


def _window_deviation(values, region, half):
    """|x_i - mean(x_{i-half..i+half})| for every i whose window stays in one region.

    Summed as differences x_i - x_k so a constant window gives exactly 0.
    """
    width = 2 * half + 1
    devs = []
    for r in np.unique(region):
        x = values[region == r]
        if x.size < width:
            continue
        centre = x[half:x.size - half]
        acc = np.zeros(centre.size)
        for o in range(-half, half + 1):
            if o:
                acc += centre - x[half + o:x.size - half + o]
        devs.append(np.abs(acc) / width)
    return np.concatenate(devs) if devs else np.zeros(0)


def _first_diffs(values, region):
    return np.concatenate([np.diff(values[region == r]) for r in np.unique(region)])


def jitter_features(pt: PeriodTrack, min_periods: int = 6) -> dict:
    if len(pt) < min_periods:
        raise TooFewPeriodsError(f"jitter needs {min_periods} periods, got {len(pt)}")
    T, reg = pt.periods, pt.region
    mean_t = T.mean()
    absdiff = np.abs(_first_diffs(T, reg)).mean()
    rap = _window_deviation(T, reg, 1).mean() / mean_t
    return {
        "jitter_loc": float(absdiff / mean_t),
        "jitter_abs": float(absdiff),
        "jitter_rap": float(rap),
        "jitter_ppq5": float(_window_deviation(T, reg, 2).mean() / mean_t),
        # |x_i - mean3| = |second difference| / 3, so DDP is exactly 3 RAP
        "jitter_ddp": float(3 * rap),
    }


def shimmer_features(pt: PeriodTrack, min_periods: int = 12) -> dict:
    if len(pt) < min_periods:
        raise TooFewPeriodsError(f"shimmer needs {min_periods} periods, got {len(pt)}")
    A, reg = pt.amplitudes, pt.region
    mean_a = A.mean()
    ratios = np.concatenate([A[reg == r][1:] / A[reg == r][:-1] for r in np.unique(reg)])
    out = {
        "shimmer_loc": float(np.abs(_first_diffs(A, reg)).mean() / mean_a),
        "shimmer_db": float(np.abs(20.0 * np.log10(ratios)).mean()),
    }
    for n in (3, 5, 11):
        dev = _window_deviation(A, reg, n // 2)
        out[f"shimmer_apq{n}"] = float(dev.mean() / mean_a) if dev.size else 0.0
    out["shimmer_dda"] = 3 * out["shimmer_apq3"]          # same identity as DDP
    return out


@dataclass(frozen=True)
class AcousticParams:
    pitch: PitchParams = PitchParams()
    nuclei: NucleusParams = NucleusParams()
    intensity_window: float = 0.032
    period_tolerance: float = 0.25
    min_pulses: int = 3
    stop_ratio: float = 0.05


def acoustic_features(clip: AudioClip, params: AcousticParams | None = None,
                      contours: dict | None = None) -> AcousticFeatures:
    """All 28 acoustic features of one clip.

    Quantities that cannot be measured (no voicing, too few periods) are
    zeroed and named in ``invalid``. Pass a dict as ``contours`` to receive
    the intermediate pitch/intensity/period/nucleus objects.
    """
    p = params or AcousticParams()
    pc = pitch_track(clip, params=p.pitch)
    ic = intensity_contour(clip, window=p.intensity_window, step=p.pitch.step)
    nt = detect_nuclei(clip, ic, pc, p.nuclei)
    pt = extract_periods(clip, pc, p.period_tolerance, p.min_pulses, p.stop_ratio)
    if contours is not None:
        contours.update(pitch=pc, intensity=ic, nuclei=nt, periods=pt)

    values, invalid = {}, set()
    try:
        v, bad = f0_features(pc)
        values.update(v)
        invalid |= bad
    except InsufficientVoicingError:
        values.update(dict.fromkeys(F0_NAMES, 0.0))
        invalid |= set(F0_NAMES)
    values["mean_intensity"] = mean_intensity(ic.intensity_db)
    v, bad = rhythm_features(nt, clip.duration)
    values.update(v)
    invalid |= bad
    for names, fn in ((JITTER_NAMES, jitter_features), (SHIMMER_NAMES, shimmer_features)):
        try:
            values.update(fn(pt))
        except TooFewPeriodsError:
            values.update(dict.fromkeys(names, 0.0))
            invalid |= set(names)
    try:
        h = harmonicity(clip, pc)
        values.update(autocorr_mean=h.autocorr_mean, nhr=h.nhr, hnr_db=h.hnr_db)
    except NoVoicedSpeechError:
        values.update(dict.fromkeys(HARMONICITY_NAMES, 0.0))
        invalid |= set(HARMONICITY_NAMES)
    values = {k: float(v) for k, v in values.items()}
    return AcousticFeatures(values, invalid)
