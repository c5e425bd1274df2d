"""Signal analysis: pitch, intensity, glottal periods, harmonicity, syllable nuclei.

All contours use frames whose centres sit at ``window/2 + k*step`` seconds
from the start of the clip, so delaying a clip by a whole number of frames
shifts the frame grid exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.fft import irfft, next_fast_len, rfft
from scipy.ndimage import maximum_filter1d
from scipy.signal import find_peaks

from .corpus.audio import AudioClip

__all__ = [
    "PitchParams",
    "PitchContour",
    "IntensityContour",
    "PeriodTrack",
    "HarmonicityResult",
    "NucleusParams",
    "NucleusTrack",
    "NoVoicedSpeechError",
    "frame_centres",
    "pitch_track",
    "intensity_contour",
    "extract_periods",
    "harmonicity",
    "harmonicity_from_mean",
    "detect_nuclei",
]

REFERENCE_PRESSURE = 2e-5


class NoVoicedSpeechError(ValueError):
    pass


@dataclass(frozen=True)
class PitchParams:
    floor: float = 75.0
    ceiling: float = 600.0
    step: float = 0.0033
    window: float = 0.08
    voicing_threshold: float = 0.45
    silence_threshold: float = 0.03
    octave_cost: float = 0.01
    octave_jump_cost: float = 0.35
    voiced_unvoiced_cost: float = 0.14
    max_candidates: int = 15

    def __post_init__(self):
        if self.floor >= self.ceiling:
            raise ValueError(f"pitch floor {self.floor} must be below ceiling {self.ceiling}")
        if self.floor <= 0 or self.step <= 0 or self.window <= 0:
            raise ValueError("pitch floor, step and window must be positive")


@dataclass
class PitchContour:
    """F0 per frame; unvoiced frames hold NaN and ``voiced`` is False."""

    frame_times: np.ndarray
    f0: np.ndarray
    floor: float
    ceiling: float
    strength: np.ndarray = None

    @property
    def voiced(self) -> np.ndarray:
        return np.isfinite(self.f0)

    @property
    def step(self) -> float:
        if len(self.frame_times) < 2:
            return float("nan")
        return float(self.frame_times[1] - self.frame_times[0])

    def voiced_f0(self) -> np.ndarray:
        return self.f0[self.voiced]


@dataclass
class IntensityContour:
    frame_times: np.ndarray
    intensity_db: np.ndarray


@dataclass
class PeriodTrack:
    """Glottal epochs and the periods/amplitudes between them.

    ``region`` labels each period with its voiced region; differences
    between consecutive periods are only meaningful inside one region.
    """

    pulse_times: np.ndarray
    periods: np.ndarray
    amplitudes: np.ndarray
    region: np.ndarray = None

    def __post_init__(self):
        self.pulse_times = np.asarray(self.pulse_times, float)
        self.periods = np.asarray(self.periods, float)
        self.amplitudes = np.asarray(self.amplitudes, float)
        if self.region is None:
            self.region = np.zeros(self.periods.size, int)
        self.region = np.asarray(self.region, int)
        if not (self.periods.size == self.amplitudes.size == self.region.size):
            raise ValueError("periods, amplitudes and region labels must align")

    @classmethod
    def from_sequences(cls, periods, amplitudes=None):
        """Build a single-region track from a period list (seconds)."""
        periods = np.asarray(periods, float)
        if amplitudes is None:
            amplitudes = np.ones_like(periods)
        times = np.concatenate([[0.0], np.cumsum(periods)])
        return cls(times, periods, amplitudes)

    def __len__(self):
        return self.periods.size

    def groups(self, values=None):
        values = self.periods if values is None else values
        return [values[self.region == r] for r in np.unique(self.region)]


@dataclass(frozen=True)
class HarmonicityResult:
    autocorr_mean: float
    hnr_db: float
    nhr: float


@dataclass(frozen=True)
class NucleusParams:
    silence_db: float = -25.0
    min_dip_db: float = 2.0
    min_pause: float = 0.1


@dataclass
class NucleusTrack:
    nucleus_times: np.ndarray
    phonation_time: float
    pause_spans: list = field(default_factory=list)
    speech_spans: list = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.nucleus_times)


def frame_centres(duration: float, window: float, step: float) -> np.ndarray:
    if duration + 1e-12 < window:
        return np.zeros(0)
    n = int(np.floor((duration - window) / step + 1e-9)) + 1
    return window / 2 + step * np.arange(n)


def _gaussian_window(n: int) -> np.ndarray:
    edge = np.exp(-12.0)
    t = (np.arange(n) + 0.5) / n - 0.5
    return (np.exp(-48.0 * t * t) - edge) / (1.0 - edge)


class _Correlator:
    """Weighted normalized cross-correlation of short frames.

    For a frame starting at sample ``s`` the value at lag ``L`` is
    ``sum w x[s+n] x[s+n+L] / sqrt(sum w x[s+n]^2 * sum w x[s+n+L]^2)``.
    """

    def __init__(self, x, sr, window, max_lag):
        self.sr = sr
        self.n = int(round(window * sr))
        self.max_lag = int(max_lag)
        self.w = _gaussian_window(self.n)
        self.pad = self.n + self.max_lag + 1
        self.x = np.concatenate([np.zeros(self.pad), x, np.zeros(self.pad)])
        self.fft_len = next_fast_len(self.n + self.max_lag + 1)
        self.w_hat = np.conj(rfft(self.w, self.fft_len))

    def starts(self, centres_s):
        # the frame and its lagged copy jointly straddle the centre
        return np.round(centres_s * self.sr).astype(int) - (self.n + self.max_lag) // 2 + self.pad

    def correlate(self, starts, chunk=256):
        ext = self.n + self.max_lag
        idx = np.arange(ext)
        out = np.empty((len(starts), self.max_lag + 1))
        for a in range(0, len(starts), chunk):
            s = starts[a:a + chunk]
            seg = self.x[s[:, None] + idx[None, :]]
            head = seg[:, : self.n]
            e0 = (head * head) @ self.w
            num = irfft(np.conj(rfft(head * self.w, self.fft_len)) * rfft(seg, self.fft_len),
                        self.fft_len)[:, : self.max_lag + 1]
            el = irfft(self.w_hat * rfft(seg * seg, self.fft_len), self.fft_len)[:, : self.max_lag + 1]
            den = np.sqrt(np.maximum(e0[:, None] * el, 0.0))
            with np.errstate(invalid="ignore", divide="ignore"):
                r = np.where(den > 1e-300, num / den, 0.0)
            out[a:a + chunk] = np.clip(r, -1.0, 1.0)
        return out


def _parabolic(r, i):
    """Vertex of the parabola through r[i-1], r[i], r[i+1] as (offset, height)."""
    a, b, c = r[..., i - 1], r[..., i], r[..., i + 1]
    den = a - 2 * b + c
    with np.errstate(invalid="ignore", divide="ignore"):
        d = np.where(den < 0, 0.5 * (a - c) / den, 0.0)
    d = np.clip(d, -0.5, 0.5)
    return d, b - 0.25 * (a - c) * d


_SINC_HALF = 8
_FINE = np.linspace(-1.0, 1.0, 81)


def _sinc_kernel():
    k = np.arange(-_SINC_HALF + 1, _SINC_HALF + 1)
    u = _FINE[:, None] - k[None, :]
    win = 0.5 * (1 + np.cos(np.pi * np.clip(u / _SINC_HALF, -1, 1)))
    m = np.sinc(u) * win
    return k, m / m.sum(axis=1, keepdims=True)


_SINC_OFFSETS, _SINC_MATRIX = _sinc_kernel()


def _refine_lags(r, lags):
    """Sub-sample location and height of correlation peaks near integer ``lags``.

    The correlation is sinc-interpolated on a 1/40-sample grid within one
    sample of each lag, then the best grid point is polished parabolically.
    """
    idx = np.clip(lags[:, None] + _SINC_OFFSETS[None, :], 0, r.size - 1)
    fine = r[idx] @ _SINC_MATRIX.T
    j = np.clip(np.argmax(fine, axis=1), 1, _FINE.size - 2)
    d, h = _parabolic(fine, j) if fine.ndim == 1 else _parabolic_rows(fine, j)
    return lags + _FINE[j] + d * (_FINE[1] - _FINE[0]), h


def _parabolic_rows(m, j):
    rows = np.arange(m.shape[0])
    a, b, c = m[rows, j - 1], m[rows, j], m[rows, j + 1]
    den = a - 2 * b + c
    with np.errstate(invalid="ignore", divide="ignore"):
        d = np.where(den < 0, 0.5 * (a - c) / den, 0.0)
    d = np.clip(d, -0.5, 0.5)
    return d, b - 0.25 * (a - c) * d


def pitch_track(clip: AudioClip, floor: float = 75.0, ceiling: float = 600.0,
                params: PitchParams | None = None) -> PitchContour:
    """Track F0 by cross-correlation and a least-cost path over candidates.

    Each frame's candidates are the local maxima of the windowed normalized
    cross-correlation within the allowed lag range plus one unvoiced
    candidate. Viterbi decoding trades candidate strength against octave
    jumps and voicing changes.
    """
    if params is None:
        params = PitchParams(floor=floor, ceiling=ceiling)
    elif (floor, ceiling) != (75.0, 600.0):
        params = PitchParams(**{**params.__dict__, "floor": floor, "ceiling": ceiling})
    p = params
    sr = clip.sample_rate
    if clip.duration + 1e-12 < p.window:
        raise ValueError(f"clip of {clip.duration:.3f} s is shorter than the {p.window} s window")

    x = clip.samples
    times = frame_centres(clip.duration, p.window, p.step)
    nfr = times.size
    lag_min = max(2, int(np.floor(sr / p.ceiling)))
    lag_max = int(np.ceil(sr / p.floor)) + 1
    corr = _Correlator(x, sr, p.window, lag_max)
    starts = corr.starts(times)

    global_peak = float(np.max(np.abs(x)))
    f0 = np.full(nfr, np.nan)
    strength = np.zeros(nfr)
    if global_peak == 0.0 or nfr == 0:
        return PitchContour(times, f0, p.floor, p.ceiling, strength)

    r = corr.correlate(starts)
    centre_idx = starts - corr.pad + (corr.n + corr.max_lag) // 2
    local_peak = maximum_filter1d(np.abs(x), size=corr.n, mode="constant")[
        centre_idx.clip(0, x.size - 1)]

    # candidate extraction
    inner = r[:, lag_min:lag_max]
    left, right = r[:, lag_min - 1:lag_max - 1], r[:, lag_min + 1:lag_max + 1]
    is_peak = (inner > left) & (inner >= right) & (inner > 0.5 * p.voicing_threshold)
    unvoiced_strength = p.voicing_threshold + np.maximum(
        0.0, 2.0 - (local_peak / global_peak) / (p.silence_threshold / (1.0 + p.voicing_threshold)))

    cand_f, cand_s, cand_r = [], [], []
    for k in range(nfr):
        lags = np.nonzero(is_peak[k])[0] + lag_min
        fk, sk, rk = [np.nan], [unvoiced_strength[k]], [0.0]
        if lags.size:
            lag, h = _refine_lags(r[k], lags)
            h = np.minimum(h, 1.0)
            freq = sr / lag
            ok = (freq >= p.floor) & (freq <= p.ceiling)
            freq, h, lag = freq[ok], h[ok], lag[ok]
            s = h - p.octave_cost * np.log2(p.floor * lag / sr)
            order = np.argsort(-s, kind="stable")[: p.max_candidates - 1]
            fk += freq[order].tolist()
            sk += s[order].tolist()
            rk += h[order].tolist()
        cand_f.append(np.array(fk))
        cand_s.append(np.array(sk))
        cand_r.append(np.array(rk))

    # Viterbi over candidates; index 0 is always the unvoiced candidate
    tc = 0.01 / p.step
    cost = -cand_s[0]
    back = []
    for k in range(1, nfr):
        fp, fc = cand_f[k - 1], cand_f[k]
        vp, vc = np.isfinite(fp), np.isfinite(fc)
        with np.errstate(invalid="ignore"):
            jump = p.octave_jump_cost * np.abs(np.log2(fp[:, None] / fc[None, :]))
        trans = np.where(vp[:, None] & vc[None, :], jump,
                         np.where(vp[:, None] ^ vc[None, :], p.voiced_unvoiced_cost, 0.0)) * tc
        total = cost[:, None] + trans
        best = np.argmin(total, axis=0)
        back.append(best)
        cost = total[best, np.arange(fc.size)] - cand_s[k]
    path = np.empty(nfr, int)
    path[-1] = int(np.argmin(cost))
    for k in range(nfr - 1, 0, -1):
        path[k - 1] = back[k - 1][path[k]]
    for k in range(nfr):
        f0[k] = cand_f[k][path[k]]
        strength[k] = cand_r[k][path[k]]
    return PitchContour(times, f0, p.floor, p.ceiling, strength)


def intensity_contour(clip: AudioClip, window: float = 0.032, step: float = 0.0033) -> IntensityContour:
    """Intensity in dB re 2e-5 Pa of a sliding rectangular window.

    Windows whose mean power is zero (or below the reference) read 0 dB.
    """
    sr = clip.sample_rate
    x = clip.samples
    if clip.duration < window:
        times = np.array([clip.duration / 2])
        n = x.size
        starts = np.array([0])
    else:
        times = frame_centres(clip.duration, window, step)
        n = int(round(window * sr))
        starts = np.round(times * sr).astype(int) - n // 2
    csum = np.concatenate([[0.0], np.cumsum(x * x)])
    starts = starts.clip(0, x.size - n)
    power = (csum[starts + n] - csum[starts]) / n
    power = np.maximum(power, 0.0)
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(power / REFERENCE_PRESSURE ** 2)
    return IntensityContour(times, np.where(np.isfinite(db), np.maximum(db, 0.0), 0.0))


def _voiced_runs(voiced):
    v = np.concatenate([[False], voiced, [False]]).astype(int)
    d = np.diff(v)
    return list(zip(np.nonzero(d == 1)[0], np.nonzero(d == -1)[0] - 1))


def _refine_peak(x, i):
    """Sub-sample time (in samples) and height of the |x| extremum at i."""
    if i <= 0 or i >= x.size - 1:
        return float(i), abs(x[i])
    sign = 1.0 if x[i] >= 0 else -1.0
    seg = sign * x[i - 1:i + 2]
    d, h = _parabolic(seg, 1)
    return i + float(d), float(h)


def extract_periods(clip: AudioClip, pc: PitchContour, tolerance: float = 0.25,
                    min_pulses: int = 3, stop_ratio: float = 0.05) -> PeriodTrack:
    """Mark glottal epochs by peak chaining inside each voiced region.

    The chain is seeded at the largest absolute sample of the region and
    extended in both directions, each time taking the largest absolute peak
    within ``(1 +/- tolerance)`` times the local pitch period.
    """
    x = clip.samples
    sr = clip.sample_rate
    voiced = pc.voiced
    if not voiced.any():
        return PeriodTrack(np.zeros(0), np.zeros(0), np.zeros(0), np.zeros(0, int))
    step = pc.step if len(pc.frame_times) > 1 else 0.0
    vt, vf = pc.frame_times[voiced], pc.f0[voiced]

    def local_period(t):
        return 1.0 / np.interp(t, vt, vf)

    times_all, periods, amps, regions = [], [], [], []
    region_id = 0
    for a, b in _voiced_runs(voiced):
        lo = max(0, int(np.floor((pc.frame_times[a] - step / 2) * sr)))
        hi = min(x.size - 1, int(np.ceil((pc.frame_times[b] + step / 2) * sr)))
        if hi - lo < 3:
            continue
        seg_abs = np.abs(x[lo:hi + 1])
        seed = lo + int(np.argmax(seg_abs))
        seed_t, seed_a = _refine_peak(x, seed)
        if seed_a <= 0:
            continue
        floor_amp = stop_ratio * seed_a
        chain = [(seed_t, seed_a)]
        for direction in (1, -1):
            cur = seed_t
            found = []
            while True:
                period_s = local_period(cur / sr) * sr
                if direction == 1:
                    w0 = int(np.ceil(cur + (1 - tolerance) * period_s))
                    w1 = int(np.floor(cur + (1 + tolerance) * period_s))
                else:
                    w0 = int(np.ceil(cur - (1 + tolerance) * period_s))
                    w1 = int(np.floor(cur - (1 - tolerance) * period_s))
                if w0 < lo or w1 > hi or w1 <= w0:
                    break
                i = w0 + int(np.argmax(np.abs(x[w0:w1 + 1])))
                if i in (w0, w1):
                    break
                t_i, a_i = _refine_peak(x, i)
                if a_i < floor_amp:
                    break
                found.append((t_i, a_i))
                cur = t_i
            if direction == 1:
                chain = chain + found
            else:
                chain = found[::-1] + chain
        if len(chain) < min_pulses:
            continue
        t = np.array([c[0] for c in chain]) / sr
        amp = np.array([c[1] for c in chain])
        times_all.append(t)
        periods.append(np.diff(t))
        amps.append(amp[:-1])
        regions.append(np.full(t.size - 1, region_id))
        region_id += 1

    if not times_all:
        return PeriodTrack(np.zeros(0), np.zeros(0), np.zeros(0), np.zeros(0, int))
    return PeriodTrack(np.concatenate(times_all), np.concatenate(periods),
                       np.concatenate(amps), np.concatenate(regions))


def harmonicity_from_mean(r_mean: float) -> HarmonicityResult:
    r = float(r_mean)
    return HarmonicityResult(r, 10.0 * np.log10(r / (1.0 - r)), (1.0 - r) / r)


def harmonicity(clip: AudioClip, pc: PitchContour, window: float = 0.08,
                eps: float = 1e-10) -> HarmonicityResult:
    """Mean normalized autocorrelation at the pitch lag over voiced frames."""
    voiced = pc.voiced
    if not voiced.any():
        raise NoVoicedSpeechError("no voiced speech")
    sr = clip.sample_rate
    f0 = pc.f0[voiced]
    lag_max = int(np.ceil(sr / f0.min())) + 3
    corr = _Correlator(clip.samples, sr, window, lag_max)
    r = corr.correlate(corr.starts(pc.frame_times[voiced]))
    target = sr / f0
    values = np.empty(f0.size)
    for k in range(f0.size):
        lo = max(2, int(np.floor(target[k])) - 2)
        hi = min(lag_max - 1, int(np.ceil(target[k])) + 2)
        i = lo + int(np.argmax(r[k, lo:hi + 1]))
        _, h = _refine_lags(r[k], np.array([i]))
        values[k] = h[0]
    values = np.clip(values, eps, 1.0 - eps)
    return harmonicity_from_mean(values.mean())


def _spans_from_mask(mask, times, step, duration):
    spans = []
    for a, b in _voiced_runs(mask):
        spans.append((max(0.0, times[a] - step / 2), min(duration, times[b] + step / 2)))
    if spans:
        if spans[0][0] - 0.0 < step:
            spans[0] = (0.0, spans[0][1])
        if duration - spans[-1][1] < step:
            spans[-1] = (spans[-1][0], duration)
    return spans


def _complement(spans, duration):
    out, t = [], 0.0
    for a, b in spans:
        if a > t:
            out.append((t, a))
        t = max(t, b)
    if t < duration:
        out.append((t, duration))
    return out


def detect_nuclei(clip: AudioClip, ic: IntensityContour, pc: PitchContour,
                  params: NucleusParams | None = None) -> NucleusTrack:
    """Count syllable nuclei as voiced intensity peaks separated by dips.

    Frames louder than ``max - 25 dB`` form speech spans (pauses shorter
    than ``min_pause`` are absorbed). A nucleus is a local intensity maximum
    above that threshold whose prominence is at least ``min_dip_db``: the
    contour must fall that far below the peak before reaching any higher
    peak, on both sides. Peaks on unvoiced frames are ignored.
    """
    p = params or NucleusParams()
    dur = clip.duration
    db = ic.intensity_db
    times = ic.frame_times
    step = times[1] - times[0] if times.size > 1 else dur
    peak_db = float(db.max()) if db.size else 0.0
    if peak_db <= 0.0:
        return NucleusTrack(np.zeros(0), 0.0, [(0.0, dur)], [])
    threshold = peak_db + p.silence_db
    loud = db > max(threshold, 0.0)

    speech = _spans_from_mask(loud, times, step, dur)
    pauses = [s for s in _complement(speech, dur)]
    # absorb short pauses into the surrounding speech
    kept = [s for s in pauses if s[1] - s[0] >= p.min_pause - 1e-12]
    speech = _complement(kept, dur)
    phonation = float(sum(b - a for a, b in speech))

    # the clip boundary counts as a dip so an edge maximum can qualify
    padded = np.concatenate([[0.0], db, [0.0]])
    peaks, _ = find_peaks(padded, prominence=p.min_dip_db)
    peaks = peaks - 1
    voiced = pc.voiced
    nuclei = []
    last = None
    for i in peaks:
        if not loud[i]:
            continue
        # equal-height maxima without a real dip between them are one nucleus
        if last is not None and db[last:i + 1].min() > min(db[last], db[i]) - p.min_dip_db:
            continue
        if voiced.size:
            k = int(np.argmin(np.abs(pc.frame_times - times[i])))
            if not voiced[k]:
                continue
        nuclei.append(times[i])
        last = i
    return NucleusTrack(np.array(nuclei), phonation, kept, speech)
