"""Synthetic voiced signals with known period and amplitude sequences.

Every speech segment is a train of short glottal-like pulses. A pulse is a
cosine carrier under a smooth rise-and-decay envelope lasting 40% of the
nominal period, so the waveform looks voiced to correlation-based pitch and
harmonicity analysis while each pulse still has a single dominant peak
whose time is the ground-truth epoch.

Randomness comes from ``numpy.random.default_rng(seed)`` (PCG64), whose
streams are identical on every platform.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .audio import AudioClip

__all__ = ["SynthSpec", "SynthResult", "InfeasibleSpecError", "synth_voice", "local_jitter",
           "local_shimmer"]

PITCH_FLOOR = 75.0
PITCH_CEILING = 600.0

BURST_FRACTION = 0.4      # pulse length relative to the nominal period
CARRIER_RATIO = 6.25      # carrier frequency relative to f0 (2.5 cycles per burst)
PERTURBATION_CLIP = 3.0


class InfeasibleSpecError(ValueError):
    pass


@dataclass(frozen=True)
class SynthSpec:
    """What to synthesize.

    ``segment_plan`` alternates speech and pause durations in seconds,
    starting with speech. ``syllable_rate`` (syllables per second of speech)
    adds a syllabic amplitude envelope; ``None`` keeps speech segments flat
    apart from short onset/offset ramps.
    """

    f0: float
    jitter_target: float = 0.0
    shimmer_target: float = 0.0
    noise_snr_db: Optional[float] = None
    segment_plan: Sequence[float] = (2.0,)
    sample_rate: int = 16000
    amplitude: float = 0.5
    syllable_rate: Optional[float] = None
    syllable_floor: float = 0.25
    ramp: float = 0.0

    def __post_init__(self):
        if not PITCH_FLOOR < self.f0 < PITCH_CEILING:
            raise ValueError(f"f0 {self.f0} outside ({PITCH_FLOOR}, {PITCH_CEILING})")
        for name in ("jitter_target", "shimmer_target"):
            v = getattr(self, name)
            if not 0.0 <= v <= 0.2:
                raise ValueError(f"{name} {v} outside [0, 0.2]")
        if not self.segment_plan or any(d <= 0 for d in self.segment_plan):
            raise ValueError("segment durations must be positive")
        if not 0 < self.amplitude <= 1:
            raise ValueError("amplitude must lie in (0, 1]")
        if self.syllable_rate is not None and self.syllable_rate <= 0:
            raise ValueError("syllable_rate must be positive")
        object.__setattr__(self, "segment_plan", tuple(float(d) for d in self.segment_plan))


@dataclass
class SynthResult:
    """A synthesized clip and its ground truth.

    ``periods`` and ``amplitudes`` are per pulse region (one list per speech
    segment); ``segments`` holds ``(start, end, is_speech)`` triples.
    """

    clip: AudioClip
    pulse_times: list = field(default_factory=list)
    periods: list = field(default_factory=list)
    amplitudes: list = field(default_factory=list)
    segments: list = field(default_factory=list)
    syllable_times: list = field(default_factory=list)

    @property
    def pause_spans(self):
        return [(a, b) for a, b, speech in self.segments if not speech]

    @property
    def speech_spans(self):
        return [(a, b) for a, b, speech in self.segments if speech]

    def realized_jitter(self) -> float:
        return local_jitter(self.periods)

    def realized_shimmer(self) -> float:
        return local_shimmer(self.amplitudes)


def local_jitter(period_groups) -> float:
    """Mean absolute within-group period difference over the mean period."""
    diffs = [np.abs(np.diff(g)) for g in period_groups if len(g) >= 2]
    allp = np.concatenate([np.asarray(g, float) for g in period_groups if len(g)])
    if not diffs:
        return 0.0
    return float(np.concatenate(diffs).mean() / allp.mean())


def local_shimmer(amplitude_groups) -> float:
    return local_jitter(amplitude_groups)


def _pulse(t, period):
    """Pulse shape evaluated at times ``t`` (seconds from onset)."""
    length = BURST_FRACTION * period
    tau = 0.25 * length
    fc = CARRIER_RATIO / period
    u = np.clip(t / tau, 0.0, None)
    env = u * u * np.exp(2.0 * (1.0 - u))
    taper_start = 0.75 * length
    taper = np.where(t <= taper_start, 1.0,
                     0.5 * (1 + np.cos(np.pi * np.clip((t - taper_start) / (length - taper_start), 0, 1))))
    inside = (t >= 0) & (t < length)
    return np.where(inside, env * taper * np.cos(2 * np.pi * fc * (t - tau)), 0.0), tau


def _scaled_perturbation(rng, n, target):
    """Zero-mean perturbations whose mean absolute first difference is ``target``."""
    if n == 0:
        return np.zeros(0)
    z = np.clip(rng.standard_normal(n), -PERTURBATION_CLIP, PERTURBATION_CLIP)
    z -= z.mean()
    if n < 2 or target == 0.0:
        return np.zeros(n)
    scale = np.abs(np.diff(z)).mean()
    return z * (target / scale) if scale > 0 else np.zeros(n)


def _syllable_envelope(t, dur, rate, floor):
    n = max(1, int(round(dur * rate)))
    phase = np.clip(t / dur, 0.0, 1.0 - 1e-12) * n
    return floor + (1.0 - floor) * np.sin(np.pi * (phase % 1.0)) ** 2, (np.arange(n) + 0.5) * dur / n


def synth_voice(spec: SynthSpec, seed: int) -> SynthResult:
    """Synthesize a pulse-train voice following ``spec``.

    Within each speech segment the pulse periods are ``T0 * (1 + j_i)`` with
    zero-mean seeded perturbations rescaled so that the realized local jitter
    equals ``spec.jitter_target``; pulse amplitudes are treated likewise for
    shimmer. Pauses are exact digital silence.
    """
    rng = np.random.default_rng(seed)
    sr = spec.sample_rate
    t0 = 1.0 / spec.f0
    burst = BURST_FRACTION * t0
    plan = spec.segment_plan
    for k in range(0, len(plan), 2):
        if plan[k] < t0:
            raise InfeasibleSpecError(
                f"speech segment {k // 2} lasts {plan[k]} s, shorter than one period {t0:.4f} s")

    total = sum(plan)
    n_samples = int(round(total * sr))
    x = np.zeros(n_samples)
    speech_mask = np.zeros(n_samples, bool)
    result = SynthResult(clip=None)

    start = 0.0
    for k, dur in enumerate(plan):
        is_speech = k % 2 == 0
        result.segments.append((start, start + dur, is_speech))
        if not is_speech:
            start += dur
            continue
        n_periods = int(np.floor((dur - burst) / t0 + 1e-9))
        jit = _scaled_perturbation(rng, n_periods, spec.jitter_target)
        shim = _scaled_perturbation(rng, n_periods + 1, spec.shimmer_target)
        periods = t0 * (1.0 + jit)
        onsets = start + np.concatenate([[0.0], np.cumsum(periods)])
        amps = spec.amplitude * (1.0 + shim)

        i0 = int(np.ceil(start * sr))
        i1 = min(n_samples, int(np.ceil((start + dur) * sr)))
        speech_mask[i0:i1] = True
        tt = np.arange(i0, i1) / sr
        seg = np.zeros(i1 - i0)
        span = int(np.ceil(burst * sr)) + 2
        for onset, a in zip(onsets, amps):
            j0 = max(i0, int(np.floor(onset * sr)))
            j1 = min(i1, j0 + span)
            shape, tau = _pulse(np.arange(j0, j1) / sr - onset, t0)
            seg[j0 - i0:j1 - i0] += a * shape
        tau = 0.25 * burst

        env = np.ones_like(tt)
        if spec.syllable_rate is not None:
            env, centres = _syllable_envelope(tt - start, dur, spec.syllable_rate, spec.syllable_floor)
            result.syllable_times.extend((start + centres).tolist())
        if spec.ramp > 0:
            rel = tt - start
            ramp = np.minimum(np.clip(rel / spec.ramp, 0, 1), np.clip((dur - rel) / spec.ramp, 0, 1))
            env = env * np.sin(0.5 * np.pi * ramp) ** 2
        x[i0:i1] = seg * env

        epochs = onsets + tau
        env_at = np.interp(epochs, tt, env) if tt.size else np.ones_like(epochs)
        result.pulse_times.extend(epochs.tolist())
        result.periods.append(np.diff(epochs).tolist())
        result.amplitudes.append((amps * env_at).tolist())
        start += dur

    if spec.noise_snr_db is not None and speech_mask.any():
        power = np.mean(x[speech_mask] ** 2)
        noise = rng.standard_normal(int(speech_mask.sum()))
        x[speech_mask] += noise * np.sqrt(power / 10 ** (spec.noise_snr_db / 10.0))

    peak = np.max(np.abs(x)) if x.size else 0.0
    if peak > 1.0:
        x /= peak
        result.amplitudes = [[a / peak for a in g] for g in result.amplitudes]
    result.clip = AudioClip(x, sr)
    return result
