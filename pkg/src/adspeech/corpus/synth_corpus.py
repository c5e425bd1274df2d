"""A synthetic picture-description corpus with planted group differences.

Each session has a pulse-train recording made of equal speech stretches
separated by pauses, a CHAT transcript whose participant turns mention
picture words at planned turns, and metadata. The manifest records every
planted value so tests never have to trust the extractors to know the
truth.

Planted quantities and their nonAD baselines
--------------------------------------------
``pause``  mean pause length, 0.6 s (sd 0.08)
``rate``   syllables per second of speech, 4.2 (sd 0.25)
``lex``    lexical quality in [0, 1] steering how many picture words are
           mentioned and how early, 0.65 (sd 0.08)
``inv``    interviewer turns, 3 (spread -1, 0, +1)
``f0``     additive F0 shift in Hz, 0

An effect plan such as ``pause:+0.5,rate:-0.8`` shifts the AD group mean.
Continuous quantities are drawn as centred deviates within each group, so
the realized group means differ by exactly the planted shift.

MMSE is ``mmse_intercept + mmse_slope * lexical_score + N(0, mmse_noise)``
rounded and clamped to [0, 30], where ``lexical_score`` is the realized
mean first-mention score of the 50 picture words. ``ad_at_ceiling`` pins
that many AD sessions (the best lexical scorers) to MMSE 30, an implausible
score for the group that outlier filters are meant to catch.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .audio import write_wav
from .metadata import SessionMeta, write_metadata
from .synth import SynthSpec, synth_voice

__all__ = [
    "KEY_WORDS",
    "EFFECT_KEYS",
    "ADLIKE_PLAN",
    "CorpusPlan",
    "SessionPlan",
    "parse_effects",
    "plan_corpus",
    "synth_corpus",
    "read_manifest",
    "MANIFEST_FIELDS",
]

# (surface, %mor) for the 50 picture words: 28 nouns, 12 verbs, 10 adjectives
_NOUNS = ["apron", "bowl", "boy", "brother", "cabinet", "cookie", "counter", "cup", "curtain",
          "dish", "door", "faucet", "floor", "garden", "girl", "grass", "jar", "kitchen", "lid",
          "mother", "plate", "shelf", "shoe", "sink", "stool", "towel", "water", "window"]
_VERBS = [("takes", "take"), ("falls", "fall"), ("reaches", "reach"), ("washes", "wash"),
          ("dries", "dry"), ("overflows", "overflow"), ("stands", "stand"), ("spills", "spill"),
          ("holds", "hold"), ("looks", "look"), ("tips", "tip"), ("climbs", "climb")]
_ADJS = ["wet", "dirty", "open", "high", "full", "big", "little", "quiet", "clean", "busy"]

KEY_WORDS = ([(n, "det:art|the n|" + n, n, "noun") for n in _NOUNS]
             + [(s, f"v|{l}-3S", l, "verb") for s, l in _VERBS]
             + [(a, "adj|" + a, a, "adjective") for a in _ADJS])

EFFECT_KEYS = ("pause", "rate", "lex", "inv", "f0")
ADLIKE_PLAN = {"pause": 0.5, "rate": -0.8, "lex": -0.3, "inv": 3.0}

_BASE = {"pause": 0.6, "rate": 4.2, "lex": 0.65, "inv": 3.0, "f0": 0.0}
_SD = {"pause": 0.08, "rate": 0.25, "lex": 0.08}

MANIFEST_FIELDS = ["id", "label", "gender", "age", "f0", "jitter", "shimmer", "pause_len",
                   "n_pauses", "syllable_rate", "n_syllables", "speech_time", "duration",
                   "pause_ratio", "speech_rate", "lex_quality", "lexical_score", "inv_turns",
                   "n_turns", "mmse"]


def parse_effects(text: str) -> dict:
    """Parse ``key:+value`` items (comma separated); ``adlike`` expands to the preset."""
    plan = {}
    for item in filter(None, (p.strip() for p in (text or "").split(","))):
        if item == "adlike":
            plan.update(ADLIKE_PLAN)
            continue
        if item == "none":
            continue
        key, sep, val = item.partition(":")
        if not sep or key not in EFFECT_KEYS:
            raise ValueError(f"bad effect {item!r}; keys are {', '.join(EFFECT_KEYS)}")
        try:
            plan[key] = float(val)
        except ValueError:
            raise ValueError(f"bad effect value in {item!r}") from None
    return plan


@dataclass(frozen=True)
class CorpusPlan:
    n_per_group: int = 24
    effects: dict = field(default_factory=dict)
    seed: int = 0
    n_turns: int = 24
    speech_segments: int = 4
    syllables_per_segment: int = 5
    mmse_intercept: float = 6.0
    mmse_slope: float = 40.0
    mmse_noise: float = 1.5
    snr_db: float = 25.0
    sample_rate: int = 16000
    ad_at_ceiling: int = 0

    def __post_init__(self):
        if self.n_per_group < 2:
            raise ValueError("n_per_group must be at least 2")
        if not 0 <= self.ad_at_ceiling <= self.n_per_group:
            raise ValueError("ad_at_ceiling must lie in [0, n_per_group]")
        unknown = set(self.effects) - set(EFFECT_KEYS)
        if unknown:
            raise ValueError(f"unknown effect keys {sorted(unknown)}")


@dataclass
class SessionPlan:
    session_id: str
    label: str
    gender: str
    age: int
    f0: float
    jitter: float
    shimmer: float
    pause_len: float
    syllable_rate: float
    lex_quality: float
    inv_turns: int
    turns: list              # (speaker, text, mor or None)
    first_turn: dict         # key lemma -> first participant turn (1-based), absent words omitted
    lexical_score: float
    mmse: int
    segment_plan: tuple

    def manifest_row(self, n_turns, syllables_per_segment):
        speech = [d for k, d in enumerate(self.segment_plan) if k % 2 == 0]
        pauses = [d for k, d in enumerate(self.segment_plan) if k % 2 == 1]
        duration = sum(self.segment_plan)
        n_syl = syllables_per_segment * len(speech)
        return {
            "id": self.session_id, "label": self.label, "gender": self.gender, "age": self.age,
            "f0": self.f0, "jitter": self.jitter, "shimmer": self.shimmer,
            "pause_len": self.pause_len, "n_pauses": len(pauses),
            "syllable_rate": self.syllable_rate, "n_syllables": n_syl,
            "speech_time": sum(speech), "duration": duration,
            "pause_ratio": sum(pauses) / duration, "speech_rate": n_syl / duration,
            "lex_quality": self.lex_quality, "lexical_score": self.lexical_score,
            "inv_turns": self.inv_turns, "n_turns": n_turns, "mmse": self.mmse,
        }


def _centred(rng, n, sd, clip=2.5):
    z = np.clip(rng.standard_normal(n), -clip, clip)
    return sd * (z - z.mean())


def _utterance(rng, words):
    """Main-tier text and %mor for a participant turn naming ``words``."""
    if not words:
        return "&-um okay .", "co|okay ."
    main, mor = [], []
    for k, w in enumerate(words):
        surface, tag = w[0], w[1]
        text = f"the {surface}" if tag.startswith("det:") else surface
        if k:
            main.append("and")
            mor.append("conj|and")
        main.append(text)
        mor.append(tag)
    body = " ".join(main)
    r = rng.random()
    if r < 0.15:
        first = main[0]
        body = (f"<{first}> [/] " if " " in first else f"{first} [/] ") + body
    elif r < 0.3:
        body = "&-uh " + body
    return body + " .", " ".join(mor) + " ."


def _session_transcript(rng, quality, inv_turns, n_turns):
    # the interviewer opens; the other prompts land at random turns
    extra = rng.choice(np.arange(2, n_turns + 1), inv_turns - 1, replace=False)
    inv_positions = {1} | set(extra.tolist())
    par_turns = [t for t in range(1, n_turns + 1) if t not in inv_positions]
    mention_p = float(np.clip(0.25 + 0.7 * quality, 0.0, 1.0))
    skew = 0.5 + 2.0 * quality
    first = {}
    per_turn = {t: [] for t in par_turns}
    for w in KEY_WORDS:
        if rng.random() < mention_p:
            u = rng.random() ** skew
            t = par_turns[min(len(par_turns) - 1, int(u * len(par_turns)))]
            first[w[2]] = t
            per_turn[t].append(w)
    turns = []
    mentioned = []
    for t in range(1, n_turns + 1):
        if t in inv_positions:
            prompt = "tell me what you see in the picture ." if t == 1 else "what else is happening ?"
            turns.append(("INV", prompt, None))
            continue
        words = list(per_turn[t])
        if mentioned and rng.random() < 0.4:
            words.append(mentioned[int(rng.integers(len(mentioned)))])
        rng.shuffle(words)
        main, mor = _utterance(rng, words)
        turns.append(("PAR", main, mor))
        mentioned.extend(per_turn[t])
    score = float(np.mean([1.0 - min(first[w[2]], n_turns) / n_turns if w[2] in first else 0.0
                           for w in KEY_WORDS]))
    return turns, first, score


def plan_corpus(plan: CorpusPlan) -> list[SessionPlan]:
    """Draw every planted value; nothing is written."""
    rng = np.random.default_rng(plan.seed)
    n = plan.n_per_group
    sessions = []
    for g, label in enumerate(("nonAD", "AD")):
        shift = (lambda k: plan.effects.get(k, 0.0)) if label == "AD" else (lambda k: 0.0)
        pause = _BASE["pause"] + shift("pause") + _centred(rng, n, _SD["pause"])
        rate = _BASE["rate"] + shift("rate") + _centred(rng, n, _SD["rate"])
        qual = np.clip(_BASE["lex"] + shift("lex") + _centred(rng, n, _SD["lex"]), 0.0, 1.0)
        inv_mean = int(round(_BASE["inv"] + shift("inv")))
        inv = inv_mean + rng.permutation(np.arange(n) % 3 - 1)
        inv = np.clip(inv, 1, plan.n_turns - 2)
        genders = rng.permutation(["female", "male"] * (n // 2) + ["female"] * (n % 2))
        ages = rng.integers(55, 81, n)
        if np.any(pause <= 0.15) or np.any(rate <= 1.0):
            raise ValueError("effect plan drives pause or rate out of range")
        for i in range(n):
            sid = f"S{g * n + i + 1:03d}"
            female = genders[i] == "female"
            f0 = (rng.uniform(185, 225) if female else rng.uniform(105, 135)) + shift("f0")
            jitter = float(rng.uniform(0.004, 0.012))
            shimmer = float(rng.uniform(0.02, 0.06))
            seg = plan.syllables_per_segment / rate[i]
            segs = []
            for k in range(plan.speech_segments):
                if k:
                    segs.append(round(float(pause[i]), 6))
                segs.append(round(float(seg), 6))
            turns, first, score = _session_transcript(rng, qual[i], int(inv[i]), plan.n_turns)
            mmse = plan.mmse_intercept + plan.mmse_slope * score + rng.normal(0, plan.mmse_noise)
            sessions.append(SessionPlan(
                sid, label, str(genders[i]), int(ages[i]), float(f0), jitter, shimmer,
                float(pause[i]), float(rate[i]), float(qual[i]), int(inv[i]), turns, first, score,
                int(np.clip(round(mmse), 0, 30)), tuple(segs)))
    if plan.ad_at_ceiling:
        # the best lexical scorers among AD sessions get MMSE 30
        ad = sorted((s for s in sessions if s.label == "AD"),
                    key=lambda s: (-s.lexical_score, s.session_id))
        for s in ad[:plan.ad_at_ceiling]:
            s.mmse = 30
    return sessions


def chat_text(s: SessionPlan) -> str:
    lines = ["@UTF8", "@Begin", "@Languages:\teng",
             "@Participants:\tPAR Participant, INV Investigator",
             f"@ID:\teng|synthetic|PAR|{s.age};|{s.gender}|{s.label}||Participant|||",
             "@Comment:\tsynthetic session"]
    for spk, main, mor in s.turns:
        lines.append(f"*{spk}:\t{main}")
        if mor is not None:
            lines.append(f"%mor:\t{mor}")
    lines.append("@End")
    return "\n".join(lines) + "\n"


def _fmt(v):
    return repr(round(v, 9)) if isinstance(v, float) else str(v)


def synth_corpus(out_dir, plan: CorpusPlan, audio: bool = True, header: str | None = None):
    """Write ``audio/``, ``transcripts/``, ``metadata.csv`` and ``manifest.csv``.

    Returns the session plans. With ``audio=False`` no WAV files are made
    (transcript-only experiments).
    """
    out = Path(out_dir)
    (out / "transcripts").mkdir(parents=True, exist_ok=True)
    if audio:
        (out / "audio").mkdir(exist_ok=True)
    sessions = plan_corpus(plan)
    for k, s in enumerate(sessions):
        (out / "transcripts" / f"{s.session_id}.cha").write_text(chat_text(s), encoding="utf-8")
        if audio:
            spec = SynthSpec(f0=s.f0, jitter_target=s.jitter, shimmer_target=s.shimmer,
                             noise_snr_db=plan.snr_db, segment_plan=s.segment_plan,
                             sample_rate=plan.sample_rate, syllable_rate=s.syllable_rate)
            res = synth_voice(spec, seed=int(np.random.default_rng([plan.seed, k]).integers(2**31)))
            write_wav(out / "audio" / f"{s.session_id}.wav", res.clip)
    write_metadata(out / "metadata.csv",
                   [SessionMeta(s.session_id, s.age, s.gender, s.label, s.mmse) for s in sessions],
                   comment=header)
    buf = io.StringIO()
    if header:
        buf.write(f"# {header}\n")
    effects = ",".join(f"{k}:{v:+g}" for k, v in sorted(plan.effects.items())) or "none"
    buf.write(f"# effects={effects} n_per_group={plan.n_per_group} seed={plan.seed} "
              f"mmse={plan.mmse_intercept:g}+{plan.mmse_slope:g}*lexical_score+N(0,{plan.mmse_noise:g}) "
              f"ad_at_ceiling={plan.ad_at_ceiling}\n")
    w = csv.DictWriter(buf, MANIFEST_FIELDS, lineterminator="\n")
    w.writeheader()
    for s in sessions:
        w.writerow({k: _fmt(v) for k, v in s.manifest_row(plan.n_turns, plan.syllables_per_segment).items()})
    (out / "manifest.csv").write_text(buf.getvalue(), encoding="utf-8")
    return sessions


def read_manifest(path) -> list[dict]:
    text = Path(path).read_text(encoding="utf-8")
    rows = list(csv.DictReader(ln for ln in text.splitlines() if not ln.startswith("#")))
    out = []
    for r in rows:
        d = {}
        for k, v in r.items():
            if k in ("id", "label", "gender"):
                d[k] = v
            elif k in ("age", "n_pauses", "n_syllables", "inv_turns", "n_turns", "mmse"):
                d[k] = int(v)
            else:
                d[k] = float(v)
        out.append(d)
    return out
