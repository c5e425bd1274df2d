"""Pipeline configuration: an INI file layered over built-in defaults.

Every key has a default; unknown sections or keys are errors. Model
hyperparameters live in ``[model.<kind>]`` sections, e.g.::

    [run]
    seed = 7

    [model.rf_class]
    trees = 50

The file path comes from ``--config`` or else the ``ADSPEECH_CONFIG``
environment variable.
"""
from __future__ import annotations

import configparser
import hashlib
import json
import os
from dataclasses import fields
from pathlib import Path

from .dsp import NucleusParams, PitchParams
from .features.acoustic import AcousticParams
from .models.base import DEFAULTS as MODEL_DEFAULTS
from .models.base import ModelConfig

__all__ = ["ENV_VAR", "ConfigError", "PipelineConfig", "load_config", "default_sections"]

ENV_VAR = "ADSPEECH_CONFIG"


class ConfigError(ValueError):
    pass


def default_sections() -> dict:
    d = {
        "run": {"seed": 0},
        "pitch": {f.name: f.default for f in fields(PitchParams)},
        "intensity": {"window": 0.032},
        "periods": {"tolerance": 0.25, "min_pulses": 3, "stop_ratio": 0.05},
        "nuclei": {f.name: f.default for f in fields(NucleusParams)},
        "features": {"demographics": True},
        "stats": {"alpha": 0.05, "method": "welch"},
        "cv": {"folds": 10, "stratify": True, "n_jobs": 1},
        "synth": {"n_per_group": 24, "effects": "none", "n_turns": 24, "mmse_intercept": 6.0,
                  "mmse_slope": 40.0, "mmse_noise": 1.5, "snr_db": 25.0, "sample_rate": 16000,
                  "ad_at_ceiling": 0},
    }
    for kind, params in MODEL_DEFAULTS.items():
        d[f"model.{kind}"] = dict(params)
    return d


def _coerce(raw: str, default, where: str):
    try:
        if isinstance(default, bool):
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        return raw.strip()
    except ValueError:
        raise ConfigError(f"{where}: cannot read {raw!r} as {type(default).__name__}") from None


class PipelineConfig:
    """Resolved configuration. ``sections[name][key]`` holds typed values."""

    def __init__(self, sections: dict | None = None, source: str | None = None):
        self.sections = sections or default_sections()
        self.source = source
        if self.sections["stats"]["method"] not in ("welch", "pooled"):
            raise ConfigError("stats.method must be welch or pooled")
        try:
            self.acoustic_params()
            for kind in MODEL_DEFAULTS:
                self.model_config(kind)
        except ValueError as e:
            raise ConfigError(str(e)) from None

    @classmethod
    def from_text(cls, text: str, source: str = "<string>") -> "PipelineConfig":
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        try:
            parser.read_string(text, source=source)
        except configparser.Error as e:
            raise ConfigError(f"{source}: {e}") from None
        sections = default_sections()
        for name in parser.sections():
            if name not in sections:
                raise ConfigError(f"{source}: unknown section [{name}]")
            for key, raw in parser.items(name):
                if key not in sections[name]:
                    raise ConfigError(f"{source}: unknown key {name}.{key}")
                sections[name][key] = _coerce(raw, sections[name][key], f"{source}: {name}.{key}")
        return cls(sections, source)

    @property
    def seed(self) -> int:
        return int(self.sections["run"]["seed"])

    def digest(self) -> str:
        blob = json.dumps(self.sections, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:12]

    def acoustic_params(self) -> AcousticParams:
        s = self.sections
        return AcousticParams(
            pitch=PitchParams(**s["pitch"]),
            nuclei=NucleusParams(**s["nuclei"]),
            intensity_window=s["intensity"]["window"],
            period_tolerance=s["periods"]["tolerance"],
            min_pulses=s["periods"]["min_pulses"],
            stop_ratio=s["periods"]["stop_ratio"],
        )

    def model_config(self, kind: str, seed: int | None = None) -> ModelConfig:
        return ModelConfig(kind, dict(self.sections[f"model.{kind}"]),
                           self.seed if seed is None else seed)

    def dump(self) -> str:
        lines = []
        for name, kv in self.sections.items():
            lines.append(f"[{name}]")
            lines.extend(f"{k} = {str(v).lower() if isinstance(v, bool) else v}" for k, v in kv.items())
            lines.append("")
        return "\n".join(lines)


def load_config(path=None, environ=None) -> PipelineConfig:
    """Read ``path``, else the file named by ``ADSPEECH_CONFIG``, else defaults."""
    environ = os.environ if environ is None else environ
    path = path or environ.get(ENV_VAR) or None
    if path is None:
        return PipelineConfig()
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror or e}") from None
    return PipelineConfig.from_text(text, str(p))
