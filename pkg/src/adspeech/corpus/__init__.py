"""Session data: audio, metadata and synthetic corpora."""
from .audio import (AudioClip, MalformedWavError, UnsupportedCodecError, WavError, load_wav,
                    write_wav)
from .metadata import (SessionMeta, SessionRecord, MetadataError, load_metadata, parse_metadata,
                       write_metadata)
from .synth import InfeasibleSpecError, SynthResult, SynthSpec, synth_voice
from .synth_corpus import (ADLIKE_PLAN, EFFECT_KEYS, KEY_WORDS, MANIFEST_FIELDS, CorpusPlan,
                           SessionPlan, parse_effects, plan_corpus, read_manifest, synth_corpus)

__all__ = [
    "AudioClip", "MalformedWavError", "UnsupportedCodecError", "WavError", "load_wav", "write_wav",
    "SessionMeta", "SessionRecord", "MetadataError", "load_metadata", "parse_metadata",
    "write_metadata", "InfeasibleSpecError", "SynthResult", "SynthSpec", "synth_voice",
    "ADLIKE_PLAN", "EFFECT_KEYS", "KEY_WORDS", "MANIFEST_FIELDS", "CorpusPlan", "SessionPlan",
    "parse_effects", "plan_corpus", "read_manifest", "synth_corpus",
]
