"""Mono audio buffers and RIFF/WAVE reading and writing.

Only uncompressed PCM is handled: 8/16/24/32-bit integer and 32/64-bit
IEEE float. Multichannel input is mixed down by averaging channels.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "AudioClip",
    "WavError",
    "MalformedWavError",
    "UnsupportedCodecError",
    "load_wav",
    "write_wav",
]

_FORMAT_PCM = 0x0001
_FORMAT_FLOAT = 0x0003
_FORMAT_EXTENSIBLE = 0xFFFE


class WavError(ValueError):
    """Base class for WAV decoding problems."""


class MalformedWavError(WavError):
    """The RIFF container or its chunks are damaged."""


class UnsupportedCodecError(WavError):
    """The file is a valid RIFF/WAVE but not in a PCM encoding we read."""


@dataclass(frozen=True, eq=False)
class AudioClip:
    """A mono sample buffer.

    Attributes
    ----------
    samples : ndarray of float64
        Amplitudes, nominally in [-1, 1].
    sample_rate : int
        Samples per second.
    """

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.ascontiguousarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size < 1:
            raise ValueError("an AudioClip needs a non-empty 1-D sample array")
        if not np.all(np.isfinite(samples)):
            raise ValueError("AudioClip samples must be finite")
        if int(self.sample_rate) != self.sample_rate or self.sample_rate <= 0:
            raise ValueError(f"invalid sample rate {self.sample_rate!r}")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    def __len__(self):
        return self.samples.size

    def scaled(self, gain: float) -> "AudioClip":
        return AudioClip(self.samples * gain, self.sample_rate)


def _read_chunks(data: bytes, path):
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedWavError(f"{path}: not a RIFF/WAVE file")
    pos = 12
    chunks = {}
    while pos + 8 <= len(data):
        cid = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8:pos + 8 + size]
        # a short data chunk is tolerated (streaming recorders leave size unset)
        if len(body) < size and cid != b"data":
            raise MalformedWavError(f"{path}: chunk {cid!r} truncated")
        chunks.setdefault(cid, body)
        pos += 8 + size + (size & 1)
    if b"fmt " not in chunks:
        raise MalformedWavError(f"{path}: missing 'fmt ' chunk")
    if b"data" not in chunks:
        raise MalformedWavError(f"{path}: missing 'data' chunk")
    return chunks


def _decode(fmt: bytes, raw: bytes, path) -> tuple[np.ndarray, int]:
    if len(fmt) < 16:
        raise MalformedWavError(f"{path}: 'fmt ' chunk too short")
    tag, channels, rate, _, block_align, bits = struct.unpack_from("<HHIIHH", fmt)
    if tag == _FORMAT_EXTENSIBLE and len(fmt) >= 26:
        (tag,) = struct.unpack_from("<H", fmt, 24)
    if channels < 1 or rate < 1 or bits < 1:
        raise MalformedWavError(f"{path}: invalid format fields")
    width = bits // 8
    if block_align != channels * width:
        raise MalformedWavError(f"{path}: block alignment {block_align} inconsistent")
    nframes = len(raw) // block_align
    raw = raw[: nframes * block_align]

    if tag == _FORMAT_PCM and bits in (8, 16, 24, 32):
        if bits == 8:
            x = (np.frombuffer(raw, np.uint8).astype(np.float64) - 128.0) / 128.0
        elif bits == 24:
            b = np.frombuffer(raw, np.uint8).reshape(-1, 3).astype(np.int32)
            v = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
            v = np.where(v >= 1 << 23, v - (1 << 24), v)
            x = v / float(1 << 23)
        else:
            x = np.frombuffer(raw, f"<i{width}").astype(np.float64) / float(1 << (bits - 1))
    elif tag == _FORMAT_FLOAT and bits in (32, 64):
        x = np.frombuffer(raw, f"<f{width}").astype(np.float64)
    else:
        raise UnsupportedCodecError(
            f"{path}: unsupported encoding (format tag 0x{tag:04x}, {bits} bits)"
        )
    if nframes == 0:
        raise MalformedWavError(f"{path}: no audio frames")
    return x.reshape(nframes, channels).mean(axis=1), rate


def load_wav(path) -> AudioClip:
    """Read a PCM WAV file into a mono :class:`AudioClip`.

    Raises
    ------
    FileNotFoundError
        The path does not exist.
    MalformedWavError
        The RIFF structure is broken.
    UnsupportedCodecError
        The audio is compressed or otherwise not PCM.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such WAV file: {path}")
    chunks = _read_chunks(path.read_bytes(), path)
    samples, rate = _decode(chunks[b"fmt "], chunks[b"data"], path)
    return AudioClip(samples, rate)


def write_wav(path, clip: AudioClip, bits: int = 16) -> None:
    """Write ``clip`` as mono integer PCM (16 or 24 bit) or 32-bit float."""
    x = np.asarray(clip.samples, dtype=np.float64)
    if bits == 16:
        q = np.clip(np.round(x * 32768.0), -32768, 32767).astype("<i2")
        payload, tag = q.tobytes(), _FORMAT_PCM
    elif bits == 24:
        q = np.clip(np.round(x * 8388608.0), -8388608, 8388607).astype(np.int64)
        q = np.where(q < 0, q + (1 << 24), q).astype("<u4")
        payload, tag = q.view(np.uint8).reshape(-1, 4)[:, :3].tobytes(), _FORMAT_PCM
    elif bits == 32:
        payload, tag = x.astype("<f4").tobytes(), _FORMAT_FLOAT
    else:
        raise ValueError(f"cannot write {bits}-bit WAV")
    width = bits // 8
    fmt = struct.pack("<HHIIHH", tag, 1, clip.sample_rate,
                      clip.sample_rate * width, width, bits)
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt
    body += b"data" + struct.pack("<I", len(payload)) + payload
    if len(payload) & 1:
        body += b"\x00"
    Path(path).write_bytes(b"RIFF" + struct.pack("<I", len(body)) + body)
