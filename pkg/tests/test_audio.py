"""WAV reading/writing and metadata parsing."""
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adspeech.corpus.audio import (AudioClip, MalformedWavError, UnsupportedCodecError, load_wav,
                                   write_wav)
from adspeech.corpus.metadata import MetadataError, SessionMeta, parse_metadata


def _wav_bytes(frames: bytes, channels=1, rate=16000, bits=16, fmt=1, extra_chunks=b""):
    """A RIFF/WAVE file assembled by hand, field by field."""
    block = channels * bits // 8
    fmt_chunk = struct.pack("<4sIHHIIHH", b"fmt ", 16, fmt, channels, rate, rate * block, block, bits)
    data_chunk = struct.pack("<4sI", b"data", len(frames)) + frames
    if len(frames) % 2:
        data_chunk += b"\x00"
    body = b"WAVE" + fmt_chunk + extra_chunks + data_chunk
    return struct.pack("<4sI", b"RIFF", len(body)) + body


def test_silence_one_second(tmp_path):
    p = tmp_path / "silence.wav"
    p.write_bytes(_wav_bytes(b"\x00\x00" * 16000))
    clip = load_wav(p)
    assert clip.sample_rate == 16000
    assert clip.samples.size == 16000
    assert not clip.samples.any()
    assert clip.duration == 1.0


def test_full_scale_square_wave(tmp_path):
    p = tmp_path / "square.wav"
    p.write_bytes(_wav_bytes(struct.pack("<8h", *([32767, -32767] * 4))))
    clip = load_wav(p)
    np.testing.assert_array_equal(clip.samples, np.tile([32767 / 32768, -32767 / 32768], 4))
    assert abs(clip.samples[0] - 0.99997) < 1e-5


def test_stereo_is_averaged(tmp_path):
    p = tmp_path / "stereo.wav"
    frames = struct.pack("<200h", *([16384, -16384] * 100))
    p.write_bytes(_wav_bytes(frames, channels=2))
    clip = load_wav(p)
    assert clip.samples.size == 100
    assert not clip.samples.any()


def test_unknown_chunks_are_skipped(tmp_path):
    p = tmp_path / "list.wav"
    junk = struct.pack("<4sI", b"LIST", 5) + b"abcde\x00"
    p.write_bytes(_wav_bytes(struct.pack("<2h", 100, -100), extra_chunks=junk))
    np.testing.assert_array_equal(load_wav(p).samples, [100 / 32768, -100 / 32768])


def test_eight_bit_is_unsigned(tmp_path):
    p = tmp_path / "u8.wav"
    p.write_bytes(_wav_bytes(bytes([128, 255, 0]), bits=8))
    np.testing.assert_allclose(load_wav(p).samples, [0.0, 127 / 128, -1.0])


def test_float32_file(tmp_path):
    p = tmp_path / "f32.wav"
    p.write_bytes(_wav_bytes(struct.pack("<3f", 0.25, -0.5, 1.0), bits=32, fmt=3))
    np.testing.assert_array_equal(load_wav(p).samples, [0.25, -0.5, 1.0])


@pytest.mark.parametrize("blob", [b"", b"RIFF\x00\x00\x00\x00WAVX", b"RIFF\x04\x00\x00\x00WAVE"])
def test_malformed_files(tmp_path, blob):
    p = tmp_path / "bad.wav"
    p.write_bytes(blob)
    with pytest.raises(MalformedWavError):
        load_wav(p)


def test_short_data_chunk_reads_what_is_there(tmp_path):
    # recorders that stream to disk often leave the data size unpatched
    p = tmp_path / "trunc.wav"
    p.write_bytes(_wav_bytes(b"\x01\x00" * 10)[:-6])
    assert load_wav(p).samples.size == 7


def test_truncated_fmt_chunk(tmp_path):
    p = tmp_path / "fmt.wav"
    p.write_bytes(_wav_bytes(b"")[:30])
    with pytest.raises(MalformedWavError):
        load_wav(p)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_wav(tmp_path / "nope.wav")


def test_compressed_codec_rejected(tmp_path):
    p = tmp_path / "alaw.wav"
    p.write_bytes(_wav_bytes(b"\x00" * 4, bits=8, fmt=6))
    with pytest.raises(UnsupportedCodecError):
        load_wav(p)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-1.0, 1.0, allow_nan=False), min_size=1, max_size=300))
def test_round_trip_within_one_lsb(tmp_path_factory, values):
    p = tmp_path_factory.mktemp("rt") / "x.wav"
    clip = AudioClip(np.array(values), 8000)
    write_wav(p, clip)
    back = load_wav(p)
    assert back.sample_rate == 8000
    assert np.max(np.abs(back.samples - clip.samples)) <= 1 / 32768 + 1e-12


def test_clip_rejects_bad_input():
    with pytest.raises(ValueError):
        AudioClip(np.zeros(0), 16000)
    with pytest.raises(ValueError):
        AudioClip(np.array([0.0, np.nan]), 16000)
    with pytest.raises(ValueError):
        AudioClip(np.zeros(4), 0)


HEADER = "id,age,gender,label,mmse\n"


def test_metadata_row_mapping():
    rows = parse_metadata(HEADER + "S001,68,male,AD,20\nS002,55,female,nonAD,\n")
    assert rows[0] == SessionMeta("S001", 68, "male", "AD", 20)
    assert rows[1].mmse is None


def test_metadata_comment_lines_skipped():
    rows = parse_metadata("# generated\n" + HEADER + "S001,68,male,AD,20\n")
    assert [r.session_id for r in rows] == ["S001"]


def test_duplicate_id_named():
    with pytest.raises(MetadataError, match="S001"):
        parse_metadata(HEADER + "S001,68,male,AD,20\nS001,70,female,nonAD,29\n")


@pytest.mark.parametrize("row,needle", [
    ("S001,68,other,AD,20", "gender"),
    ("S001,68,male,MCI,20", "label"),
    ("S001,68,male,AD,31", "outside"),
    ("S001,old,male,AD,20", "age"),
    ("S001,68,male,AD", "columns"),
])
def test_bad_rows_located(row, needle):
    with pytest.raises(MetadataError, match=needle) as e:
        parse_metadata(HEADER + row + "\n")
    assert e.value.row == 2


def test_bad_header():
    with pytest.raises(MetadataError, match="header"):
        parse_metadata("id,age,sex,label,mmse\n")
