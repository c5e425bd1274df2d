"""Session metadata: the ``id,age,gender,label,mmse`` CSV."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

__all__ = [
    "GENDERS",
    "LABELS",
    "METADATA_HEADER",
    "MetadataError",
    "SessionMeta",
    "SessionRecord",
    "load_metadata",
    "write_metadata",
]

GENDERS = ("female", "male")
LABELS = ("AD", "nonAD")
METADATA_HEADER = ["id", "age", "gender", "label", "mmse"]


class MetadataError(ValueError):
    """A metadata row is invalid. ``row`` is the 1-based file line."""

    def __init__(self, message, row=None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


@dataclass(frozen=True)
class SessionMeta:
    session_id: str
    age: int
    gender: str
    label: str
    mmse: Optional[int] = None

    def __post_init__(self):
        if self.gender not in GENDERS:
            raise ValueError(f"unknown gender {self.gender!r}")
        if self.label not in LABELS:
            raise ValueError(f"unknown label {self.label!r}")
        if self.mmse is not None and not 0 <= self.mmse <= 30:
            raise ValueError(f"MMSE {self.mmse} outside [0, 30]")


@dataclass(frozen=True)
class SessionRecord:
    """Metadata plus the audio and transcript files of one session."""

    meta: SessionMeta
    audio_path: Path
    transcript_path: Path

    def missing_files(self) -> list[Path]:
        return [p for p in (self.audio_path, self.transcript_path) if not Path(p).is_file()]


def _int_cell(value, name, row):
    try:
        return int(value)
    except ValueError:
        raise MetadataError(f"{name} {value!r} is not an integer", row) from None


def load_metadata(path) -> list[SessionMeta]:
    """Parse a metadata CSV. Lines starting with ``#`` are skipped."""
    text = Path(path).read_text(encoding="utf-8")
    return parse_metadata(text)


def parse_metadata(text: str) -> list[SessionMeta]:
    lines = [(n, ln) for n, ln in enumerate(text.splitlines(), 1)
             if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise MetadataError("empty metadata file")
    header_row, header = lines[0]
    if [c.strip() for c in next(csv.reader([header]))] != METADATA_HEADER:
        raise MetadataError(f"header must be {','.join(METADATA_HEADER)}", header_row)

    out, seen = [], {}
    for row, line in lines[1:]:
        cells = [c.strip() for c in next(csv.reader([line]))]
        if len(cells) != 5:
            raise MetadataError(f"expected 5 columns, found {len(cells)}", row)
        sid, age, gender, label, mmse = cells
        if not sid:
            raise MetadataError("empty id", row)
        if sid in seen:
            raise MetadataError(f"duplicate id {sid!r} (first seen on row {seen[sid]})", row)
        seen[sid] = row
        if gender not in GENDERS:
            raise MetadataError(f"unknown gender {gender!r}", row)
        if label not in LABELS:
            raise MetadataError(f"unknown label {label!r}", row)
        mmse_val = _int_cell(mmse, "mmse", row) if mmse else None
        if mmse_val is not None and not 0 <= mmse_val <= 30:
            raise MetadataError(f"mmse {mmse_val} outside [0, 30]", row)
        out.append(SessionMeta(sid, _int_cell(age, "age", row), gender, label, mmse_val))
    return out


def write_metadata(path, metas, comment: Optional[str] = None) -> None:
    buf = io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(METADATA_HEADER)
    for m in metas:
        w.writerow([m.session_id, m.age, m.gender, m.label, "" if m.mmse is None else m.mmse])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")
