"""A reader for the subset of CHAT transcripts found in picture-description corpora.

Handled:

* ``@Begin`` / ``@End`` framing (required) and ``@UTF8``; other ``@`` headers
  are consumed, and only ``@Participants`` is interpreted.
* Main tiers ``*XXX:`` and dependent tiers ``%xxx:``; lines starting with a
  tab continue the previous line.
* ``%mor`` entries ``pos|lemma-suffix`` (with ``prefix#``, ``&fusion``,
  ``=gloss``, ``~`` clitics and ``+`` compounds), aligned to the main-tier
  tokens one-to-one after punctuation entries are dropped.
* Main-tier markup: retracing ``[/] [//] [///]``, replacement ``[: word]``,
  other bracketed codes and comments, ``<...>`` scopes, ``&=event``,
  ``&-filler``, ``&+fragment``, pauses ``(.)``, completions ``(be)cause``,
  ``@`` special-form suffixes, lengthening ``:``, linkers and terminators,
  ``xxx``/``yyy``/``www`` and omitted ``0word`` forms, media bullets.

Not handled: ``%gra`` and other dependent tiers are kept only as raw text;
timing bullets are dropped, never interpreted.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

__all__ = [
    "ChatParseError",
    "Utterance",
    "Transcript",
    "parse_chat",
    "read_chat",
    "normalize_tokens",
    "interviewer_turn_count",
    "content_class",
    "to_canonical",
]

PAR, INV, OTHER = "PAR", "INV", "other"

_ROLE_CLASS = {"participant": PAR, "investigator": INV}
_BULLET = re.compile("\x15[^\x15]*\x15")
_PAUSE = re.compile(r"^\(\d*\.+\d*\)$|^\(\d+:\d+\.?\d*\)$")
_LINKER = re.compile(r"^\+[^\w]*$")
_LINKER_TOKEN = re.compile(r"(?<!\S)\+[^\w\s]*(?!\S)")
_MARKUP = set("[]<>()&@:^*%$~=\"↑↓↫≈≋⌈⌉⌊⌋")
_EDGE_PUNCT = ".,?!;„‡"
_RETRACE = re.compile(r"^/{1,3}[-?]?$")
_UNINTELLIGIBLE = {"xxx", "yyy", "www", "xx", "yy"}


class ChatParseError(ValueError):
    """Malformed CHAT input.

    ``line`` is 1-based; ``offset`` is a 0-based character position in the
    tier body (after the tab), set for markup errors.
    """

    def __init__(self, message, line=None, offset=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if offset is not None:
            where.append(f"offset {offset}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.reason = message
        self.line = line
        self.offset = offset


@dataclass(frozen=True)
class Utterance:
    turn_index: int
    speaker: str
    code: str
    tokens: tuple
    mor_tags: Optional[tuple] = None
    text: str = field(default="", compare=False, repr=False)

    def lemmas(self) -> tuple:
        """Word identities: %mor lemmas where aligned, else surface forms."""
        if self.mor_tags is None:
            return self.tokens
        return tuple(lemma for _, lemma in self.mor_tags)


@dataclass(frozen=True)
class Transcript:
    session_id: str
    utterances: tuple

    @property
    def n_turns(self) -> int:
        return len(self.utterances)

    def by_speaker(self, speaker):
        return [u for u in self.utterances if u.speaker == speaker]


def content_class(pos: str) -> Optional[str]:
    """Map a %mor part-of-speech code to noun/adjective/verb, or None."""
    pos = pos.lower()
    if pos == "n:prop":
        return None
    if pos == "n" or pos.startswith("n:"):
        return "noun"
    if pos == "adj" or pos.startswith("adj:"):
        return "adjective"
    if pos in ("v", "part") or pos.startswith("v:"):
        return "verb"
    return None


# ---------------------------------------------------------------- main tier

def _check_balance(text):
    stack = []
    pairs = {"]": "[", ">": "<"}
    in_code = False
    for i, ch in enumerate(text):
        if ch == "[":
            if in_code:
                raise ChatParseError("nested '['", offset=i)
            in_code = True
            stack.append(("[", i))
        elif ch == "]":
            if not stack or stack[-1][0] != "[":
                raise ChatParseError("unbalanced ']'", offset=i)
            stack.pop()
            in_code = False
        elif in_code:
            continue
        elif ch == "<":
            stack.append(("<", i))
        elif ch == ">":
            if not stack or stack[-1][0] != pairs[ch]:
                raise ChatParseError("unbalanced '>'", offset=i)
            stack.pop()
    if stack:
        ch, i = stack[-1]
        raise ChatParseError(f"unclosed '{ch}'", offset=i)


def _scan(text):
    """Split a main-tier body into words, ``[...]`` codes and ``<...>`` groups."""
    root = []
    stack = [root]
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch == "[":
            j = text.index("]", i)
            stack[-1].append(("code", text[i + 1:j].strip()))
            i = j + 1
        elif ch == "<":
            group = []
            stack[-1].append(("group", group))
            stack.append(group)
            i += 1
        elif ch == ">":
            stack.pop()
            i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "[<>":
                j += 1
            word = text[i:j]
            depth = 0
            for k, c in enumerate(word):
                depth += (c == "(") - (c == ")")
                if depth < 0:
                    raise ChatParseError("unbalanced ')'", offset=i + k)
            if depth:
                raise ChatParseError("unclosed '('", offset=i + word.index("("))
            stack[-1].append(("word", word))
            i = j
    return root


def _apply_codes(items):
    out = []
    for kind, value in items:
        if kind == "code":
            if _RETRACE.match(value):
                if out:
                    out.pop()
            elif value.startswith(":") and not value.startswith("::") and out:
                out[-1] = ("words", value[1:].split())
            continue
        if kind == "group":
            out.append(("words", _flatten(_apply_codes(value))))
        else:
            out.append(("words", [value]))
    return out


def _flatten(items):
    words = []
    for _, ws in items:
        words.extend(ws)
    return words


def _clean_word(word):
    if not word or word.startswith("&") or _PAUSE.match(word) or _LINKER.match(word):
        return None
    word = word.split("@", 1)[0]
    word = "".join(c for c in word if c not in _MARKUP)
    word = word.strip(_EDGE_PUNCT).lower()
    if not any(c.isalnum() for c in word):
        return None
    if word in _UNINTELLIGIBLE or word.startswith("0"):
        return None
    return word


def normalize_tokens(text: str) -> list[str]:
    """Lower-cased word tokens of a main-tier body with CHAT markup removed.

    Retraced material is dropped so that only the final form of a
    repetition or revision survives.
    """
    blank = lambda m: " " * len(m.group())      # keeps offsets into ``text`` valid
    text = _LINKER_TOKEN.sub(blank, _BULLET.sub(blank, text))
    _check_balance(text)
    words = _flatten(_apply_codes(_scan(text)))
    return [w for w in (_clean_word(w) for w in words) if w]


# ---------------------------------------------------------------- %mor tier

def _mor_component(item):
    item = item.split("#")[-1]
    if "|" not in item:
        return None
    pos, rest = item.split("|", 1)
    if rest.startswith("+"):
        stems = [_mor_stem(p.split("|", 1)[1]) for p in rest[1:].split("+") if "|" in p]
        return pos, "+".join(stems)
    return pos, _mor_stem(rest)


def _mor_stem(rest):
    return re.split(r"[-&=]", rest, maxsplit=1)[0].lower()


def _parse_mor(body):
    entries = []
    for item in body.split():
        head = item.split("~")[0]
        if "$" in head:
            head = head.split("$")[-1]
        head = head.split("^")[0]
        comp = _mor_component(head)
        if comp is None:
            continue                      # terminators and other punctuation
        if comp[0] in ("cm", "bq", "eq", "beg", "end"):
            continue
        entries.append(comp)
    return entries


# ---------------------------------------------------------------- document

_LINE = re.compile(r"^([*%@])([^:\t]*):?\t?(.*)$")


def _logical_lines(text):
    out = []
    for n, raw in enumerate(text.splitlines(), 1):
        if raw.startswith("\t") and out:
            out[-1][1] += " " + raw.strip()
        elif raw.strip() == "":
            continue
        else:
            out.append([n, raw.rstrip()])
    return out


def _participants(body, line):
    table = {}
    for entry in body.split(","):
        parts = entry.split()
        if not parts:
            continue
        code = parts[0]
        role = parts[-1] if len(parts) > 1 else ""
        cls = _ROLE_CLASS.get(role.lower())
        if cls is None:
            cls = code if code in (PAR, INV) else OTHER
        table[code] = cls
    if not table:
        raise ChatParseError("empty @Participants header", line=line)
    return table


def parse_chat(text: str, session_id: str = "", require_participant: bool = True) -> Transcript:
    """Parse a CHAT document into a :class:`Transcript`."""
    text = text.lstrip("﻿")
    lines = _logical_lines(text)
    begin = next((n for n, ln in lines if ln.strip() == "@Begin"), None)
    if begin is None:
        raise ChatParseError("missing @Begin", line=1)
    end = next((n for n, ln in lines if ln.strip() == "@End"), None)
    if end is None:
        raise ChatParseError("missing @End", line=lines[-1][0])
    if end < begin:
        raise ChatParseError("@End precedes @Begin", line=end)

    speakers = None
    utts = []
    pending = None          # (line, speaker, code, text, mor)
    for n, ln in lines:
        if n <= begin:
            continue
        if n >= end:
            break
        m = _LINE.match(ln)
        if not m:
            raise ChatParseError(f"unrecognised line {ln[:30]!r}", line=n)
        kind, name, body = m.groups()
        if kind == "@":
            if name.strip() == "Participants":
                speakers = _participants(body, n)
            continue
        if kind == "*":
            if speakers is None:
                raise ChatParseError("main tier before @Participants", line=n)
            code = name.strip()
            if code not in speakers:
                raise ChatParseError(f"speaker {code!r} not declared in @Participants", line=n)
            if pending:
                utts.append(pending)
            try:
                tokens = normalize_tokens(body)
            except ChatParseError as e:
                raise ChatParseError(e.reason, line=n, offset=e.offset) from None
            pending = [n, speakers[code], code, body, tokens, None]
        else:
            if pending is None:
                raise ChatParseError(f"dependent tier %{name} with no preceding main tier", line=n)
            if name.strip() == "mor":
                pending[5] = _parse_mor(body)
    if pending:
        utts.append(pending)
    if not utts:
        raise ChatParseError("no utterances", line=begin)
    if require_participant and not any(u[1] == PAR for u in utts):
        raise ChatParseError("no PAR utterances", line=utts[0][0])

    out = []
    for k, (_, spk, code, body, tokens, mor) in enumerate(utts, 1):
        tags = tuple(mor) if mor is not None and len(mor) == len(tokens) else None
        out.append(Utterance(k, spk, code, tuple(tokens), tags, body))
    return Transcript(session_id, tuple(out))


def read_chat(path, session_id=None) -> Transcript:
    from pathlib import Path

    path = Path(path)
    return parse_chat(path.read_text(encoding="utf-8"), session_id or path.stem)


def interviewer_turn_count(t: Transcript) -> int:
    return sum(1 for u in t.utterances if u.speaker == INV)


def to_canonical(t: Transcript) -> str:
    """Deterministic CHAT rendering that :func:`parse_chat` reads back equal."""
    roles = {PAR: "Participant", INV: "Investigator"}
    codes = {}
    for u in t.utterances:
        codes.setdefault(u.code, roles.get(u.speaker, "Other"))
    lines = ["@Begin", "@Participants:\t" + ", ".join(f"{c} {r}" for c, r in codes.items())]
    for u in t.utterances:
        lines.append(f"*{u.code}:\t" + " ".join(u.tokens))
        if u.mor_tags is not None:
            lines.append("%mor:\t" + " ".join(f"{p}|{l}" for p, l in u.mor_tags))
    lines.append("@End")
    return "\n".join(lines) + "\n"
