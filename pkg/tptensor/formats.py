"""Line-oriented text formats.

TPT1 (dense tensor)::

    TPT1
    order <m>
    dim <n>
    entries
    <n^m decimal floats, one per line, i_m fastest>
    end

SYM2 (symmetric order-m dimension-2 family)::

    SYM2 m=<int> a=<decimal>

Lines starting with ``#`` are comments. Numbers are plain decimals; no
locale, no hex, no nan/inf.
"""
from __future__ import annotations

import re
from pathlib import Path
from typing import Sequence, Union

from tptensor.errors import FormatError, InputError, StructuralError
from tptensor.tensor_core import SymmetricFamily2, TransitionTensor, make_symmetric2

_DECIMAL = re.compile(r"^[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?$")
_INTEGER = re.compile(r"^\d+$")
_SYM2 = re.compile(r"^SYM2\s+m=(\S+)\s+a=(\S+)$")

Source = Union[TransitionTensor, SymmetricFamily2]


def parse_decimal(token: str, line: int | None = None) -> float:
    if not _DECIMAL.match(token):
        raise FormatError("expected a decimal number", token, line)
    return float(token)


def parse_int(token: str, line: int | None = None) -> int:
    if not _INTEGER.match(token):
        raise FormatError("expected a non-negative integer", token, line)
    return int(token)


def _content_lines(text: str) -> list[tuple[int, str]]:
    out = []
    for no, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if not s or s.startswith("#"):
            continue
        out.append((no, s))
    return out


def _keyword(lines: list[tuple[int, str]], pos: int, key: str) -> str:
    if pos >= len(lines):
        raise FormatError(f"unexpected end of input, expected '{key}'", "<eof>")
    no, s = lines[pos]
    parts = s.split()
    if parts[0] != key:
        raise FormatError(f"expected '{key}'", parts[0], no)
    if key == "entries":
        if len(parts) != 1:
            raise FormatError("'entries' takes no value", parts[1], no)
        return ""
    if len(parts) != 2:
        raise FormatError(f"'{key}' takes exactly one value", s, no)
    return parts[1]


def parse_tpt1(text: str) -> TransitionTensor:
    lines = _content_lines(text)
    if not lines or lines[0][1] != "TPT1":
        no, s = lines[0] if lines else (None, "<eof>")
        raise FormatError("expected header 'TPT1'", s, no)
    m = parse_int(_keyword(lines, 1, "order"), lines[1][0])
    n = parse_int(_keyword(lines, 2, "dim"), lines[2][0])
    _keyword(lines, 3, "entries")
    values: list[float] = []
    pos = 4
    while pos < len(lines) and lines[pos][1] != "end":
        no, s = lines[pos]
        values.append(parse_decimal(s, no))
        pos += 1
    if pos >= len(lines):
        raise FormatError("missing 'end'", "<eof>")
    if pos != len(lines) - 1:
        no, s = lines[pos + 1]
        raise FormatError("content after 'end'", s, no)
    if m < 3 or n < 2:
        raise FormatError("order must be >= 3 and dim >= 2", f"order {m} dim {n}", lines[1][0])
    if len(values) != n**m:
        raise StructuralError(f"order {m} dim {n} needs {n**m} entries, file has {len(values)}")
    return TransitionTensor.from_flat(m, n, values)


def format_tpt1(tensor: TransitionTensor, comment: str | None = None) -> str:
    out = ["TPT1"]
    if comment:
        out.extend(f"# {line}" for line in comment.splitlines())
    out.append(f"order {tensor.order}")
    out.append(f"dim {tensor.dim}")
    out.append("entries")
    # repr is the shortest string that round-trips the double exactly
    out.extend(repr(v) for v in tensor.flat())
    out.append("end")
    return "\n".join(out) + "\n"


def parse_sym2(text: str) -> SymmetricFamily2:
    lines = _content_lines(text)
    if len(lines) != 1:
        token = lines[1][1] if len(lines) > 1 else "<eof>"
        raise FormatError("expected a single 'SYM2 m=<int> a=<decimal>' line", token)
    no, s = lines[0]
    match = _SYM2.match(s)
    if not match:
        raise FormatError("expected 'SYM2 m=<int> a=<decimal>'", s, no)
    m = parse_int(match.group(1), no)
    a = parse_decimal(match.group(2), no)
    try:
        return make_symmetric2(m, a)
    except InputError as e:
        raise FormatError(str(e), s, no) from e


def format_sym2(family: SymmetricFamily2) -> str:
    return f"SYM2 m={family.order} a={family.a!r}\n"


def decode_text(raw: bytes) -> str:
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as e:
        line = raw.count(b"\n", 0, e.start) + 1
        bad = raw[e.start:e.end]
        raise FormatError(f"not valid UTF-8 at byte {e.start}", "0x" + bad.hex(), line) from e


def read_source(path: str | Path) -> Source:
    """Parse a TPT1 or SYM2 file; undecodable bytes are a FormatError."""
    return parse_source(decode_text(Path(path).read_bytes()))


def parse_source(text: str) -> Source:
    lines = _content_lines(text)
    if lines and lines[0][1].startswith("SYM2"):
        return parse_sym2(text)
    return parse_tpt1(text)


def format_trace(states: Sequence[int], seed: int, m: int, a: float) -> str:
    out = [f"# seed={seed} m={m} a={a!r}"]
    out.extend(str(s) for s in states)
    return "\n".join(out) + "\n"


def parse_trace(text: str) -> tuple[dict[str, str], list[int]]:
    header: dict[str, str] = {}
    states: list[int] = []
    for no, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if not s:
            continue
        if s.startswith("#"):
            for part in s[1:].split():
                key, _, value = part.partition("=")
                if value:
                    header[key] = value
            continue
        states.append(parse_int(s, no))
    return header, states
