"""File helpers shared by the serializers and the CLI."""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

from .errors import FormatError

FORMAT_VERSION = 1


def _line_of(text: str, pos: int) -> int:
    return text.count("\n", 0, pos) + 1


def iter_json_array(text: str):
    """Yield ``(line, element)`` for each element of a top-level JSON array.

    Elements are decoded one at a time so that errors can point at a line.
    """
    dec = json.JSONDecoder()
    ws = " \t\r\n"
    pos = 0
    n = len(text)
    while pos < n and text[pos] in ws:
        pos += 1
    if pos >= n or text[pos] != "[":
        raise FormatError("expected a JSON array", _line_of(text, pos))
    pos += 1
    expect_value = True
    first = True
    while True:
        while pos < n and text[pos] in ws:
            pos += 1
        if pos >= n:
            raise FormatError("unterminated JSON array", _line_of(text, pos))
        ch = text[pos]
        if ch == "]" and (first or not expect_value):
            pos += 1
            break
        if ch == "," and not expect_value:
            expect_value = True
            pos += 1
            continue
        if not expect_value:
            raise FormatError("expected ',' or ']'", _line_of(text, pos))
        try:
            value, end = dec.raw_decode(text, pos)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc.msg}", _line_of(text, exc.pos)) from None
        yield _line_of(text, pos), value
        pos = end
        expect_value = False
        first = False
    if text[pos:].strip():
        raise FormatError("trailing data after JSON array", _line_of(text, pos))


def atomic_write(path, data: str) -> None:
    """Write via a temp file in the same directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fmt(x: float) -> str:
    """Shortest round-trip decimal for a float."""
    return repr(float(x))
