"""Text format for sampled maps.

A file starts with the header ``halfmap-v1 N m`` followed by ``N`` rows of
``m`` whitespace-separated decimal samples.  Blank lines and ``#`` comments
are ignored.
"""

from __future__ import annotations

from pathlib import Path
from typing import TextIO

import numpy as np

from .errors import InvalidInputError, ParseError
from .spectral import Field, PeriodicGrid

MAGIC = "halfmap-v1"


def write_map(path_or_stream: str | Path | TextIO, field: Field) -> None:
    vals = np.asarray(field.values)
    if not field.is_real:
        raise InvalidInputError("only real fields can be written")
    lines = [f"{MAGIC} {field.grid.n_points} {field.m}"]
    lines += [" ".join(repr(float(x)) for x in row) for row in vals.T]
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_stream, "write"):
        path_or_stream.write(text)  # type: ignore[union-attr]
    else:
        Path(path_or_stream).write_text(text)


def parse_map(text: str, source: str = "<string>") -> Field:
    rows: list[tuple[int, str]] = [
        (i + 1, ln.split("#", 1)[0].strip()) for i, ln in enumerate(text.splitlines())
    ]
    rows = [(i, ln) for i, ln in rows if ln]
    if not rows:
        raise ParseError("empty map file", source)
    line_no, header = rows[0]
    parts = header.split()
    if len(parts) != 3 or parts[0] != MAGIC:
        raise ParseError(f"expected header '{MAGIC} N m', got {header!r}", f"{source}:{line_no}")
    try:
        n, m = int(parts[1]), int(parts[2])
    except ValueError:
        raise ParseError(f"non-integer size in header {header!r}", f"{source}:{line_no}") from None
    if m < 1:
        raise ParseError("component count must be positive", f"{source}:{line_no}")
    try:
        grid = PeriodicGrid(n)
    except InvalidInputError as exc:
        raise ParseError(str(exc), f"{source}:{line_no}") from None
    body = rows[1:]
    if len(body) != n:
        raise ParseError(f"expected {n} sample rows, found {len(body)}", source)
    vals = np.empty((n, m))
    for k, (ln_no, ln) in enumerate(body):
        fields = ln.split()
        if len(fields) != m:
            raise ParseError(f"expected {m} samples, found {len(fields)}", f"{source}:{ln_no}")
        try:
            vals[k] = [float(x) for x in fields]
        except ValueError:
            raise ParseError(f"malformed number in {ln!r}", f"{source}:{ln_no}") from None
    if not np.all(np.isfinite(vals)):
        raise ParseError("samples must be finite", source)
    return Field(grid, vals.T)


def read_map(path: str | Path) -> Field:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read map file: {exc.strerror}", str(p)) from None
    return parse_map(text, str(p))
