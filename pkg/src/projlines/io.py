"""Plain-text line-set files.

::

    # projlines line set
    d: 3
    count: 7
    provenance: canonical_config(3)
    energy.riesz1: 48.121798974756
    vectors:
    5.7735026918962573e-01 5.7735026918962573e-01 5.7735026918962573e-01
    ...

Header lines are ``key: value``; ``#`` starts a comment.  Coordinates are
written with 17 significant digits, which round-trips every float64.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import LineSet

MAGIC = "# projlines line set"
UNIT_TOL = 1e-9


class LineSetFormatError(ValueError):
    def __init__(self, msg, lineno=None):
        super().__init__(f"line {lineno}: {msg}" if lineno is not None else msg)
        self.lineno = lineno


@dataclass
class LineSetFile:
    lines: LineSet
    provenance: str = ""
    energies: dict = field(default_factory=dict)

    @property
    def d(self) -> int:
        return self.lines.d

    @property
    def count(self) -> int:
        return len(self.lines)


def format_lineset(L: LineSet, provenance: str = "", energies: dict | None = None) -> str:
    out = [MAGIC, f"d: {L.d}", f"count: {len(L)}"]
    if provenance:
        out.append(f"provenance: {provenance}")
    for name, val in (energies or {}).items():
        out.append(f"energy.{name}: {val!r}")
    out.append("vectors:")
    out.extend(" ".join(f"{x:.16e}" for x in row) for row in L.vectors)
    return "\n".join(out) + "\n"


def save_lineset(L: LineSet, path, provenance: str = "", energies: dict | None = None) -> None:
    Path(path).write_text(format_lineset(L, provenance, energies))


def parse_lineset(text: str) -> LineSetFile:
    header = {}
    rows = []
    in_vectors = False
    first_row_lineno = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not in_vectors:
            if line == "vectors:":
                in_vectors = True
                continue
            key, sep, value = line.partition(":")
            if not sep:
                raise LineSetFormatError(f"expected 'key: value', got {line!r}", lineno)
            header[key.strip()] = (value.strip(), lineno)
            continue
        try:
            rows.append(([float(x) for x in line.split()], lineno))
        except ValueError:
            raise LineSetFormatError(f"non-numeric entry in {line!r}", lineno) from None
        first_row_lineno = first_row_lineno or lineno
    for key in ("d", "count"):
        if key not in header:
            raise LineSetFormatError(f"missing header field {key!r}")
    try:
        d = int(header["d"][0])
        count = int(header["count"][0])
    except ValueError as exc:
        raise LineSetFormatError(f"bad integer in header: {exc}") from None
    if not in_vectors:
        raise LineSetFormatError("missing 'vectors:' section")
    if len(rows) != count:
        raise LineSetFormatError(f"count says {count} vectors, found {len(rows)}")
    for idx, (row, lineno) in enumerate(rows):
        if len(row) != d:
            raise LineSetFormatError(f"row {idx} has {len(row)} entries, expected d={d}", lineno)
        norm = float(np.linalg.norm(row))
        if abs(norm - 1.0) > UNIT_TOL:
            raise LineSetFormatError(f"row {idx} is not a unit vector (norm {norm!r})", lineno)
    energies = {}
    for key, (value, lineno) in header.items():
        if key.startswith("energy."):
            try:
                energies[key[len("energy."):]] = float(value)
            except ValueError:
                raise LineSetFormatError(f"bad energy value {value!r}", lineno) from None
    vectors = np.array([row for row, _ in rows], dtype=float)
    try:
        L = LineSet(vectors, normalize=False)
    except ValueError as exc:
        raise LineSetFormatError(str(exc), first_row_lineno) from None
    return LineSetFile(L, header.get("provenance", ("", None))[0], energies)


def load_lineset_file(path) -> LineSetFile:
    return parse_lineset(Path(path).read_text())


def load_lineset(path) -> LineSet:
    return load_lineset_file(path).lines
