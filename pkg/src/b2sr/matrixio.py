"""Matrix Market ingestion and JSON report output.

Only square coordinate files with pattern, real, or integer fields and
general or symmetric symmetry are accepted; anything else is rejected with
the offending line number where one exists.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import MatrixMarketError
from .formats import CsrMatrix

SCHEMA_VERSION = 1

_FIELDS = ("pattern", "real", "integer")
_SYMMETRIES = ("general", "symmetric")


@dataclass(frozen=True)
class IngestOptions:
    """Post-parse cleanup switches applied in a fixed order.

    Explicit zeros are dropped (or rejected) first, then symmetry expansion,
    then self-loop removal, then binarization.  ``symmetrize="union"`` adds
    the transpose of every entry; ``"none"`` keeps the file's orientation
    (a symmetric header still expands its implicit mirror entries).
    """

    binarize: bool = True
    symmetrize: str = "none"
    drop_self_loops: bool = False
    drop_explicit_zeros: bool = False

    def __post_init__(self):
        if self.symmetrize not in ("none", "union"):
            raise ValueError('symmetrize must be "none" or "union"')


@dataclass(frozen=True)
class MatrixMarketHeader:
    n: int
    declared_entries: int
    field: str
    symmetry: str


def _parse_header_line(line: str, path) -> tuple[str, str]:
    parts = line.strip().split()
    if len(parts) != 5 or parts[0] != "%%MatrixMarket":
        raise MatrixMarketError(f"{path}:1: malformed MatrixMarket banner")
    obj, fmt, field, sym = (p.lower() for p in parts[1:])
    if obj != "matrix":
        raise MatrixMarketError(f"{path}:1: unsupported object {obj!r}")
    if fmt != "coordinate":
        raise MatrixMarketError(f"{path}:1: only coordinate format is supported")
    if field not in _FIELDS:
        raise MatrixMarketError(f"{path}:1: unsupported field {field!r}")
    if sym not in _SYMMETRIES:
        raise MatrixMarketError(f"{path}:1: unsupported symmetry {sym!r}")
    return field, sym


def read_matrix_market_header(path) -> MatrixMarketHeader:
    """Parse just the banner and size line."""
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        first = fh.readline()
        if not first:
            raise MatrixMarketError(f"{path}:1: empty file")
        field, sym = _parse_header_line(first, path)
        lineno = 1
        for line in fh:
            lineno += 1
            stripped = line.strip()
            if not stripped or stripped.startswith("%"):
                continue
            parts = stripped.split()
            if len(parts) != 3:
                raise MatrixMarketError(f"{path}:{lineno}: size line needs rows cols entries")
            try:
                rows, cols, entries = (int(p) for p in parts)
            except ValueError:
                raise MatrixMarketError(f"{path}:{lineno}: size line needs integers") from None
            if rows != cols:
                raise MatrixMarketError(
                    f"{path}:{lineno}: matrix is {rows} x {cols}; only square matrices are supported"
                )
            if rows < 0 or entries < 0:
                raise MatrixMarketError(f"{path}:{lineno}: negative size")
            return MatrixMarketHeader(rows, entries, field, sym)
        raise MatrixMarketError(f"{path}: missing size line")


def read_matrix_market(path, options: IngestOptions | None = None) -> CsrMatrix:
    """Read a coordinate file into CSR, applying the ingest options."""
    opts = options or IngestOptions()
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        first = fh.readline()
        if not first:
            raise MatrixMarketError(f"{path}:1: empty file")
        field, sym = _parse_header_line(first, path)
        n = None
        declared = 0
        rows: list[int] = []
        cols: list[int] = []
        vals: list[float] = []
        want = 2 if field == "pattern" else 3
        lineno = 1
        for line in fh:
            lineno += 1
            stripped = line.strip()
            if not stripped or stripped.startswith("%"):
                continue
            parts = stripped.split()
            if n is None:
                if len(parts) != 3:
                    raise MatrixMarketError(f"{path}:{lineno}: size line needs rows cols entries")
                try:
                    r, c, declared = (int(p) for p in parts)
                except ValueError:
                    raise MatrixMarketError(f"{path}:{lineno}: size line needs integers") from None
                if r != c:
                    raise MatrixMarketError(
                        f"{path}:{lineno}: matrix is {r} x {c}; only square matrices are supported"
                    )
                if r < 0 or declared < 0:
                    raise MatrixMarketError(f"{path}:{lineno}: negative size")
                n = r
                continue
            if len(parts) != want:
                raise MatrixMarketError(
                    f"{path}:{lineno}: expected {want} tokens, got {len(parts)}"
                )
            try:
                i = int(parts[0])
                j = int(parts[1])
                v = float(parts[2]) if field != "pattern" else 1.0
            except ValueError:
                raise MatrixMarketError(f"{path}:{lineno}: malformed entry") from None
            if not (1 <= i <= n and 1 <= j <= n):
                raise MatrixMarketError(f"{path}:{lineno}: index ({i}, {j}) outside 1..{n}")
            rows.append(i - 1)
            cols.append(j - 1)
            vals.append(v)
            if len(rows) > declared:
                raise MatrixMarketError(f"{path}:{lineno}: more entries than declared ({declared})")
        if n is None:
            raise MatrixMarketError(f"{path}: missing size line")
        if len(rows) != declared:
            raise MatrixMarketError(
                f"{path}: declared {declared} entries but found {len(rows)}"
            )
    r = np.asarray(rows, dtype=np.int64)
    c = np.asarray(cols, dtype=np.int64)
    v = np.asarray(vals, dtype=np.float64)
    if field != "pattern" and np.any(v == 0.0):
        if opts.drop_explicit_zeros:
            keep = v != 0.0
            r, c, v = r[keep], c[keep], v[keep]
        elif not opts.binarize:
            at = int(np.flatnonzero(v == 0.0)[0])
            raise MatrixMarketError(
                f"{path}: explicit zero value at entry {at + 1} cannot be stored; "
                "enable drop_explicit_zeros or binarize"
            )
    if sym == "symmetric" or opts.symmetrize == "union":
        off = r != c
        r, c, v = (
            np.concatenate([r, c[off]]),
            np.concatenate([c, r[off]]),
            np.concatenate([v, v[off]]),
        )
    if opts.drop_self_loops:
        keep = r != c
        r, c, v = r[keep], c[keep], v[keep]
    if opts.binarize or field == "pattern":
        return CsrMatrix.from_coo(n, r, c)
    return CsrMatrix.from_coo(n, r, c, v)


def write_report(payload, path) -> None:
    """Serialise a report dict (or object with to_report) as stable JSON."""
    doc = payload.to_report() if hasattr(payload, "to_report") else dict(payload)
    doc = {"schemaVersion": SCHEMA_VERSION, **doc}
    text = json.dumps(doc, indent=2, allow_nan=False) + "\n"
    with open(path, "w", encoding="ascii") as fh:
        fh.write(text)


def schema_path() -> Path:
    """Filesystem path of the installed report schema."""
    return Path(resources.files("b2sr").joinpath("schemas/report.schema.json"))
