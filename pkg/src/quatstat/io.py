"""File formats: QMAT v1 quaternion matrices and headered sample CSVs.

QMAT v1::

    QMAT <rows> <cols>
    a b c d        # rows*cols lines, row-major

CSV layouts for an L-channel sample set (one row per sample):

* ``per-channel-quads``: ``x0_a, x0_b, x0_c, x0_d, x1_a, ...``
* ``component-columns``: ``x0_a, x1_a, ..., x0_b, x1_b, ...``
"""
from __future__ import annotations

import csv
import math
import os

import numpy as np

from .errors import DimensionError, IOFailure, ParseError
from .qmatrix import QuatMatrix
from .stats import SampleSet

LAYOUTS = ("per-channel-quads", "component-columns")
COMPONENTS = "abcd"


def fmt_float(x: float) -> str:
    """Round-trip decimal with 17 significant digits."""
    return format(float(x), ".17g")


# --- QMAT ------------------------------------------------------------------------

def format_qmat(M: QuatMatrix) -> str:
    lines = [f"QMAT {M.rows} {M.cols}"]
    for q in M.data.reshape(-1, 4):
        lines.append(" ".join(fmt_float(v) for v in q))
    return "\n".join(lines) + "\n"


def parse_qmat(text: str) -> QuatMatrix:
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty QMAT input", 1)
    head = lines[0].split()
    if len(head) != 3 or head[0] != "QMAT":
        raise ParseError("expected header 'QMAT <rows> <cols>'", 1)
    try:
        rows, cols = int(head[1]), int(head[2])
    except ValueError:
        raise ParseError("matrix dimensions must be integers", 1) from None
    if rows < 1 or cols < 1:
        raise ParseError(f"matrix dimensions must be positive, got {rows}x{cols}", 1)
    body = lines[1:]
    # tolerate trailing blank lines only
    while body and not body[-1].strip():
        body.pop()
    if len(body) != rows * cols:
        raise ParseError(f"expected {rows * cols} entry lines, found {len(body)}", len(lines))
    data = np.empty((rows * cols, 4))
    for n, line in enumerate(body):
        lineno = n + 2
        parts = line.split()
        if len(parts) != 4:
            raise ParseError(f"expected 4 components, found {len(parts)}", lineno)
        try:
            vals = [float(p) for p in parts]
        except ValueError:
            raise ParseError(f"non-numeric component in {line.strip()!r}", lineno) from None
        if not all(math.isfinite(v) for v in vals):
            raise ParseError("non-finite component", lineno)
        data[n] = vals
    return QuatMatrix(data.reshape(rows, cols, 4))


def _read_text(path) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise IOFailure(f"cannot read {path}: {exc.strerror or exc}") from exc


def _write_text(path, text):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc.strerror or exc}") from exc


def read_qmat(path) -> QuatMatrix:
    return parse_qmat(_read_text(path))


def write_qmat(path, M: QuatMatrix):
    _write_text(path, format_qmat(M))


# --- CSV -------------------------------------------------------------------------

def csv_header(L: int, layout: str) -> list:
    _check_layout(layout)
    if layout == "per-channel-quads":
        return [f"x{l}_{c}" for l in range(L) for c in COMPONENTS]
    return [f"x{l}_{c}" for c in COMPONENTS for l in range(L)]


def _check_layout(layout):
    if layout not in LAYOUTS:
        raise DimensionError(f"unknown CSV layout {layout!r}; expected one of {', '.join(LAYOUTS)}")


def _rows_to_array(table: np.ndarray, layout: str) -> np.ndarray:
    N, width = table.shape
    L = width // 4
    if layout == "per-channel-quads":
        return table.reshape(N, L, 4).transpose(1, 0, 2)
    return table.reshape(N, 4, L).transpose(2, 0, 1)


def _array_to_rows(arr: np.ndarray, layout: str) -> np.ndarray:
    L, N, _ = arr.shape
    if layout == "per-channel-quads":
        return arr.transpose(1, 0, 2).reshape(N, 4 * L)
    return arr.transpose(1, 2, 0).reshape(N, 4 * L)


def write_csv(path, s: SampleSet, layout: str = "per-channel-quads"):
    header = csv_header(s.L, layout)
    rows = _array_to_rows(s.data.data, layout)
    out = [",".join(header)]
    out.extend(",".join(fmt_float(v) for v in row) for row in rows)
    _write_text(path, "\n".join(out) + "\n")


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def parse_csv(text: str, layout: str = "per-channel-quads", mean_removed=False) -> SampleSet:
    _check_layout(layout)
    reader = csv.reader(text.splitlines())
    values = []
    width = None
    for lineno, row in enumerate(reader, start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if width is None and lineno == 1 and not all(_is_number(c) for c in row):
            width = len(row)  # header
            if width % 4:
                raise ParseError(f"{width} columns is not a multiple of 4", lineno)
            continue
        if width is None:
            width = len(row)
            if width % 4:
                raise ParseError(f"{width} columns is not a multiple of 4", lineno)
        if len(row) != width:
            raise ParseError(f"expected {width} columns, found {len(row)}", lineno)
        try:
            vals = [float(c) for c in row]
        except ValueError:
            bad = next(c for c in row if not _is_number(c))
            raise ParseError(f"non-numeric value {bad.strip()!r}", lineno) from None
        if not all(math.isfinite(v) for v in vals):
            raise ParseError("non-finite value", lineno)
        values.append(vals)
    if not values:
        raise ParseError("no data rows", None)
    table = np.asarray(values, dtype=np.float64)
    return SampleSet(QuatMatrix(_rows_to_array(table, layout)), mean_removed)


def ingest_csv(path, layout: str = "per-channel-quads", mean_removed=False) -> SampleSet:
    if not os.path.exists(path):
        raise IOFailure(f"no such file: {path}")
    return parse_csv(_read_text(path), layout, mean_removed)
