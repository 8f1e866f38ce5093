"""Binary raster formats and CSV export.

All three formats share a little-endian header: a 4-byte magic, a ``u16``
version (1) and ``u32`` dimensions, followed by a row-major payload.

========  ==========================  =====================================
magic     dimensions                  payload
========  ==========================  =====================================
``ORBL``  rows, cols, timesteps       ``u8`` label codes, time-major
``ORBO``  rows, cols                  ``u32`` ranks (bijection on 0..N-1)
``ORBE``  rows, cols                  ``f32`` finite elevations
========  ==========================  =====================================

Writers are atomic: data goes to a temporary file in the target directory
that is renamed into place only once complete.
"""

import csv
import dataclasses
import io
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from ._validation import UNKNOWN, check_elevation, check_ordering, check_stack
from .exceptions import FormatError

__all__ = [
    "VERSION",
    "encode_stack",
    "decode_stack",
    "encode_ordering",
    "decode_ordering",
    "encode_elevation",
    "decode_elevation",
    "read_stack",
    "write_stack",
    "read_ordering",
    "write_ordering",
    "read_elevation",
    "write_elevation",
    "atomic_write",
    "export_csv",
]

VERSION = 1
_STACK_HEADER = struct.Struct("<4sHIII")
_GRID_HEADER = struct.Struct("<4sHII")


def atomic_write(path, data, mode="wb"):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, **({} if "b" in mode else {"newline": "", "encoding": "utf-8"})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_header(data, magic, header):
    if len(data) < 4 or data[:4] != magic:
        raise FormatError("magic", f"expected {magic!r}, got {bytes(data[:4])!r}")
    if len(data) < header.size:
        raise FormatError("header", f"truncated: {len(data)} bytes, need {header.size}")
    fields = header.unpack_from(data)
    if fields[1] != VERSION:
        raise FormatError("version", f"unsupported version {fields[1]}")
    return fields[2:]


def _check_payload(data, offset, expected):
    got = len(data) - offset
    if got != expected:
        raise FormatError("payload length", f"expected {expected} bytes, got {got}")


def encode_stack(stack):
    stack = check_stack(stack, allow_unknown=True)
    T, rows, cols = stack.shape
    return _STACK_HEADER.pack(b"ORBL", VERSION, rows, cols, T) + stack.tobytes(order="C")


def decode_stack(data):
    rows, cols, T = _parse_header(data, b"ORBL", _STACK_HEADER)
    _check_payload(data, _STACK_HEADER.size, rows * cols * T)
    stack = np.frombuffer(data, dtype=np.uint8, offset=_STACK_HEADER.size)
    if stack.size and stack.max() > UNKNOWN:
        bad = int(np.flatnonzero(stack > UNKNOWN)[0])
        raise FormatError("label value", f"byte {stack[bad]} at payload offset {bad} exceeds 3")
    if rows == 0 or cols == 0 or T == 0:
        raise FormatError("header", "dimensions must be positive")
    return stack.reshape(T, rows, cols).copy()


def encode_ordering(ordering):
    ordering = check_ordering(ordering)
    rows, cols = ordering.shape
    return _GRID_HEADER.pack(b"ORBO", VERSION, rows, cols) + ordering.astype("<u4").tobytes()


def decode_ordering(data):
    rows, cols = _parse_header(data, b"ORBO", _GRID_HEADER)
    if rows == 0 or cols == 0:
        raise FormatError("header", "dimensions must be positive")
    _check_payload(data, _GRID_HEADER.size, 4 * rows * cols)
    ranks = np.frombuffer(data, dtype="<u4", offset=_GRID_HEADER.size).astype(np.int64)
    n = rows * cols
    if ranks.max() >= n or np.bincount(ranks, minlength=n).max() != 1:
        raise FormatError("rank bijection", f"ranks are not a permutation of 0..{n - 1}")
    return ranks.reshape(rows, cols)


def encode_elevation(elevation):
    elevation = check_elevation(elevation)
    as32 = elevation.astype("<f4")
    if not np.all(np.isfinite(as32)):
        raise FormatError("elevation finite", "values overflow float32")
    rows, cols = elevation.shape
    return _GRID_HEADER.pack(b"ORBE", VERSION, rows, cols) + as32.tobytes()


def decode_elevation(data):
    rows, cols = _parse_header(data, b"ORBE", _GRID_HEADER)
    if rows == 0 or cols == 0:
        raise FormatError("header", "dimensions must be positive")
    _check_payload(data, _GRID_HEADER.size, 4 * rows * cols)
    values = np.frombuffer(data, dtype="<f4", offset=_GRID_HEADER.size)
    if not np.all(np.isfinite(values)):
        raise FormatError("elevation finite", "payload contains NaN or infinity")
    return values.astype(np.float32).reshape(rows, cols)


def read_stack(path):
    return decode_stack(Path(path).read_bytes())


def write_stack(path, stack):
    atomic_write(path, encode_stack(stack))


def read_ordering(path):
    return decode_ordering(Path(path).read_bytes())


def write_ordering(path, ordering):
    atomic_write(path, encode_ordering(ordering))


def read_elevation(path):
    return decode_elevation(Path(path).read_bytes())


def write_elevation(path, elevation):
    atomic_write(path, encode_elevation(elevation))


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _table(table, columns):
    # late imports: formats sits below analysis/temporal in the dependency order
    from .analysis import AccuracyReport, MCTrial
    from .temporal import AlphaSweep

    if isinstance(table, AccuracyReport):
        header = ["n_unknown", "n_error", "n_total", "pct_unknown", "pct_error", "pct_total"]
        return header, [[getattr(table, h) for h in header]]
    if isinstance(table, AlphaSweep):
        return (["alpha", "mismatch_cost", "transition_cost", "total_cost"],
                [list(row) for row in table.rows()])
    if isinstance(table, np.ndarray):
        if table.ndim != 2 or table.shape[1] != 2:
            raise ValueError("area series must have shape (T, 2)")
        return (["timestep", "water_count", "water_plus_unknown_count"],
                [[t, int(a), int(b)] for t, (a, b) in enumerate(table)])
    rows = list(table)
    if not rows:
        header = columns or [f.name for f in dataclasses.fields(MCTrial)]
        return header, []
    first = rows[0]
    if dataclasses.is_dataclass(first):
        header = columns or [f.name for f in dataclasses.fields(first)]
        return header, [[getattr(r, h) for h in header] for r in rows]
    if isinstance(first, dict):
        header = columns or list(first)
        return header, [[r[h] for h in header] for r in rows]
    raise TypeError(f"cannot export {type(first).__name__} rows")


def export_csv(table, path, columns=None):
    """Write a report, sweep, area series or row table as CSV.

    Row order follows the input; floats use ``repr`` so the output does not
    depend on locale and re-exports are byte-identical.
    """
    header, rows = _table(table, columns)
    lines = [header] + [[_fmt(v) for v in row] for row in rows]

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(lines)
    if path in ("-", None):
        return buf.getvalue()
    atomic_write(path, buf.getvalue(), mode="w")
    return None
