"""Field and coefficient files.

Both formats start with one JSON header line.

Field file::

    {"format_version": 1, "kind": "field", "dim": 1, "box_exponent": 4,
     "resolution_exponent": 8, "dtype": "real64", "byte_order": "little",
     "encoding": "binary"}
    <raw little-endian samples, row-major>

With ``"encoding": "text"`` the samples follow as one value per line
(``re im`` for complex data).  Coefficient file::

    {"format_version": 1, "kind": "coefficients", "V": 6, "grid": {...}, "bank": {...}}
    v m_1 [m_2] re im
    ...

with zero entries elided.  Floats are written with ``repr`` so text files
round-trip bit-exactly.
"""

from __future__ import annotations

import json

import numpy as np

from .grid import Grid, SampledField
from .sequences import CoefficientSequence

__all__ = [
    "FileFormatError",
    "FORMAT_VERSION",
    "write_field",
    "read_field",
    "write_coefficients",
    "read_coefficients",
]

FORMAT_VERSION = 1


class FileFormatError(ValueError):
    """Malformed or inconsistent data file (CLI exit code 3)."""


def _grid_header(grid: Grid) -> dict:
    return {"dim": grid.dim, "box_exponent": grid.box_exponent, "resolution_exponent": grid.resolution_exponent}


def _grid_from(h: dict) -> Grid:
    try:
        return Grid(int(h["dim"]), int(h["box_exponent"]), int(h["resolution_exponent"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"bad grid in header: {exc}") from exc


def _split_header(raw: bytes):
    end = raw.find(b"\n")
    if end < 0:
        raise FileFormatError("missing header line")
    try:
        header = json.loads(raw[:end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FileFormatError(f"header is not JSON: {exc}") from exc
    if not isinstance(header, dict):
        raise FileFormatError("header must be a JSON object")
    if header.get("format_version") != FORMAT_VERSION:
        raise FileFormatError(f"unsupported format_version {header.get('format_version')!r}")
    return header, raw[end + 1:]


def write_field(path, f: SampledField, encoding: str = "binary") -> None:
    """Write ``f``; ``encoding`` is ``"binary"`` or ``"text"``."""
    cplx = np.iscomplexobj(f.data)
    header = {
        "format_version": FORMAT_VERSION,
        "kind": "field",
        **_grid_header(f.grid),
        "dtype": "complex128" if cplx else "real64",
        "byte_order": "little",
        "encoding": encoding,
    }
    head = (json.dumps(header, sort_keys=True) + "\n").encode("utf-8")
    flat = f.data.ravel(order="C")
    if encoding == "binary":
        body = flat.astype("<c16" if cplx else "<f8").tobytes()
    elif encoding == "text":
        if cplx:
            lines = [f"{float(z.real)!r} {float(z.imag)!r}" for z in flat]
        else:
            lines = [repr(float(x)) for x in flat]
        body = ("\n".join(lines) + "\n").encode("utf-8")
    else:
        raise ValueError(f"unknown encoding {encoding!r}")
    with open(path, "wb") as fh:
        fh.write(head + body)


def read_field(path) -> SampledField:
    with open(path, "rb") as fh:
        raw = fh.read()
    header, body = _split_header(raw)
    if header.get("kind", "field") != "field":
        raise FileFormatError("not a field file")
    grid = _grid_from(header)
    dtype = header.get("dtype")
    if dtype not in ("real64", "complex128"):
        raise FileFormatError(f"unknown dtype {dtype!r}")
    if header.get("byte_order", "little") != "little":
        raise FileFormatError("only little-endian data is supported")
    cplx = dtype == "complex128"
    encoding = header.get("encoding", "binary")
    if encoding == "binary":
        width = 16 if cplx else 8
        if len(body) != grid.size * width:
            raise FileFormatError(f"expected {grid.size * width} data bytes, found {len(body)}")
        data = np.frombuffer(body, dtype="<c16" if cplx else "<f8").astype(complex if cplx else float)
    elif encoding == "text":
        try:
            rows = [line.split() for line in body.decode("utf-8").splitlines() if line.strip()]
            if cplx:
                data = np.array([complex(float(r[0]), float(r[1])) for r in rows])
            else:
                data = np.array([float(r[0]) for r in rows])
        except (ValueError, IndexError, UnicodeDecodeError) as exc:
            raise FileFormatError(f"bad text sample: {exc}") from exc
        if data.size != grid.size:
            raise FileFormatError(f"expected {grid.size} samples, found {data.size}")
    else:
        raise FileFormatError(f"unknown encoding {encoding!r}")
    if not np.all(np.isfinite(data)):
        raise FileFormatError("field contains non-finite samples")
    return grid.field(data.reshape(grid.shape))


def write_coefficients(path, lam: CoefficientSequence, bank_profile: dict | None = None) -> None:
    header = {
        "format_version": FORMAT_VERSION,
        "kind": "coefficients",
        "V": lam.V,
        "grid": _grid_header(lam.grid),
        "bank": bank_profile or {},
    }
    lines = [json.dumps(header, sort_keys=True)]
    for v, m, value in lam.entries():
        lines.append(" ".join([str(v), *map(str, m), repr(float(value.real)), repr(float(value.imag))]))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_coefficients(path):
    """Return ``(sequence, header)``."""
    with open(path, "rb") as fh:
        raw = fh.read()
    header, body = _split_header(raw)
    if header.get("kind") != "coefficients":
        raise FileFormatError("not a coefficient file")
    grid = _grid_from(header.get("grid", {}))
    V = header.get("V")
    if not isinstance(V, int) or V < 0:
        raise FileFormatError("header needs a non-negative integer V")
    entries = []
    n = grid.dim
    try:
        for line in body.decode("utf-8").splitlines():
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 3 + n:
                raise FileFormatError(f"expected {3 + n} fields per line, got {len(parts)}")
            v = int(parts[0])
            m = tuple(int(x) for x in parts[1:1 + n])
            value = complex(float(parts[1 + n]), float(parts[2 + n]))
            entries.append((v, m, value))
    except (ValueError, UnicodeDecodeError) as exc:
        if isinstance(exc, FileFormatError):
            raise
        raise FileFormatError(f"bad coefficient line: {exc}") from exc
    try:
        lam = CoefficientSequence.from_entries(grid, V, entries)
    except (ValueError, IndexError) as exc:
        raise FileFormatError(f"coefficient out of range: {exc}") from exc
    return lam, header
