"""Binary field persistence.

Layout: a fixed 64-byte header (magic, version, dimension, lattice
shape, spacing, origin, value count), the node values as little-endian
float64 in row-major node order, then a JSON metadata block running to
the end of the file.  The metadata always carries the domain spec, which
is what allows the loader to rebuild the grid and re-derive the interior
mask; any numeric environment can read the payload with the header
alone.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile

import numpy as np

from .domain import domain_from_json
from .errors import FieldIOError, FormatError
from .field import Field
from .grid import Grid, build_grid

MAGIC = b"FGRD"
VERSION = 1
_HEADER = struct.Struct("<4sHHIIdddQ")   # 48 bytes used
HEADER_SIZE = 64


def _pack_header(grid: Grid) -> bytes:
    n0 = grid.shape[0]
    n1 = grid.shape[1] if grid.dim == 2 else 1
    o0 = float(grid.bbox_lo[0])
    o1 = float(grid.bbox_lo[1]) if grid.dim == 2 else 0.0
    raw = _HEADER.pack(MAGIC, VERSION, grid.dim, n0, n1, grid.h, o0, o1, grid.n_nodes)
    return raw + b"\x00" * (HEADER_SIZE - len(raw))


def save_field(path, field: Field, metadata: dict = None) -> None:
    """Write a field atomically (temp file + rename)."""
    grid = field.grid
    meta = dict(metadata or {})
    meta["domain"] = grid.spec.to_json()
    meta["h"] = grid.h
    payload = field.values.astype("<f8", copy=False).tobytes()
    blob = _pack_header(grid) + payload + json.dumps(meta, sort_keys=True).encode("utf-8")
    d = os.path.dirname(os.path.abspath(path)) or "."
    try:
        fd, tmp = tempfile.mkstemp(prefix=".field-", dir=d)
        with os.fdopen(fd, "wb") as fh:
            fh.write(blob)
        os.replace(tmp, path)
    except OSError as e:
        raise FieldIOError(f"cannot write field file {path}: {e}") from e


def load_field(path):
    """Read a field; returns (Field, metadata dict).

    Raises FormatError with the byte offset of the defect on truncated
    or corrupt files.
    """
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as e:
        raise FieldIOError(f"cannot read field file {path}: {e}") from e

    if len(blob) < HEADER_SIZE:
        raise FormatError(f"file shorter than the {HEADER_SIZE}-byte header", offset=len(blob))
    magic, version, dim, n0, n1, h, o0, o1, count = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}", offset=0)
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", offset=4)
    if dim not in (1, 2):
        raise FormatError(f"bad dimension {dim}", offset=6)
    expected = n0 * (n1 if dim == 2 else 1)
    if count != expected:
        raise FormatError(f"value count {count} != lattice size {expected}", offset=40)

    end_values = HEADER_SIZE + 8 * count
    if len(blob) < end_values:
        raise FormatError("truncated value payload", offset=len(blob))
    values = np.frombuffer(blob[HEADER_SIZE:end_values], dtype="<f8").astype(float)

    try:
        meta = json.loads(blob[end_values:].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise FormatError(f"bad metadata block: {e}", offset=end_values) from e
    if "domain" not in meta:
        raise FormatError("metadata lacks the domain spec", offset=end_values)

    spec = domain_from_json(meta["domain"])
    grid = build_grid(spec, h)
    if grid.shape[0] != n0 or (grid.dim == 2 and grid.shape[1] != n1) or grid.dim != dim:
        raise FormatError("header lattice does not match the rebuilt grid", offset=8)
    if not np.isclose(grid.bbox_lo[0], o0) or (dim == 2 and not np.isclose(grid.bbox_lo[1], o1)):
        raise FormatError("header origin does not match the rebuilt grid", offset=24)
    return Field(grid, values), meta
