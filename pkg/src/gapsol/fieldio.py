"""Binary on-disk format for fields.

Layout, all little-endian:

    bytes 0..7    magic b"NLSFIELD"
    bytes 8..11   u32 format version, currently 1
    bytes 12..15  u32 reserved, zero
    u64           dim
    dim * u64     points per axis
    dim * f64     box length per axis
    dim-fold f64  values, row-major, n^dim of them

The writer emits exactly this; the reader validates magic, version, sizes,
and finiteness, and reconstructs the grid.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import FieldFormatError
from .grid import Field, GridSpec

MAGIC = b"NLSFIELD"
VERSION = 1
_HEADER = struct.Struct("<8sII")


def write_field(path, u: Field) -> None:
    g = u.grid
    parts = [
        _HEADER.pack(MAGIC, VERSION, 0),
        np.asarray([g.dim], dtype="<u8").tobytes(),
        np.asarray([g.points_per_axis] * g.dim, dtype="<u8").tobytes(),
        np.asarray(g.box_lengths, dtype="<f8").tobytes(),
        np.ascontiguousarray(u.values, dtype="<f8").tobytes(),
    ]
    Path(path).write_bytes(b"".join(parts))


def read_field(path) -> Field:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FieldFormatError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, version, reserved = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise FieldFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FieldFormatError(f"{path}: unsupported version {version}")
    if reserved != 0:
        raise FieldFormatError(f"{path}: nonzero reserved word {reserved}")
    off = _HEADER.size
    try:
        dim = int(np.frombuffer(raw, dtype="<u8", count=1, offset=off)[0])
        off += 8
        if dim not in (1, 2):
            raise FieldFormatError(f"{path}: dim must be 1 or 2, got {dim}")
        ns = np.frombuffer(raw, dtype="<u8", count=dim, offset=off)
        off += 8 * dim
        lengths = np.frombuffer(raw, dtype="<f8", count=dim, offset=off)
        off += 8 * dim
    except ValueError as exc:
        raise FieldFormatError(f"{path}: truncated grid header") from exc
    if len(set(int(n) for n in ns)) != 1:
        raise FieldFormatError(f"{path}: anisotropic point counts {ns.tolist()}")
    try:
        spec = GridSpec(dim, tuple(float(L) for L in lengths), int(ns[0]))
    except ValueError as exc:
        raise FieldFormatError(f"{path}: invalid grid: {exc}") from exc
    expected = off + 8 * spec.npoints
    if len(raw) != expected:
        raise FieldFormatError(
            f"{path}: expected {expected} bytes, found {len(raw)}"
        )
    values = np.frombuffer(raw, dtype="<f8", count=spec.npoints, offset=off)
    if not np.all(np.isfinite(values)):
        raise FieldFormatError(f"{path}: non-finite values")
    return Field(values, spec)
