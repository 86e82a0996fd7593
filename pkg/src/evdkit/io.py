"""Binary file formats.

``SYMF/1``: magic ``b"SYMF"``, u32 version (1), u64 n, then n*n little-endian
float64 values in column-major order.

``TRID/1``: magic ``b"TRID"``, u32 version (1), u64 n, n float64 diagonal
entries, n-1 float64 subdiagonal entries.
"""

from __future__ import annotations

import os
import struct

import numpy as np

from .matrix import SymmetricMatrix, TridiagonalMatrix

SYMF_MAGIC = b"SYMF"
TRID_MAGIC = b"TRID"
VERSION = 1
_HEADER = struct.Struct("<4sIQ")


class FormatError(IOError):
    """Raised for malformed or truncated matrix files."""


def _read_header(buf: bytes, magic: bytes, path) -> int:
    if len(buf) < _HEADER.size:
        raise FormatError(f"{path}: truncated header ({len(buf)} bytes)")
    got_magic, version, n = _HEADER.unpack_from(buf)
    if got_magic != magic:
        raise FormatError(f"{path}: bad magic {got_magic!r}, expected {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if n < 1:
        raise FormatError(f"{path}: invalid dimension n={n}")
    return n


def write_symf(path: str | os.PathLike, a: SymmetricMatrix) -> None:
    with open(path, "wb") as f:
        f.write(_HEADER.pack(SYMF_MAGIC, VERSION, a.n))
        f.write(a.flat().astype("<f8").tobytes())


def read_symf(path: str | os.PathLike) -> SymmetricMatrix:
    with open(path, "rb") as f:
        buf = f.read()
    n = _read_header(buf, SYMF_MAGIC, path)
    expected = _HEADER.size + 8 * n * n
    if len(buf) != expected:
        raise FormatError(f"{path}: expected {expected} bytes for n={n}, got {len(buf)}")
    vals = np.frombuffer(buf, dtype="<f8", offset=_HEADER.size).astype(np.float64)
    a = vals.reshape((n, n), order="F")
    if not np.all(np.isfinite(a)):
        raise FormatError(f"{path}: non-finite entries")
    if not np.array_equal(a, a.T):
        raise FormatError(f"{path}: matrix is not symmetric")
    return SymmetricMatrix(a)


def write_trid(path: str | os.PathLike, t: TridiagonalMatrix) -> None:
    with open(path, "wb") as f:
        f.write(_HEADER.pack(TRID_MAGIC, VERSION, t.n))
        f.write(t.d.astype("<f8").tobytes())
        f.write(t.e.astype("<f8").tobytes())


def read_trid(path: str | os.PathLike) -> TridiagonalMatrix:
    with open(path, "rb") as f:
        buf = f.read()
    n = _read_header(buf, TRID_MAGIC, path)
    expected = _HEADER.size + 8 * (2 * n - 1)
    if len(buf) != expected:
        raise FormatError(f"{path}: expected {expected} bytes for n={n}, got {len(buf)}")
    vals = np.frombuffer(buf, dtype="<f8", offset=_HEADER.size).astype(np.float64)
    return TridiagonalMatrix(vals[:n], vals[n:])
