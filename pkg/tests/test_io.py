import struct

import numpy as np
import pytest

from evdkit.io import FormatError, read_symf, read_trid, write_symf, write_trid
from evdkit.matrix import TridiagonalMatrix, make_symmetric


def test_symf_roundtrip_is_bitwise(tmp_path):
    a = make_symmetric(17, 3, "gaussian")
    p = tmp_path / "a.symf"
    write_symf(p, a)
    assert p.stat().st_size == 16 + 8 * 17 * 17
    assert np.array_equal(read_symf(p).data, a.data)


def test_symf_header_layout(tmp_path):
    p = tmp_path / "a.symf"
    write_symf(p, make_symmetric(3, 0))
    raw = p.read_bytes()
    assert raw[:4] == b"SYMF"
    assert struct.unpack("<IQ", raw[4:16]) == (1, 3)
    # first value is A[0, 0], second A[1, 0] (column-major)
    a = make_symmetric(3, 0).data
    assert struct.unpack("<dd", raw[16:32]) == (a[0, 0], a[1, 0])


def test_trid_roundtrip(tmp_path):
    t = TridiagonalMatrix([1.0, -2.0, 3.5], [0.25, 7.0])
    p = tmp_path / "t.trid"
    write_trid(p, t)
    t2 = read_trid(p)
    assert np.array_equal(t2.d, t.d) and np.array_equal(t2.e, t.e)
    assert p.read_bytes()[:4] == b"TRID"


@pytest.mark.parametrize(
    "mutate",
    [
        lambda raw: raw[:10],  # truncated header
        lambda raw: b"XXXX" + raw[4:],  # magic
        lambda raw: raw[:4] + struct.pack("<I", 2) + raw[8:],  # version
        lambda raw: raw[:-8],  # truncated payload
        lambda raw: raw + b"\0" * 8,  # trailing bytes
        lambda raw: raw[:16] + struct.pack("<d", float("nan")) + raw[24:],  # non-finite
        lambda raw: raw[:24] + struct.pack("<d", 123.0) + raw[32:],  # breaks symmetry
    ],
)
def test_symf_corruption_detected(tmp_path, mutate):
    p = tmp_path / "a.symf"
    write_symf(p, make_symmetric(4, 1))
    p.write_bytes(mutate(p.read_bytes()))
    with pytest.raises(FormatError):
        read_symf(p)


def test_format_error_is_io_error():
    assert issubclass(FormatError, OSError)


def test_trid_rejects_symf(tmp_path):
    p = tmp_path / "a.symf"
    write_symf(p, make_symmetric(4, 1))
    with pytest.raises(FormatError, match="magic"):
        read_trid(p)
