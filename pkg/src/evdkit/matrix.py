"""Storage types shared by every stage of the eigensolver pipeline.

All dense matrices are FP64 and column-major (``order="F"``). The symmetric
input keeps both triangles; the band matrix uses LAPACK lower packing where
entry ``(i, j)`` with ``0 <= i - j <= b`` lives at ``bands[j, i - j]`` (flat
offset ``(i - j) + j * (b + 1)``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

EPS = np.finfo(np.float64).eps

DISTRIBUTIONS = ("uniform", "gaussian", "wilkinson")


def tol_orth(n: int) -> float:
    """Orthogonality tolerance ``100 * n * eps`` used for every accumulated Q."""
    return 100.0 * n * EPS


@dataclass
class SymmetricMatrix:
    """Dense symmetric ``n x n`` matrix, both triangles stored."""

    data: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.data, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"symmetric matrix must be square, got shape {a.shape}")
        if a.shape[0] < 1:
            raise ValueError("invalid dimension: n must be >= 1")
        self.data = np.asfortranarray(a)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    def flat(self) -> np.ndarray:
        """Column-major flat view, ``flat()[i + j*n] == data[i, j]``."""
        return self.data.ravel(order="F")

    def symmetrize(self) -> "SymmetricMatrix":
        """Copy the lower triangle onto the upper one (in place)."""
        a = self.data
        iu = np.triu_indices(self.n, 1)
        a[iu] = a.T[iu]
        return self

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def copy(self) -> "SymmetricMatrix":
        return SymmetricMatrix(self.data.copy(order="F"))


@dataclass
class BandMatrix:
    """Symmetric band matrix in lower packed storage, ``bands.shape == (n, b + 1)``."""

    bands: np.ndarray
    b: int

    def __post_init__(self):
        bands = np.ascontiguousarray(self.bands, dtype=np.float64)
        if bands.ndim == 1:
            bands = bands.reshape(-1, self.b + 1)
        n = bands.shape[0]
        if bands.shape[1] != self.b + 1:
            raise ValueError(f"band storage has {bands.shape[1]} rows, expected b+1={self.b + 1}")
        if self.b < 1 or (n > 1 and self.b >= n):
            raise ValueError(f"bandwidth must satisfy 1 <= b < n, got b={self.b}, n={n}")
        # entries hanging off the bottom of the matrix are forced to zero
        for r in range(1, self.b + 1):
            bands[max(n - r, 0):, r] = 0.0
        self.bands = bands

    @property
    def n(self) -> int:
        return self.bands.shape[0]

    def flat(self) -> np.ndarray:
        return self.bands.ravel()

    @classmethod
    def from_dense(cls, a, b: int) -> "BandMatrix":
        """Pack the lower band of ``a``; entries farther than ``b`` from the diagonal are dropped."""
        a = np.asarray(a, dtype=np.float64)
        n = a.shape[0]
        bands = np.zeros((n, b + 1))
        for r in range(min(b, n - 1) + 1):
            bands[: n - r, r] = np.diagonal(a, -r)
        return cls(bands, b)

    def to_dense(self) -> np.ndarray:
        n, b = self.n, self.b
        a = np.zeros((n, n), order="F")
        for r in range(min(b, n - 1) + 1):
            d = self.bands[: n - r, r]
            idx = np.arange(n - r)
            a[idx + r, idx] = d
            a[idx, idx + r] = d
        return a

    def norm(self) -> float:
        sq = np.sum(self.bands[:, 0] ** 2) + 2.0 * np.sum(self.bands[:, 1:] ** 2)
        return float(np.sqrt(sq))

    def copy(self) -> "BandMatrix":
        return BandMatrix(self.bands.copy(), self.b)


@dataclass
class TridiagonalMatrix:
    """Symmetric tridiagonal matrix: diagonal ``d`` (length n), subdiagonal ``e`` (length n-1)."""

    d: np.ndarray
    e: np.ndarray

    def __post_init__(self):
        self.d = np.array(self.d, dtype=np.float64).ravel()
        self.e = np.array(self.e, dtype=np.float64).ravel()
        if self.d.size < 1:
            raise ValueError("invalid dimension: n must be >= 1")
        if self.e.size != self.d.size - 1:
            raise ValueError(f"subdiagonal must have n-1={self.d.size - 1} entries, got {self.e.size}")

    @property
    def n(self) -> int:
        return self.d.size

    def to_dense(self) -> np.ndarray:
        a = np.diag(self.d)
        if self.n > 1:
            a += np.diag(self.e, -1) + np.diag(self.e, 1)
        return np.asfortranarray(a)

    def to_band(self) -> BandMatrix:
        bands = np.zeros((self.n, 2))
        bands[:, 0] = self.d
        bands[:-1, 1] = self.e
        return BandMatrix(bands, 1)

    @classmethod
    def from_band(cls, bm: BandMatrix) -> "TridiagonalMatrix":
        return cls(bm.bands[:, 0].copy(), bm.bands[:-1, 1].copy() if bm.n > 1 else [])

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.d**2) + 2.0 * np.sum(self.e**2)))


@dataclass
class OrthogonalAccumulator:
    """Explicit dense orthogonal factor ``Q`` with ``A = Q X Q^T``."""

    q: np.ndarray

    def __post_init__(self):
        self.q = np.asfortranarray(np.asarray(self.q, dtype=np.float64))

    @property
    def n(self) -> int:
        return self.q.shape[0]

    @classmethod
    def identity(cls, n: int) -> "OrthogonalAccumulator":
        return cls(np.eye(n, order="F"))

    def orthogonality_error(self) -> float:
        """``||Q^T Q - I||_F``."""
        return float(np.linalg.norm(self.q.T @ self.q - np.eye(self.n)))


def make_symmetric(n: int, seed: int = 0, dist: str = "uniform") -> SymmetricMatrix:
    """Deterministic random symmetric test matrix.

    Randomness comes from numpy's PCG64 generator seeded through
    ``SeedSequence(seed)``. The lower triangle is drawn column by column and
    mirrored, so the result is exactly symmetric. ``uniform`` draws from
    U(-1, 1), ``gaussian`` from N(0, 1). ``wilkinson`` is the Wilkinson W+
    matrix (diagonal ``|(n-1)/2 - i|``, unit off-diagonal) stored densely and
    ignores the seed.
    """
    if n < 1:
        raise ValueError(f"invalid dimension: n must be >= 1, got {n}")
    if dist not in DISTRIBUTIONS:
        raise ValueError(f"unknown distribution {dist!r}, expected one of {DISTRIBUTIONS}")
    if dist == "wilkinson":
        d = np.abs((n - 1) / 2.0 - np.arange(n))
        return SymmetricMatrix(TridiagonalMatrix(d, np.ones(n - 1)).to_dense())
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    m = n * (n + 1) // 2
    vals = rng.uniform(-1.0, 1.0, m) if dist == "uniform" else rng.standard_normal(m)
    a = np.zeros((n, n), order="F")
    # row-major upper indices, swapped, walk the lower triangle column by column
    cols, rows = np.triu_indices(n)
    a[rows, cols] = vals
    return SymmetricMatrix(a).symmetrize()


def make_band(n: int, b: int, seed: int = 0, dist: str = "gaussian") -> BandMatrix:
    """Random symmetric band matrix, drawn directly in packed form."""
    if n < 1:
        raise ValueError(f"invalid dimension: n must be >= 1, got {n}")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    shape = (n, b + 1)
    bands = rng.uniform(-1.0, 1.0, shape) if dist == "uniform" else rng.standard_normal(shape)
    return BandMatrix(bands, b)


def _dense(x) -> np.ndarray:
    if isinstance(x, SymmetricMatrix):
        return x.data
    if isinstance(x, (TridiagonalMatrix, BandMatrix)):
        return x.to_dense()
    return np.asarray(x, dtype=np.float64)


def similarity_residual(
    a: SymmetricMatrix,
    q: OrthogonalAccumulator,
    t: Union[TridiagonalMatrix, BandMatrix],
) -> float:
    """Relative residual ``||A - Q T Q^T||_F / ||A||_F`` by dense multiplication.

    Returns the absolute residual when ``A`` is the zero matrix.
    """
    ad, qd, td = _dense(a), _dense(q.q if isinstance(q, OrthogonalAccumulator) else q), _dense(t)
    if not (ad.shape == qd.shape == td.shape):
        raise ValueError(f"dimension mismatch: A {ad.shape}, Q {qd.shape}, T {td.shape}")
    r = np.linalg.norm(ad - qd @ td @ qd.T)
    na = np.linalg.norm(ad)
    return float(r / na) if na > 0 else float(r)


def trace(a) -> float:
    if isinstance(a, TridiagonalMatrix):
        return float(np.sum(a.d))
    if isinstance(a, BandMatrix):
        return float(np.sum(a.bands[:, 0]))
    return float(np.trace(_dense(a)))
