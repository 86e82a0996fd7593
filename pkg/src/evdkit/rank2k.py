"""Symmetric rank-2k update ``C <- beta*C + alpha*(A B^T + B A^T)`` on the lower triangle.

``syr2k_naive`` is the triple-loop oracle. ``syr2k_recursive`` unrolls the
two-way split

    C11 = A1 B1^T + B1 A1^T      (syr2k)
    C21 = A2 B1^T + B2 A1^T      (gemm)
    C22 = A2 B2^T + B2 A2^T      (syr2k)

bottom-up: one batch of independent ``nb x nb`` diagonal blocks, then rounds of
off-diagonal GEMMs whose side doubles each round (nb, 2nb, 4nb, ...), each
round a batch of disjoint blocks.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numba
import numpy as np

from .flops import FlopCounter


@dataclass(frozen=True)
class GemmBatchDescriptor:
    """Geometry of one batch of block products ``C_blk += alpha * A_blk B_blk^T``.

    Offsets are flat column-major offsets into the parent arrays: ``A`` and
    ``B`` are ``n x k`` (the offset is the first row of the block), ``C`` is
    ``ldc x ldc`` (offset ``row + col * ldc``). ``extents`` holds the actual
    ``(rows, cols)`` of each block; only the last block of a round may be
    smaller than ``block_dims`` (it is clamped at the matrix edge). With
    ``lower`` set, only the lower triangle of each (square, on-diagonal) block
    is written.
    """

    block_dims: Tuple[int, int, int]
    base_offsets: Tuple[Tuple[int, int, int], ...]
    strides: Tuple[int, int, int]
    extents: Tuple[Tuple[int, int], ...]
    lower: bool = False

    def __len__(self) -> int:
        return len(self.base_offsets)

    def c_regions(self):
        """Yield ``(row0, col0, rows, cols)`` of each C block."""
        ldc = self.strides[2]
        for (_, _, oc), (rows, cols) in zip(self.base_offsets, self.extents):
            yield oc % ldc, oc // ldc, rows, cols


def syr2k_schedule(n: int, k: int, nb: int) -> List[GemmBatchDescriptor]:
    """Batches emitted by :func:`syr2k_recursive` for an ``n x k`` update."""
    if nb <= 0:
        raise ValueError(f"block size must be positive, got nb={nb}")
    strides = (n, n, n)
    diag_offsets, diag_ext = [], []
    for d in range(0, n, nb):
        s = min(nb, n - d)
        diag_offsets.append((d, d, d + d * n))
        diag_ext.append((s, s))
    batches = [
        GemmBatchDescriptor((nb, nb, k), tuple(diag_offsets), strides, tuple(diag_ext), lower=True)
    ]
    side = nb
    while side < n:
        offsets, ext = [], []
        # sibling groups [2q*side, (2q+1)*side) and [(2q+1)*side, (2q+2)*side)
        for col0 in range(0, n, 2 * side):
            row0 = col0 + side
            if row0 >= n:
                break
            offsets.append((row0, col0, row0 + col0 * n))
            ext.append((min(side, n - row0), side))
        batches.append(GemmBatchDescriptor((side, side, k), tuple(offsets), strides, tuple(ext)))
        side *= 2
    return batches


def _check_descriptor(desc: GemmBatchDescriptor, a: np.ndarray, b: np.ndarray, c: np.ndarray):
    for (oa, ob, oc), (rows, cols) in zip(desc.base_offsets, desc.extents):
        r0, c0 = oc % desc.strides[2], oc // desc.strides[2]
        if (
            min(oa, ob, oc, rows, cols) < 0
            or oa + rows > a.shape[0]
            or ob + cols > b.shape[0]
            or r0 + rows > c.shape[0]
            or c0 + cols > c.shape[1]
        ):
            raise IndexError(f"batch block out of range: offsets {(oa, ob, oc)}, extent {(rows, cols)}")


def gemm_batched(
    desc: GemmBatchDescriptor,
    a: np.ndarray,
    b: np.ndarray,
    c: np.ndarray,
    alpha: float = 1.0,
    workers: int = 1,
    counter: Optional[FlopCounter] = None,
) -> np.ndarray:
    """Accumulate every block product of one batch into ``c`` (in place).

    Blocks of a batch write disjoint C regions, so they may run concurrently;
    each block is one BLAS call, which keeps results independent of
    ``workers``.
    """
    _check_descriptor(desc, a, b, c)
    ldc = desc.strides[2]

    def run(i):
        oa, ob, oc = desc.base_offsets[i]
        rows, cols = desc.extents[i]
        r0, c0 = oc % ldc, oc // ldc
        prod = a[oa : oa + rows] @ b[ob : ob + cols].T
        if desc.lower:
            prod = np.tril(prod)
        c[r0 : r0 + rows, c0 : c0 + cols] += alpha * prod

    if workers > 1 and len(desc) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, range(len(desc))))
    else:
        for i in range(len(desc)):
            run(i)
    if counter is not None:
        kdim = a.shape[1]
        for rows, cols in desc.extents:
            counter.gemm(rows, cols, kdim, "syr2k")
    return c


def _check_shapes(a, b, c):
    if a.ndim != 2 or a.shape != b.shape:
        raise ValueError(f"shape mismatch: A {a.shape}, B {b.shape}")
    n = a.shape[0]
    if c.shape != (n, n):
        raise ValueError(f"shape mismatch: C {c.shape}, expected {(n, n)}")


@numba.njit(cache=True)
def _syr2k_loops(a, b, c, alpha, beta):
    n, k = a.shape
    for j in range(n):
        for i in range(j, n):
            s = 0.0
            for l in range(k):
                s += a[i, l] * b[j, l] + b[i, l] * a[j, l]
            c[i, j] = beta * c[i, j] + alpha * s


def syr2k_naive(a, b, c, alpha: float = 1.0, beta: float = 1.0) -> np.ndarray:
    """Triple-loop reference; updates the lower triangle of ``c`` in place."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    _check_shapes(a, b, c)
    _syr2k_loops(a, b, c, float(alpha), float(beta))
    return c


def syr2k_recursive(
    a,
    b,
    c: np.ndarray,
    alpha: float = 1.0,
    beta: float = 1.0,
    nb: int = 64,
    workers: Optional[int] = None,
    counter: Optional[FlopCounter] = None,
) -> np.ndarray:
    """Blocked rank-2k update on the lower triangle of ``c`` (in place).

    The products ``A B^T`` and ``B A^T`` are fused into one GEMM per block
    with inner dimension ``2k`` (``[A B] [B A]^T``). The strict upper
    triangle of ``c`` is never touched.
    """
    if nb <= 0:
        raise ValueError(f"block size must be positive, got nb={nb}")
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    _check_shapes(a, b, c)
    n, k = a.shape
    if n == 0:
        return c
    if workers is None:
        workers = os.cpu_count() or 1
    if beta != 1.0:
        il = np.tril_indices(n)
        c[il] *= beta
    if k == 0 or alpha == 0.0:
        return c
    ab = np.concatenate([a, b], axis=1)
    ba = np.concatenate([b, a], axis=1)
    for desc in syr2k_schedule(n, 2 * k, nb):
        gemm_batched(desc, ab, ba, c, alpha=alpha, workers=workers, counter=counter)
    return c
