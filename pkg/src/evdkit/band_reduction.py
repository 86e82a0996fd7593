"""Dense symmetric -> band reduction with bandwidth decoupled from block size.

Within each block of ``nb`` columns the panels of width ``b`` are factored
one after another. Each panel only sees the transforms of earlier panels in
its block through narrow panel-scope updates; the rest of the trailing matrix
is left untouched until the whole block is done, at which point a single
rank-2k update with inner dimension ``nb`` brings it up to date.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .flops import FlopCounter
from .householder import house, panel_qr
from .matrix import BandMatrix, OrthogonalAccumulator, SymmetricMatrix, TridiagonalMatrix
from .rank2k import syr2k_recursive

SYR2K_BLOCK = 64


@dataclass(frozen=True)
class DbrConfig:
    b: int
    nb: int
    accumulate_q: bool = False
    recursive_panels: bool = True

    def validate(self, n: int) -> None:
        if not (1 <= self.b <= self.nb < n):
            raise ValueError(
                f"invalid configuration: need 1 <= b <= nb < n, got b={self.b}, nb={self.nb}, n={n}"
            )


@dataclass(frozen=True)
class UpdateTask:
    """Apply the accumulated factors of source panels ``[s0, s1)`` to target panels ``[t0, t1)``."""

    target: Tuple[int, int]
    source: Tuple[int, int]
    k: int


@dataclass(frozen=True)
class PanelUpdateSchedule:
    b: int
    nb: int
    tasks: Tuple[UpdateTask, ...]

    @property
    def panels(self) -> int:
        return -(-self.nb // self.b)

    def k_histogram(self) -> dict:
        hist: dict = {}
        for t in self.tasks:
            hist[t.k] = hist.get(t.k, 0) + 1
        return dict(sorted(hist.items()))

    def events(self):
        """Interleave ``("factor", t)`` and ``("update", task)`` in execution order.

        A panel is factored right before the first task that reads it, so it
        has received every update aimed at it by then.
        """
        done = 0
        for task in self.tasks:
            while done < task.source[1]:
                yield ("factor", done)
                done += 1
            yield ("update", task)
        while done < self.panels:
            yield ("factor", done)
            done += 1


def recursive_panel_schedule(b: int, nb: int, recursive: bool = True) -> PanelUpdateSchedule:
    """Order of intra-block panel updates.

    The recursive schedule halves the panel range, finishes the left half,
    updates the whole right half with the left half's factors in one wide
    GEMM, then recurses into the right half. The flat schedule updates all
    later panels after every single panel.
    """
    if b < 1 or nb < b:
        raise ValueError(f"need 1 <= b <= nb, got b={b}, nb={nb}")
    p = -(-nb // b)
    tasks: List[UpdateTask] = []
    if recursive:

        def split(lo, hi):
            if hi - lo <= 1:
                return
            mid = lo + (hi - lo + 1) // 2
            split(lo, mid)
            tasks.append(UpdateTask((mid, hi), (lo, mid), (mid - lo) * b))
            split(mid, hi)

        split(0, p)
    else:
        tasks = [UpdateTask((t + 1, p), (t, t + 1), b) for t in range(p - 1)]
    return PanelUpdateSchedule(b, nb, tuple(tasks))


def _passthrough(a: SymmetricMatrix, b: int, accumulate_q: bool):
    n = a.n
    bm = BandMatrix.from_dense(a.data, max(1, min(b, n - 1)))
    return bm, (OrthogonalAccumulator.identity(n) if accumulate_q else None)


def dbr(
    a: SymmetricMatrix,
    cfg: DbrConfig,
    counter: Optional[FlopCounter] = None,
    workers: Optional[int] = None,
) -> Tuple[BandMatrix, Optional[OrthogonalAccumulator]]:
    """Reduce ``a`` to a band matrix ``B`` of bandwidth ``cfg.b`` with ``A = Q B Q^T``."""
    n = a.n
    if n < 3:
        return _passthrough(a, cfg.b, cfg.accumulate_q)
    cfg.validate(n)
    b, nb = cfg.b, cfg.nb
    A = a.data.copy(order="F")
    Q = np.eye(n, order="F") if cfg.accumulate_q else None
    cnt = counter if counter is not None else FlopCounter()

    for i in range(0, n, nb):
        if i + b >= n - 1:
            break
        nbk = min(nb, n - i)
        # Z rows are needed from the column after each panel on, so the local
        # row origin is the end of the first panel
        r0 = i + min(b, nbk)
        M = n - r0
        # the trailing block is read through both triangles by A @ W below
        _symmetrize_lower(A, r0)
        Y = np.zeros((M, nbk), order="F")
        W = np.zeros((M, nbk), order="F")
        Z = np.zeros((M, nbk), order="F")
        # block columns, updated and factored off to the side so A keeps its
        # block-start values for the A @ W products
        P = A[i:, i : i + nbk].copy(order="F")
        sched = recursive_panel_schedule(b, nbk, cfg.recursive_panels)
        widths = [min(b, nbk - t * b) for t in range(sched.panels)]

        for kind, item in sched.events():
            if kind == "update":
                _panel_scope_update(P, Y, Z, item, widths, i, r0, b, cnt)
                continue
            t = item
            j = i + t * b
            m = n - j - b
            p = min(widths[t], m)
            if p <= 0:
                continue
            lc = j - i  # local column of the panel in P, Y, W, Z
            lr = j + b - r0  # local row of the reflectors in Y, W, Z
            pf = panel_qr(P[j + b - i :, lc : lc + p], skip_reduced=True)
            P[j + b - i :, lc : lc + p] = 0.0
            P[j + b - i : j + b - i + p, lc : lc + p] = pf.r
            cnt.add("panel_qr", 4.0 * m * p * p)
            if p < widths[t]:
                # short panel near the end: its remaining columns still see H^T from the left
                rest = P[j + b - i :, lc + p : lc + widths[t]]
                rest -= pf.y @ (pf.w.T @ rest)
            Y[lr:, lc : lc + p] = pf.y
            W[lr:, lc : lc + p] = pf.w
            zr = j + widths[t] - r0
            Z[zr:, lc : lc + p] = _panel_z(A, Y, W, Z, j + widths[t], j + b, r0, lc, p, cnt)
            if Q is not None:
                qw = Q[:, j + b :] @ pf.w
                Q[:, j + b :] -= qw @ pf.y.T
                cnt.gemm(n, p, m, "q")
                cnt.gemm(n, m, p, "q")

        A[i:, i : i + nbk] = P
        t0 = i + nbk
        if t0 < n:
            syr2k_recursive(
                Z[t0 - r0 :], Y[t0 - r0 :], A[t0:, t0:], alpha=-1.0, beta=1.0,
                nb=SYR2K_BLOCK, workers=workers, counter=cnt,
            )

    bm = BandMatrix.from_dense(A, b)
    return bm, (OrthogonalAccumulator(Q) if Q is not None else None)


def _symmetrize_lower(A: np.ndarray, start: int, blk: int = 256) -> None:
    """Copy the lower triangle of ``A[start:, start:]`` onto the upper one."""
    s = A[start:, start:]
    m = s.shape[0]
    for j0 in range(0, m, blk):
        j1 = min(j0 + blk, m)
        d = s[j0:j1, j0:j1]
        iu = np.triu_indices(j1 - j0, 1)
        d[iu] = d.T[iu]
        s[j0:j1, j1:] = s[j1:, j0:j1].T


def _panel_z(A, Y, W, Z, zrow, wrow, r0, lc, p, cnt):
    """Z of one panel, rows ``zrow:``, against the block-start matrix minus earlier panels.

    ``W`` is nonzero from row ``wrow`` on; rows ``zrow <= r < wrow`` are only
    present when the panel is narrower than the bandwidth.
    """
    w = W[wrow - r0 :, lc : lc + p]
    aw = A[zrow:, wrow:] @ w
    m = aw.shape[0]
    cnt.gemm(m, p, w.shape[0], "aw")
    if lc > 0:
        yprev, zprev = Y[zrow - r0 :, :lc], Z[zrow - r0 :, :lc]
        aw -= zprev @ (Y[wrow - r0 :, :lc].T @ w) + yprev @ (Z[wrow - r0 :, :lc].T @ w)
        cnt.add("z_correction", 8.0 * m * lc * p)
    y = Y[zrow - r0 :, lc : lc + p]
    off = wrow - zrow
    cnt.add("z", 4.0 * m * p * p)
    return aw - 0.5 * (y @ (w.T @ aw[off:]))


def _panel_scope_update(P, Y, Z, task: UpdateTask, widths, i, r0, b, cnt):
    """Bring target panels up to date with the source panels' rank-2k factors."""
    s0, s1 = task.source
    t0, t1 = task.target
    c0 = t0 * b
    c1 = min(sum(widths[:t1]), P.shape[1])
    sc0, sc1 = s0 * b, min(sum(widths[:s1]), Y.shape[1])
    if c0 >= c1:
        return
    # rows of the targets start at their first column (global i + c0)
    g0 = i + c0
    rows = slice(g0 - r0, None)
    yr, zr = Y[rows, sc0:sc1], Z[rows, sc0:sc1]
    yc, zc = Y[g0 - r0 : i + c1 - r0, sc0:sc1], Z[g0 - r0 : i + c1 - r0, sc0:sc1]
    P[c0:, c0:c1] -= zr @ yc.T + yr @ zc.T
    cnt.add("panel_update", 4.0 * yr.shape[0] * (c1 - c0) * (sc1 - sc0))


def sbr(
    a: SymmetricMatrix,
    b: int,
    accumulate_q: bool = False,
    counter: Optional[FlopCounter] = None,
    workers: Optional[int] = None,
) -> Tuple[BandMatrix, Optional[OrthogonalAccumulator]]:
    """Classic band reduction: block size equal to the bandwidth."""
    return dbr(a, DbrConfig(b, b, accumulate_q), counter=counter, workers=workers)


def tridiag_direct(
    a: SymmetricMatrix,
    accumulate_q: bool = False,
    nb: int = 32,
    counter: Optional[FlopCounter] = None,
    workers: Optional[int] = None,
) -> Tuple[TridiagonalMatrix, Optional[OrthogonalAccumulator]]:
    """One-stage blocked Householder tridiagonalization.

    Each column needs a matrix-vector product with the whole trailing matrix;
    only the trailing update after every ``nb`` columns is a rank-2k BLAS3
    call.
    """
    n = a.n
    A = a.data.copy(order="F")
    Q = np.eye(n, order="F") if accumulate_q else None
    cnt = counter if counter is not None else FlopCounter()
    for i in range(0, max(n - 2, 0), nb):
        pb = min(nb, n - 2 - i)
        V = np.zeros((n - i, pb), order="F")
        Wm = np.zeros((n - i, pb), order="F")
        for c in range(pb):
            col = i + c
            lo = col - i
            if c > 0:
                A[col:, col] -= V[lo:, :c] @ Wm[lo, :c] + Wm[lo:, :c] @ V[lo, :c]
            h = house(A[col + 1 :, col], skip_reduced=True)
            A[col + 1, col] = h.alpha
            A[col + 2 :, col] = 0.0
            if h.beta == 0.0:
                continue
            v = h.v
            y = A[col + 1 :, col + 1 :] @ v
            m = v.size
            cnt.gemm(m, 1, m, "symv")
            if c > 0:
                vp, wp = V[lo + 1 :, :c], Wm[lo + 1 :, :c]
                y -= vp @ (wp.T @ v) + wp @ (vp.T @ v)
                cnt.add("symv_correction", 8.0 * m * c)
            y *= h.beta
            y -= (0.5 * h.beta * (y @ v)) * v
            V[lo + 1 :, c] = v
            Wm[lo + 1 :, c] = y
            if Q is not None:
                Q[:, col + 1 :] -= np.outer(Q[:, col + 1 :] @ (h.beta * v), v)
        t0 = i + pb
        syr2k_recursive(
            V[t0 - i :], Wm[t0 - i :], A[t0:, t0:], alpha=-1.0, beta=1.0,
            nb=SYR2K_BLOCK, workers=workers, counter=cnt,
        )
        _symmetrize_lower(A, t0)
    d = np.diagonal(A).copy()
    e = np.diagonal(A, -1).copy()
    return TridiagonalMatrix(d, e), (OrthogonalAccumulator(Q) if Q is not None else None)
