"""Band -> tridiagonal reduction by Householder bulge chasing.

``chase_serial`` runs the ``n - 2`` sweeps one after another.
``chase_parallel`` runs them on a pool of threads: each sweep runs to
completion on one worker and publishes its position in a shared progress
array after every step; the next sweep may start a step at column ``opcol``
only once its predecessor has published ``opcol + 2b``. Both paths execute
exactly the same arithmetic per sweep, so their results are bit-identical.
"""

from __future__ import annotations

import os
import threading
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from . import _chase_kernels as K
from .householder import HouseholderReflector
from .matrix import BandMatrix, OrthogonalAccumulator, TridiagonalMatrix


def default_workers() -> int:
    env = os.environ.get("EVDKIT_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def steps_per_sweep(n: int, b: int, s: int) -> int:
    """Number of chase steps in sweep ``s`` (reflector ranges starting at or before row n-1)."""
    return max(0, -(-(n - 1 - s) // b))


@dataclass
class SweepProgress:
    """Shared progress counters; ``gcom[s]`` is the last column published by sweep ``s``."""

    gcom: np.ndarray

    @classmethod
    def fresh(cls, n: int) -> "SweepProgress":
        return cls(np.zeros(max(n, 1), dtype=np.int64))

    def done(self, s: int, n: int) -> bool:
        return int(self.gcom[s]) >= n - 1


@dataclass
class ScheduleAudit:
    """Per-step event log recorded by an instrumented parallel chase.

    ``start`` and ``end`` are positions in one global sequence (an atomic
    counter bumped when a step begins work and when it finishes, before it
    publishes). ``seen`` is the predecessor's progress value observed when
    the step was cleared to run.
    """

    n: int
    b: int
    start: np.ndarray
    end: np.ndarray
    seen: np.ndarray

    def wait_violations(self) -> int:
        """Steps that ran with ``gcom[s-1] - opcol < 2b`` while the predecessor was unfinished."""
        n, b = self.n, self.b
        bad = 0
        for s in range(1, n - 2):
            ks = steps_per_sweep(n, b, s)
            opcol = s + b * np.arange(ks)
            seen = self.seen[s, :ks]
            ok = (seen - opcol >= 2 * b) | (seen >= n - 1)
            bad += int(np.count_nonzero(~ok))
        return bad

    def conflict_violations(self) -> int:
        """Columns on which two consecutive sweeps overlapped in time.

        Checked from the recorded event order alone: on every column, the last
        step of sweep ``s`` touching it must end before the first step of
        sweep ``s+1`` touching it starts. Any sweep between ``s`` and ``t > s+1``
        also touches every column both of them touch, so consecutive pairs
        cover all pairs.
        """
        n, b = self.n, self.b
        lo, hi = _step_columns(n, b)
        sweeps = max(n - 2, 0)
        big = np.iinfo(np.int64).max
        last_end = np.full((sweeps, n), -1, dtype=np.int64)
        first_start = np.full((sweeps, n), big, dtype=np.int64)
        for s in range(sweeps):
            for k in range(steps_per_sweep(n, b, s)):
                c0, c1 = lo[s, k], hi[s, k] + 1
                np.maximum(last_end[s, c0:c1], self.end[s, k], out=last_end[s, c0:c1])
                np.minimum(first_start[s, c0:c1], self.start[s, k], out=first_start[s, c0:c1])
        both = (last_end[:-1] >= 0) & (first_start[1:] < big)
        return int(np.count_nonzero(both & (last_end[:-1] >= first_start[1:])))

    def monotone(self) -> bool:
        """Within each sweep, events are ordered and each step starts after the previous one ended."""
        for s in range(self.n - 2):
            ks = steps_per_sweep(self.n, self.b, s)
            st, en = self.start[s, :ks], self.end[s, :ks]
            if np.any(en <= st) or np.any(st[1:] <= en[:-1]):
                return False
        return True


def _step_columns(n: int, b: int):
    """Column range ``[lo, hi]`` touched by each (sweep, step)."""
    maxk = steps_per_sweep(n, b, 0)
    s = np.arange(max(n - 2, 0))[:, None]
    k = np.arange(max(maxk, 1))[None, :]
    st = s + 1 + k * b
    ed = np.minimum(st + b - 1, n - 1)
    lo = np.where(k == 0, s, st - b)
    return lo, ed


@dataclass
class BulgeWorkspace:
    """Dense window around one chase step, for reference-level updates.

    ``window`` is a symmetric dense block (both triangles); ``g0:g1`` is the
    range the reflector acts on (the green block). Rows/columns outside the
    green range but inside the window form the pink blocks, which only see
    the reflector from one side.
    """

    window: np.ndarray
    g0: int
    g1: int

    def __post_init__(self):
        self.window = np.array(self.window, dtype=np.float64)
        m = self.window.shape[0]
        if self.window.shape != (m, m) or not (0 <= self.g0 < self.g1 <= m):
            raise AssertionError(f"bad window geometry: shape {self.window.shape}, green {self.g0}:{self.g1}")


def sweep_window_update(ws: BulgeWorkspace, v: HouseholderReflector) -> BulgeWorkspace:
    """Apply ``H = I - beta v v^T`` on the green range from both sides, pink blocks from one side."""
    g0, g1 = ws.g0, ws.g1
    if v.v.size != g1 - g0:
        raise AssertionError(f"reflector length {v.v.size} does not match green block {g1 - g0}")
    if v.beta == 0.0:
        return ws
    w = ws.window
    vv, beta = v.v, v.beta
    # rows g0:g1 from the left (green and right-hand pink), then columns g0:g1 from the right
    w[g0:g1, :] -= beta * np.outer(vv, vv @ w[g0:g1, :])
    w[:, g0:g1] -= beta * np.outer(w[:, g0:g1] @ vv, vv)
    return ws


def _validate(bm: BandMatrix) -> None:
    n, b = bm.n, bm.b
    if n > 1 and b >= n:
        raise ValueError(f"bandwidth must satisfy b < n, got b={b}, n={n}")


def _to_work(bm: BandMatrix) -> np.ndarray:
    n, b = bm.n, bm.b
    wb = np.zeros((n, 2 * b + 1))
    wb[:, : b + 1] = bm.bands
    return wb


@dataclass
class _Run:
    wb: np.ndarray
    gcom: np.ndarray
    V: np.ndarray
    TAU: np.ndarray
    store: bool
    audit: bool
    start: np.ndarray
    end: np.ndarray
    seen: np.ndarray
    seq: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=np.int64))


def _prepare(bm: BandMatrix, accumulate_q: bool, audit: bool) -> _Run:
    n, b = bm.n, bm.b
    sweeps = max(n - 2, 1)
    maxk = max(steps_per_sweep(n, b, 0), 1)
    if accumulate_q:
        V = np.zeros((sweeps, maxk, b))
        TAU = np.zeros((sweeps, maxk))
    else:
        V = np.zeros((1, 1, 1))
        TAU = np.zeros((1, 1))
    if audit:
        ev = [np.full((sweeps, maxk), -1, dtype=np.int64) for _ in range(3)]
    else:
        ev = [np.zeros((1, 1), dtype=np.int64) for _ in range(3)]
    return _Run(_to_work(bm), SweepProgress.fresh(n).gcom, V, TAU, accumulate_q, audit, *ev)


def _finish(run: _Run, n: int, b: int, accumulate_q: bool, q0: Optional[np.ndarray]):
    t = TridiagonalMatrix(run.wb[:, 0].copy(), run.wb[: n - 1, 1].copy())
    if not accumulate_q:
        return t, None
    q = np.eye(n, order="F") if q0 is None else np.array(q0, dtype=np.float64, order="F")
    K.replay_q(q, n, b, run.V, run.TAU)
    return t, OrthogonalAccumulator(q)


def _trivial(bm: BandMatrix, accumulate_q: bool, q0):
    t = TridiagonalMatrix(bm.bands[:, 0].copy(), bm.bands[: bm.n - 1, 1].copy() if bm.n > 1 else [])
    if not accumulate_q:
        return t, None
    q = np.eye(bm.n, order="F") if q0 is None else np.array(q0, dtype=np.float64, order="F")
    return t, OrthogonalAccumulator(q)


_NO_DELAYS = np.zeros(0, dtype=np.int64)


def chase_serial(
    bm: BandMatrix, accumulate_q: bool = False, q0: Optional[np.ndarray] = None
) -> Tuple[TridiagonalMatrix, Optional[OrthogonalAccumulator]]:
    """Reduce ``bm`` to tridiagonal form, sweeps strictly in order.

    With ``accumulate_q`` the returned ``Q`` satisfies ``B = Q T Q^T``; pass
    ``q0`` (e.g. the band reduction's factor) to get ``q0 @ Q`` instead.
    """
    _validate(bm)
    n, b = bm.n, bm.b
    if b == 1 or n < 3:
        return _trivial(bm, accumulate_q, q0)
    run = _prepare(bm, accumulate_q, audit=False)
    K.chase_all_serial(
        run.wb, n, b, run.gcom, run.V, run.TAU, run.store, run.audit,
        run.start, run.end, run.seen, run.seq, _NO_DELAYS,
    )
    return _finish(run, n, b, accumulate_q, q0)


def chase_parallel(
    bm: BandMatrix,
    workers: Optional[int] = None,
    accumulate_q: bool = False,
    q0: Optional[np.ndarray] = None,
    audit: bool = False,
    delays: Optional[np.ndarray] = None,
):
    """Pipelined bulge chasing on ``workers`` threads.

    Returns ``(T, Q)``, or ``(T, Q, ScheduleAudit)`` when ``audit`` is set.
    ``delays`` (non-negative ints) injects that many scheduler yields before
    each step, indexed pseudo-randomly by (sweep, step); it exists for stress
    testing the synchronization.
    """
    _validate(bm)
    n, b = bm.n, bm.b
    workers = default_workers() if workers is None else int(workers)
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    if b == 1 or n < 3:
        t, q = _trivial(bm, accumulate_q, q0)
        if audit:
            z = np.zeros((1, 1), dtype=np.int64)
            return t, q, ScheduleAudit(n, b, z, z, z)
        return t, q
    run = _prepare(bm, accumulate_q, audit)
    dl = _NO_DELAYS if delays is None else np.ascontiguousarray(delays, dtype=np.int64)
    next_sweep = np.zeros(1, dtype=np.int64)
    args = (
        run.wb, n, b, run.gcom, next_sweep, run.V, run.TAU, run.store, run.audit,
        run.start, run.end, run.seen, run.seq, dl,
    )
    if workers == 1:
        K.chase_worker(*args)
    else:
        errors = []

        def target():
            try:
                K.chase_worker(*args)
            except BaseException as exc:  # pragma: no cover - surfaced below
                errors.append(exc)

        threads = [threading.Thread(target=target, daemon=True) for _ in range(workers)]
        for th in threads:
            th.start()
        for th in threads:
            th.join()
        if errors:
            raise errors[0]
    t, q = _finish(run, n, b, accumulate_q, q0)
    if audit:
        return t, q, ScheduleAudit(n, b, run.start, run.end, run.seen)
    return t, q


def chase_flop_count(n: int, b: int) -> float:
    """Flops executed by the chase kernel, counted from the actual block sizes.

    Per step with reflector length ``m``: ``3m`` to form the reflector,
    ``4m`` per column of the left update, ``4m^2 + 4m`` for the two-sided
    diagonal block and ``4m`` per row of the right update. Steps whose
    reflector is the identity are counted as if they were not.
    """
    total = 0.0
    for s in range(n - 2):
        st, ed, col, prev_ed, k = s + 1, min(s + b, n - 1), s, -1, 0
        while st <= n - 1:
            m = ed - st + 1
            if m > 1:
                total += 3 * m + 4 * m * m + 4 * m
                if k > 0:
                    total += 4 * m * (prev_ed - col)
                total += 4 * m * (min(ed + b, n - 1) - ed)
            prev_ed, col, st, ed, k = ed, st, ed + 1, min(ed + b, n - 1), k + 1
    return total
