"""numba kernels for bulge chasing on lower band storage.

Working storage ``wb`` has shape ``(n, 2b + 1)`` with ``A[i, j] = wb[j, i - j]``
for ``i >= j``; the extra ``b`` diagonals hold the transient bulge (fill never
reaches distance ``2b`` from the diagonal).

Sweep ``s`` eliminates column ``s``. Its step ``k`` owns the reflector range
``[st, ed] = [s + 1 + k*b, min(s + (k+1)*b, n-1)]`` and touches only
columns ``[st - b, ed]`` (``[s, ed]`` for ``k = 0``).
"""

import numpy as np
from numba import njit

from ._atomics import atomic_fetch_add, atomic_load, atomic_store, sched_yield

SPINS_BEFORE_YIELD = 32


@njit(inline="always")
def _get(wb, i, j):
    if i >= j:
        return wb[j, i - j]
    return wb[i, j - i]


@njit(inline="always")
def _set(wb, i, j, x):
    if i >= j:
        wb[j, i - j] = x
    else:
        wb[i, j - i] = x


@njit(nogil=True, cache=True)
def _step(wb, n, b, col, st, ed, prev_ed, k, v, y):
    """One chase step. Returns tau (0 when nothing had to be eliminated)."""
    m = ed - st + 1
    x0 = _get(wb, st, col)
    scale = 0.0
    for r in range(1, m):
        scale = max(scale, abs(_get(wb, st + r, col)))
    if scale == 0.0:
        return 0.0
    # scaled norm, safe against underflow of the squares
    scale = max(scale, abs(x0))
    ssq = 0.0
    for r in range(m):
        t = _get(wb, st + r, col) / scale
        ssq += t * t
    nrm = np.sqrt(ssq)
    xs0 = x0 / scale
    alpha = -nrm if xs0 >= 0.0 else nrm
    v0 = xs0 - alpha
    v[0] = 1.0
    for r in range(1, m):
        v[r] = (_get(wb, st + r, col) / scale) / v0
        _set(wb, st + r, col, 0.0)
    _set(wb, st, col, alpha * scale)
    tau = -v0 / alpha

    # left: rest of the block the reflector was taken from (columns col+1..prev_ed)
    if k > 0:
        for jj in range(col + 1, prev_ed + 1):
            d = 0.0
            for r in range(m):
                d += v[r] * wb[jj, st + r - jj]
            d *= tau
            for r in range(m):
                wb[jj, st + r - jj] -= d * v[r]

    # two-sided on the diagonal block: D <- H D H = D - v y^T - y v^T
    for r in range(m):
        acc = 0.0
        for c in range(m):
            acc += _get(wb, st + r, st + c) * v[c]
        y[r] = tau * acc
    d = 0.0
    for r in range(m):
        d += y[r] * v[r]
    d *= 0.5 * tau
    for r in range(m):
        y[r] -= d * v[r]
    for c in range(m):
        for r in range(c, m):
            wb[st + c, r - c] -= v[r] * y[c] + y[r] * v[c]

    # right: block below the diagonal block, creates the bulge
    r1 = ed + 1
    r2 = min(ed + b, n - 1)
    for row in range(r1, r2 + 1):
        d = 0.0
        for c in range(m):
            d += wb[st + c, row - st - c] * v[c]
        d *= tau
        for c in range(m):
            wb[st + c, row - st - c] -= d * v[c]
    return tau


@njit(nogil=True, cache=True)
def run_sweep(wb, n, b, s, gcom, wait, V, TAU, store, audit, ev_start, ev_end, ev_seen, seq, delays):
    """Run sweep ``s`` to completion, publishing progress after every step.

    With ``wait`` set, step ``k`` (``opcol = s + k*b``) starts only once
    ``gcom[s-1] >= min(opcol + 2b, n-1)``; ``gcom[s-1] >= n-1`` means the
    predecessor has finished.
    """
    v = np.zeros(b)
    y = np.zeros(b)
    opcol = s
    col = s
    st = s + 1
    ed = min(s + b, n - 1)
    prev_ed = -1
    k = 0
    nd = delays.shape[0]
    while st <= n - 1:
        seen = -1
        if wait and s > 0:
            need = min(opcol + 2 * b, n - 1)
            spins = 0
            seen = atomic_load(gcom, s - 1)
            while seen < need:
                spins += 1
                if spins > SPINS_BEFORE_YIELD:
                    sched_yield()
                seen = atomic_load(gcom, s - 1)
        if audit:
            ev_start[s, k] = atomic_fetch_add(seq, 0, 1)
            ev_seen[s, k] = seen
        if nd > 0:
            for _ in range(delays[(s * 7919 + k) % nd]):
                sched_yield()
        tau = _step(wb, n, b, col, st, ed, prev_ed, k, v, y)
        if store:
            TAU[s, k] = tau
            for r in range(ed - st + 1):
                V[s, k, r] = v[r]
        if audit:
            ev_end[s, k] = atomic_fetch_add(seq, 0, 1)
        opcol += b
        atomic_store(gcom, s, min(opcol, n))
        prev_ed = ed
        col = st
        st = ed + 1
        ed = min(ed + b, n - 1)
        k += 1


@njit(nogil=True, cache=True)
def chase_all_serial(wb, n, b, gcom, V, TAU, store, audit, ev_start, ev_end, ev_seen, seq, delays):
    for s in range(n - 2):
        run_sweep(wb, n, b, s, gcom, False, V, TAU, store, audit, ev_start, ev_end, ev_seen, seq, delays)


@njit(nogil=True, cache=True)
def chase_worker(wb, n, b, gcom, next_sweep, V, TAU, store, audit, ev_start, ev_end, ev_seen, seq, delays):
    """Pull sweeps in index order from the shared queue until none are left."""
    while True:
        s = atomic_fetch_add(next_sweep, 0, 1)
        if s >= n - 2:
            return
        run_sweep(wb, n, b, s, gcom, True, V, TAU, store, audit, ev_start, ev_end, ev_seen, seq, delays)


@njit(nogil=True, cache=True)
def replay_q(q, n, b, V, TAU):
    """``Q <- Q H`` for every stored reflector, in serial sweep order."""
    w = np.zeros(q.shape[0])
    rows = q.shape[0]
    for s in range(n - 2):
        k = 0
        st = s + 1
        while st <= n - 1:
            ed = min(st + b - 1, n - 1)
            tau = TAU[s, k]
            if tau != 0.0:
                m = ed - st + 1
                w[:] = 0.0
                for c in range(m):
                    vc = V[s, k, c]
                    for r in range(rows):
                        w[r] += q[r, st + c] * vc
                for c in range(m):
                    f = tau * V[s, k, c]
                    for r in range(rows):
                        q[r, st + c] -= w[r] * f
            st = ed + 1
            k += 1
