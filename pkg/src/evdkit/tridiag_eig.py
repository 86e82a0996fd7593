"""Eigenvalues of the tridiagonal output, plus the dense Jacobi oracle."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .matrix import EPS, SymmetricMatrix, TridiagonalMatrix


@dataclass
class EigResult:
    values: np.ndarray
    iterations: int
    converged: bool


@njit(cache=True)
def _qr_iterate(d, e, tol, cap):
    n = d.size
    iters = 0
    hi = n - 1
    while hi > 0:
        for k in range(hi):
            if e[k] != 0.0 and abs(e[k]) <= tol * (abs(d[k]) + abs(d[k + 1])):
                e[k] = 0.0
        while hi > 0 and e[hi - 1] == 0.0:
            hi -= 1
        if hi == 0:
            break
        if iters >= cap:
            return iters, False
        lo = hi - 1
        while lo > 0 and e[lo - 1] != 0.0:
            lo -= 1

        # Wilkinson shift from the trailing 2x2 block
        delta = 0.5 * (d[hi - 1] - d[hi])
        eh = e[hi - 1]
        sgn = 1.0 if delta >= 0.0 else -1.0
        mu = d[hi] - eh * eh / (delta + sgn * np.hypot(delta, eh))

        x = d[lo] - mu
        z = e[lo]
        for k in range(lo, hi):
            r = np.hypot(x, z)
            if r == 0.0:
                c, s = 1.0, 0.0
            else:
                c, s = x / r, z / r
            if k > lo:
                e[k - 1] = r
            dk, dk1, ek = d[k], d[k + 1], e[k]
            d[k] = c * c * dk + 2.0 * c * s * ek + s * s * dk1
            d[k + 1] = s * s * dk - 2.0 * c * s * ek + c * c * dk1
            e[k] = c * s * (dk1 - dk) + (c * c - s * s) * ek
            if k < hi - 1:
                x = e[k]
                z = s * e[k + 1]
                e[k + 1] = c * e[k + 1]
        iters += 1
    return iters, True


def eig_qr(t: TridiagonalMatrix, tol: float = 4 * EPS) -> EigResult:
    """All eigenvalues of ``t`` by implicit Wilkinson-shifted QR.

    ``e[k]`` is set to zero once ``|e[k]| <= tol * (|d[k]| + |d[k+1]|)``.
    Gives up after ``30 n`` sweeps and reports ``converged=False``.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    d = t.d.copy()
    e = t.e.copy()
    iters, ok = _qr_iterate(d, e, float(tol), 30 * t.n)
    return EigResult(np.sort(d), int(iters), bool(ok))


@njit(cache=True)
def _jacobi(a, tol, max_sweeps):
    n = a.shape[0]
    norm = np.sqrt(np.sum(a * a))
    for sweep in range(max_sweeps):
        off = 0.0
        for j in range(n):
            for i in range(n):
                if i != j:
                    off += a[i, j] * a[i, j]
        if np.sqrt(off) <= tol * norm:
            return sweep, True
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = (1.0 if theta >= 0.0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
    return max_sweeps, False


def jacobi_oracle(a, tol: float = 1e-14, max_sweeps: int = 60) -> EigResult:
    """Eigenvalues by cyclic Jacobi rotations on a dense copy.

    Stops once the off-diagonal Frobenius mass is at most ``tol * ||A||_F``.
    Cost is O(n^3) per sweep; meant for n up to a few hundred.
    """
    data = a.data if isinstance(a, SymmetricMatrix) else np.asarray(a, dtype=np.float64)
    work = np.array(data, dtype=np.float64, order="C")
    sweeps, ok = _jacobi(work, float(tol), int(max_sweeps))
    return EigResult(np.sort(np.diag(work).copy()), int(sweeps), bool(ok))
