"""Householder reflectors and the compact WY panel factorization."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np


@dataclass
class HouseholderReflector:
    """``H = I - beta * v v^T`` with ``v[0] == 1``; ``H x = (alpha, 0, ..., 0)``."""

    v: np.ndarray
    beta: float
    alpha: float

    def matrix(self) -> np.ndarray:
        m = self.v.size
        return np.eye(m) - self.beta * np.outer(self.v, self.v)

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Return ``H @ x`` for a vector or a matrix with ``len(v)`` rows."""
        x = np.asarray(x, dtype=np.float64)
        return x - self.beta * np.multiply.outer(self.v, self.v @ x)


def house(x, skip_reduced: bool = False) -> HouseholderReflector:
    """Reflector mapping ``x`` onto a multiple of ``e_1``.

    ``alpha = -sign(x[0]) * ||x||`` with ``sign(0) = +1``, so forming
    ``v[0] = x[0] - alpha`` never cancels. A zero vector gives the identity
    (``beta = 0``). With ``skip_reduced`` a vector whose tail is already zero
    is left alone (``beta = 0``, ``alpha = x[0]``) instead of being reflected
    to ``-x[0]``; the reduction drivers use this so that inputs that are
    already banded or tridiagonal pass through unchanged.
    """
    x = np.array(x, dtype=np.float64).ravel()
    m = x.size
    if m == 0:
        raise ValueError("invalid length: house needs a vector with at least one entry")
    v = np.zeros(m)
    v[0] = 1.0
    x0 = x[0]
    if m == 1 or not np.any(x[1:]):
        if skip_reduced or x0 == 0.0:
            return HouseholderReflector(v, 0.0, float(x0))
    # work on x / max|x| so the norm neither underflows nor overflows
    scale = float(np.max(np.abs(x)))
    xs = x / scale
    nrm = float(np.linalg.norm(xs))
    alpha = -nrm if xs[0] >= 0.0 else nrm
    v0 = xs[0] - alpha
    v[1:] = xs[1:] / v0
    beta = -v0 / alpha
    return HouseholderReflector(v, float(beta), float(alpha * scale))


@dataclass
class PanelFactors:
    """Compact WY factors of one panel: ``H_1 H_2 ... H_p = I - W Y^T``."""

    w: np.ndarray
    y: np.ndarray
    r: np.ndarray
    z: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    betas: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def q(self) -> np.ndarray:
        """Explicit ``I - W Y^T`` (for tests and small panels)."""
        m = self.y.shape[0]
        return np.eye(m) - self.w @ self.y.T


def panel_qr(panel, skip_reduced: bool = False) -> PanelFactors:
    """Householder QR of a tall-skinny panel in compact WY form.

    Returns ``W = Y T`` where ``Y`` is unit lower trapezoidal and ``T`` is the
    upper triangular factor accumulated column by column (forward, LAPACK
    ``larft`` ordering). ``(I - W Y^T)^T panel = [R; 0]``.
    """
    a = np.array(panel, dtype=np.float64, order="F")
    if a.ndim != 2:
        raise ValueError("panel must be a 2-D array")
    m, p = a.shape
    if m < p or p < 1:
        raise ValueError(f"shape error: panel_qr needs m >= p >= 1, got {m}x{p}")
    y = np.zeros((m, p), order="F")
    t = np.zeros((p, p), order="F")
    betas = np.zeros(p)
    for c in range(p):
        h = house(a[c:, c], skip_reduced=skip_reduced)
        y[c:, c] = h.v
        betas[c] = h.beta
        a[c, c] = h.alpha
        a[c + 1 :, c] = 0.0
        if h.beta != 0.0 and c + 1 < p:
            blk = a[c:, c + 1 :]
            blk -= h.beta * np.outer(h.v, h.v @ blk)
        # T[:c, c] = -beta * T[:c, :c] @ (Y[:, :c]^T v)
        if c > 0:
            t[:c, c] = -h.beta * (t[:c, :c] @ (y[c:, :c].T @ h.v))
        t[c, c] = h.beta
    w = y @ t
    return PanelFactors(w=w, y=y, r=np.triu(a[:p, :]), betas=betas)


ApplyA = Union[np.ndarray, Callable[[np.ndarray], np.ndarray]]


def compute_z(apply_a: ApplyA, w: np.ndarray, y: np.ndarray) -> np.ndarray:
    """``Z = A W - 1/2 Y (W^T (A W))`` with a single evaluation of ``A W``.

    With ``Z`` in hand the two-sided update ``(I - W Y^T)^T A (I - W Y^T)``
    becomes the symmetric rank-2k update ``A - Z Y^T - Y Z^T``.
    """
    w = np.asarray(w, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if w.shape != y.shape or w.ndim != 2:
        raise ValueError(f"shape mismatch: W {w.shape}, Y {y.shape}")
    if callable(apply_a):
        aw = np.asarray(apply_a(w), dtype=np.float64)
    else:
        a = np.asarray(apply_a, dtype=np.float64)
        if a.shape != (w.shape[0], w.shape[0]):
            raise ValueError(f"shape mismatch: A {a.shape} vs W {w.shape}")
        aw = a @ w
    if aw.shape != w.shape:
        raise ValueError(f"shape mismatch: A W has shape {aw.shape}, expected {w.shape}")
    return aw - 0.5 * (y @ (w.T @ aw))
