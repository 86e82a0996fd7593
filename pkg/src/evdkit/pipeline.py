"""Two-stage tridiagonalization and eigenvalues, end to end."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from .band_reduction import DbrConfig, dbr
from .bulge import chase_parallel, chase_serial
from .matrix import OrthogonalAccumulator, SymmetricMatrix, TridiagonalMatrix
from .tridiag_eig import EigResult, eig_qr


@dataclass
class PipelineResult:
    t: TridiagonalMatrix
    q: Optional[OrthogonalAccumulator]
    seconds: Dict[str, float] = field(default_factory=dict)


def effective_params(n: int, b: int, nb: int):
    """Clamp (b, nb) for tiny matrices where nothing needs reducing."""
    if n < 3:
        return 1, 1
    return b, nb


def tridiagonalize(
    a: SymmetricMatrix,
    b: int = 32,
    nb: int = 512,
    workers: Optional[int] = None,
    accumulate_q: bool = False,
    recursive_panels: bool = True,
    serial_chase: bool = False,
) -> PipelineResult:
    """Dense -> band (DBR) -> tridiagonal (bulge chasing), with ``A = Q T Q^T``.

    Matrices with ``n < 3`` are already tridiagonal and are returned as is.
    """
    n = a.n
    b, nb = effective_params(n, b, nb)
    secs: Dict[str, float] = {}
    t0 = time.perf_counter()
    if n >= 3:
        bm, q1 = dbr(a, DbrConfig(b, nb, accumulate_q, recursive_panels), workers=workers)
    else:
        bm, q1 = dbr(a, DbrConfig(1, 1, accumulate_q))
    t1 = time.perf_counter()
    q0 = q1.q if q1 is not None else None
    if serial_chase:
        t, q = chase_serial(bm, accumulate_q=accumulate_q, q0=q0)
    else:
        t, q = chase_parallel(bm, workers=workers, accumulate_q=accumulate_q, q0=q0)
    t2 = time.perf_counter()
    secs["dbr"] = t1 - t0
    secs["chase"] = t2 - t1
    secs["total"] = t2 - t0
    return PipelineResult(t, q, secs)


def eigvalsh(a, b: int = 32, nb: int = 512, workers: Optional[int] = None) -> EigResult:
    """All eigenvalues of a symmetric matrix via the two-stage pipeline."""
    if not isinstance(a, SymmetricMatrix):
        a = SymmetricMatrix(np.asarray(a, dtype=np.float64))
    n = a.n
    b = min(b, max(n - 2, 1))
    nb = min(max(nb, b), max(n - 1, 1))
    res = tridiagonalize(a, b, nb, workers=workers)
    return eig_qr(res.t)
