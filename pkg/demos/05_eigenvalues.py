"""All eigenvalues of a dense symmetric matrix, end to end.

Run: python demos/05_eigenvalues.py
"""

import time

import numpy as np

from evdkit import eig_qr, eigvalsh, jacobi_oracle, make_symmetric, tridiag_direct, tridiagonalize

a = make_symmetric(200, 11, "gaussian")
ev = eigvalsh(a, b=8, nb=64)
ref = jacobi_oracle(a)
print("converged:", ev.converged, " QR iterations:", ev.iterations)
print("max deviation from Jacobi / ||A||:", f"{np.max(np.abs(ev.values - ref.values)) / a.norm():.2e}")
print("smallest three:", np.round(ev.values[:3], 6))

# The trace is invariant under each orthogonal similarity.
res = tridiagonalize(a, b=8, nb=64)
print("trace A =", round(np.trace(a.data), 10), " trace T =", round(res.t.d.sum(), 10))
print("stage seconds:", {k: round(v, 3) for k, v in res.seconds.items()})

# Two stages against the one-stage reduction at a size where it matters.
a = make_symmetric(2048, 2, "gaussian")
t0 = time.perf_counter()
two = tridiagonalize(a, b=32, nb=256)
t_two = time.perf_counter() - t0
t0 = time.perf_counter()
one, _ = tridiag_direct(a)
t_one = time.perf_counter() - t0
print(f"\nn=2048: two-stage {t_two:.2f} s, direct {t_one:.2f} s")
gap = np.max(np.abs(eig_qr(two.t).values - eig_qr(one).values)) / a.norm()
print("eigenvalue agreement / ||A||:", f"{gap:.1e}")
