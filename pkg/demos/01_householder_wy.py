"""Householder reflectors and the compact WY form.

Run: python demos/01_householder_wy.py
"""

import numpy as np

from evdkit import compute_z, house, panel_qr

rng = np.random.default_rng(0)

# A single reflector maps x onto a multiple of e_1 and keeps its norm.
x = rng.standard_normal(6)
h = house(x)
print("x        =", np.round(x, 4))
print("H x      =", np.round(h.apply(x), 4))
print("alpha    =", round(h.alpha, 4), " ||x|| =", round(np.linalg.norm(x), 4))

# A tall-skinny panel, factored column by column. The product of the
# reflectors is stored as I - W Y^T, so applying it costs two GEMMs.
panel = rng.standard_normal((40, 8))
pf = panel_qr(panel)
q = pf.q
print("\npanel 40x8: ||Q^T Q - I|| =", f"{np.linalg.norm(q.T @ q - np.eye(40)):.2e}")
print("R is upper triangular:", np.allclose(np.tril(pf.r, -1), 0.0))
print("||Q R - P||            =", f"{np.linalg.norm(q[:, :8] @ pf.r[:8] - panel):.2e}")

# Two-sided update of a symmetric matrix: Q^T A Q = A - Z Y^T - Y Z^T.
a = rng.standard_normal((40, 40))
a = a + a.T
z = compute_z(a, pf.w, pf.y)
two_sided = q.T @ a @ q
rank2k = a - z @ pf.y.T - pf.y @ z.T
print("\nQ^T A Q vs rank-2k form:", f"{np.linalg.norm(two_sided - rank2k):.2e}")
