"""Dense to band with the bandwidth decoupled from the block size.

The classic reduction uses one panel per block, so nb == b. Here a block of
nb columns is processed as nb/b panels of width b; the trailing matrix is
updated once per block with a rank-2*nb update, which is where the speed
comes from when b is small.

Run: python demos/03_band_reduction.py
"""

import time

import numpy as np

from evdkit import DbrConfig, FlopCounter, dbr, make_symmetric, recursive_panel_schedule, sbr, similarity_residual

# Order of the intra-block panel updates for b=32, nb=256.
sched = recursive_panel_schedule(32, 256)
print("recursive schedule, update widths:", sched.k_histogram())
print("flat schedule, update widths:     ", recursive_panel_schedule(32, 256, recursive=False).k_histogram())
for kind, item in list(sched.events())[:7]:
    print("  ", kind, item)

a = make_symmetric(400, 5, "gaussian")
band, q = dbr(a, DbrConfig(b=8, nb=64, accumulate_q=True))
dense = band.to_dense()
print("\nbandwidth 8: max |B_ij| outside the band =",
      f"{np.max(np.abs(np.tril(dense, -9))):.1e}")
print("||A - Q B Q^T|| / ||A|| =", f"{similarity_residual(a, q, band):.2e}")

# With nb == b the detached reduction is the classic one, bit for bit.
b1, _ = dbr(a, DbrConfig(8, 8))
b2, _ = sbr(a, 8)
print("dbr(b=8, nb=8) identical to sbr(b=8):", np.array_equal(b1.bands, b2.bands))

a = make_symmetric(1536, 6, "gaussian")
for b, nb in ((32, 32), (32, 256), (8, 256)):
    cnt = FlopCounter()
    t0 = time.perf_counter()
    dbr(a, DbrConfig(b, nb), counter=cnt)
    print(f"n=1536 b={b:2d} nb={nb:3d}: {time.perf_counter() - t0:6.2f} s, {cnt.total / 1e9:5.2f} Gflop executed")
