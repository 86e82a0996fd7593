"""Recursive blocking of the symmetric rank-2k update C += A B^T + B A^T.

Only the lower triangle of C is touched. The recursion splits C into
quadrants, updates the off-diagonal block with plain GEMMs and recurses into
the diagonal blocks; blocks of one level are issued as a single batch.

Run: python demos/02_syr2k_blocking.py
"""

import time

import numpy as np

from evdkit import syr2k_naive, syr2k_recursive, syr2k_schedule
from evdkit.flops import flop_model

n, k, nb = 512, 32, 64
for d in syr2k_schedule(n, k, nb):
    print(f"batch of {len(d):3d} blocks, block dims {d.block_dims}, lower-only={d.lower}")

rng = np.random.default_rng(1)
a, b = rng.standard_normal((n, k)), rng.standard_normal((n, k))
c0 = np.asfortranarray(rng.standard_normal((n, n)))

ref = c0.copy(order="F")
syr2k_naive(a, b, ref)
out = c0.copy(order="F")
syr2k_recursive(a, b, out, nb=nb)
low = np.tril_indices(n)
print("\nrelative deviation from the loop reference:",
      f"{np.linalg.norm(out[low] - ref[low]) / np.linalg.norm(ref[low]):.2e}")
print("upper triangle untouched:", np.array_equal(np.triu(out, 1), np.triu(c0, 1)))

# Throughput grows with k because each block product gets more work per byte.
n = 2048
for k in (16, 64, 256):
    a, b = rng.standard_normal((n, k)), rng.standard_normal((n, k))
    c = np.asfortranarray(np.zeros((n, n)))
    t0 = time.perf_counter()
    syr2k_recursive(a, b, c, nb=64)
    dt = time.perf_counter() - t0
    print(f"n={n} k={k:3d}: {dt * 1e3:7.1f} ms, {flop_model('syr2k', n, k=k) / dt / 1e9:6.1f} GFLOP/s")
