import numpy as np
import pytest

from evdkit.bulge import (
    BulgeWorkspace,
    SweepProgress,
    chase_flop_count,
    chase_parallel,
    chase_serial,
    steps_per_sweep,
    sweep_window_update,
)
from evdkit.householder import house
from evdkit.matrix import EPS, BandMatrix, TridiagonalMatrix, make_band, similarity_residual, tol_orth, trace
from evdkit.tridiag_eig import jacobi_oracle


def dense_chase(bm):
    """Reference: every reflector applied to the full dense matrix from both sides."""
    a = bm.to_dense().copy()
    n, b = bm.n, bm.b
    for s in range(n - 2):
        col, st = s, s + 1
        while st <= n - 1:
            ed = min(st + b - 1, n - 1)
            h = house(a[st : ed + 1, col], skip_reduced=True)
            H = np.eye(n)
            H[st : ed + 1, st : ed + 1] = h.matrix()
            a = H @ a @ H
            col, st = st, ed + 1
    return a


@pytest.mark.parametrize("n,b", [(6, 2), (17, 3), (40, 4), (33, 8), (20, 19)])
def test_serial_matches_dense_reference(n, b):
    bm = make_band(n, b, seed=n * b)
    t, _ = chase_serial(bm)
    ref = dense_chase(bm)
    scale = bm.norm()
    assert np.max(np.abs(t.to_dense() - np.triu(np.tril(ref, 1), -1))) <= 100 * n * EPS * scale
    # the reference really is tridiagonal at the end
    i, j = np.indices((n, n))
    assert np.max(np.abs(ref[np.abs(i - j) > 1]), initial=0.0) <= 100 * n * EPS * scale


def test_bandwidth_one_is_untouched():
    bm = make_band(12, 1, seed=3)
    t, q = chase_serial(bm, accumulate_q=True)
    assert np.array_equal(t.d, bm.bands[:, 0]) and np.array_equal(t.e, bm.bands[:-1, 1])
    assert np.array_equal(q.q, np.eye(12))


def test_tridiagonal_stored_wide():
    t0 = TridiagonalMatrix(np.linspace(1, 2, 25), np.full(24, -0.5))
    bm = BandMatrix.from_dense(t0.to_dense(), 3)
    t, _ = chase_serial(bm)
    assert np.max(np.abs(t.to_dense() - t0.to_dense())) <= 50 * 25 * EPS * bm.norm()


def test_eigenvalues_match_jacobi():
    bm = make_band(32, 4, seed=7)
    t, _ = chase_serial(bm)
    ev_t = jacobi_oracle(t.to_dense()).values
    ev_b = jacobi_oracle(bm.to_dense()).values
    assert np.max(np.abs(ev_t - ev_b)) <= 1e-11 * bm.norm()


@pytest.mark.parametrize("n,b", [(50, 5), (64, 16), (9, 2)])
def test_q_accumulation(n, b):
    bm = make_band(n, b, seed=1)
    t, q = chase_serial(bm, accumulate_q=True)
    assert similarity_residual(bm.to_dense(), q, t) <= 100 * n * EPS
    assert q.orthogonality_error() <= tol_orth(n)
    # q0 composes on the left
    q0 = np.linalg.qr(np.random.default_rng(0).standard_normal((n, n)))[0]
    _, q2 = chase_serial(bm, accumulate_q=True, q0=q0)
    assert np.allclose(q2.q, q0 @ q.q, rtol=0, atol=1e-13)


def test_trace_preserved():
    bm = make_band(120, 6, seed=2)
    t, _ = chase_serial(bm)
    assert abs(trace(bm) - trace(t)) <= 1e-10 * bm.norm()


def test_tiny_matrices():
    for n in (1, 2):
        bm = BandMatrix(np.ones((n, 2)), 1)
        t, _ = chase_parallel(bm, workers=3)
        assert t.n == n


def test_bandwidth_must_be_below_n():
    with pytest.raises(ValueError):
        BandMatrix(np.zeros((4, 5)), 4)


def test_workers_must_be_positive():
    with pytest.raises(ValueError):
        chase_parallel(make_band(10, 2), workers=0)


def test_workers_one_is_bit_identical():
    bm = make_band(100, 7, seed=5)
    ts, qs = chase_serial(bm, accumulate_q=True)
    tp, qp = chase_parallel(bm, workers=1, accumulate_q=True)
    assert np.array_equal(ts.d, tp.d) and np.array_equal(ts.e, tp.e) and np.array_equal(qs.q, qp.q)


@pytest.mark.parametrize("workers", [2, 4, 8])
def test_parallel_equals_serial(workers):
    bm = make_band(256, 8, seed=11)
    ts, _ = chase_serial(bm)
    tp, _ = chase_parallel(bm, workers=workers)
    tol = 1e-12 * bm.norm()
    assert np.max(np.abs(ts.d - tp.d)) <= tol and np.max(np.abs(ts.e - tp.e)) <= tol
    # stronger than required: the arithmetic per sweep does not depend on the schedule
    assert np.array_equal(ts.d, tp.d) and np.array_equal(ts.e, tp.e)


def test_input_not_modified():
    bm = make_band(40, 4, seed=1)
    before = bm.bands.copy()
    chase_parallel(bm, workers=2)
    assert np.array_equal(bm.bands, before)


def test_stress_randomized_delays():
    bm = make_band(128, 4, seed=3)
    ts, _ = chase_serial(bm)
    for run in range(100):
        delays = np.random.default_rng(run).integers(0, 4, size=257)
        tp, _, audit = chase_parallel(bm, workers=4, audit=True, delays=delays)
        assert audit.wait_violations() == 0
        assert audit.conflict_violations() == 0
        assert audit.monotone()
        assert np.array_equal(tp.d, ts.d) and np.array_equal(tp.e, ts.e)


def test_audit_progress_observations_are_monotone():
    n, b = 60, 3
    _, _, audit = chase_parallel(make_band(n, b, 1), workers=3, audit=True)
    for s in range(1, n - 2):
        seen = audit.seen[s, : steps_per_sweep(n, b, s)]
        assert np.all(np.diff(seen) >= 0)
        # every step was cleared with a 2b margin or a finished predecessor
        opcol = s + b * np.arange(seen.size)
        assert np.all((seen >= opcol + 2 * b) | (seen >= n - 1))


def test_audit_flags_injected_overlap():
    _, _, audit = chase_parallel(make_band(40, 4, 1), workers=2, audit=True)
    assert audit.conflict_violations() == 0
    audit.start[5, 0] = audit.end[4, 1] - 1
    assert audit.conflict_violations() > 0


def test_sweep_progress():
    p = SweepProgress.fresh(10)
    assert p.gcom.shape == (10,) and not p.done(0, 10)
    p.gcom[0] = 9
    assert p.done(0, 10)


def test_steps_per_sweep():
    assert steps_per_sweep(10, 3, 0) == 3  # [1,3], [4,6], [7,9]
    assert steps_per_sweep(10, 3, 7) == 1
    assert steps_per_sweep(10, 3, 8) == 1
    assert sum(steps_per_sweep(10, 3, s) for s in range(8)) == 3 + 3 + 3 + 2 + 2 + 2 + 1 + 1


# --- window update --------------------------------------------------------------

def test_window_identity_reflector():
    w = np.random.default_rng(0).standard_normal((6, 6))
    w = w + w.T
    ws = BulgeWorkspace(w.copy(), 2, 4)
    out = sweep_window_update(ws, house(np.zeros(2)))
    assert np.array_equal(out.window, w)


def test_window_matches_dense_product():
    b = 4
    r = np.random.default_rng(1)
    w = r.standard_normal((2 * b, 2 * b))
    w = w + w.T
    h = house(r.standard_normal(b))
    H = np.eye(2 * b)
    H[b:, b:] = h.matrix()
    out = sweep_window_update(BulgeWorkspace(w.copy(), b, 2 * b), h).window
    assert np.linalg.norm(out - H @ w @ H) <= 10 * b * EPS * np.linalg.norm(w)


def test_window_first_elimination():
    n, b = 6, 2
    a = make_band(n, b, seed=4).to_dense()
    h = house(a[1:3, 0])
    out = sweep_window_update(BulgeWorkspace(a.copy(), 1, 3), h).window
    col = out[:, 0]
    assert np.all(np.abs(col[2:]) <= 10 * EPS * np.linalg.norm(a[:, 0]))
    # the bulge appears at distance b + 1 below the diagonal
    assert abs(out[4, 1]) > 0


def test_window_geometry_checked():
    with pytest.raises(AssertionError):
        BulgeWorkspace(np.zeros((4, 4)), 3, 6)
    with pytest.raises(AssertionError):
        sweep_window_update(BulgeWorkspace(np.zeros((4, 4)), 0, 2), house(np.ones(3)))


# --- work bound -----------------------------------------------------------------

def test_chase_flops_scale_as_n2_b():
    n = 2048
    bs = np.array([8, 16, 32])
    f = np.array([chase_flop_count(n, int(b)) for b in bs])
    c = np.sum(f * n * n * bs) / np.sum((n * n * bs) ** 2)
    assert np.all(np.abs(f / (c * n * n * bs) - 1) <= 0.25)
    assert np.all(f[1:] / f[:-1] <= 2.5)


def test_chase_flop_count_small_case():
    # n=4, b=2: sweep 0 has steps of length 2 then 1, sweep 1 one step of length 2
    # step(m=2): 3m + 4m^2 + 4m, plus 4m per extra column/row touched
    assert chase_flop_count(4, 2) == (6 + 16 + 8 + 8) + (6 + 16 + 8)
