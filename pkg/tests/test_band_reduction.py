import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from evdkit.band_reduction import DbrConfig, dbr, recursive_panel_schedule, sbr, tridiag_direct
from evdkit.bulge import chase_serial
from evdkit.flops import FlopCounter, flop_model
from evdkit.matrix import EPS, SymmetricMatrix, TridiagonalMatrix, make_band, make_symmetric, similarity_residual, tol_orth, trace
from evdkit.tridiag_eig import eig_qr, jacobi_oracle


def off_band_max(x, b):
    n = x.shape[0]
    i, j = np.indices((n, n))
    return float(np.max(np.abs(x[np.abs(i - j) > b]), initial=0.0))


# --- panel schedule -----------------------------------------------------------

def test_recursive_schedule_counts():
    assert recursive_panel_schedule(32, 256).k_histogram() == {32: 4, 64: 2, 128: 1}


def test_flat_schedule_counts():
    assert recursive_panel_schedule(32, 256, recursive=False).k_histogram() == {32: 7}


def test_single_panel_schedule_is_empty():
    assert recursive_panel_schedule(8, 8).tasks == ()
    assert recursive_panel_schedule(8, 8, recursive=False).tasks == ()


def test_schedule_rejects_bad_sizes():
    with pytest.raises(ValueError):
        recursive_panel_schedule(16, 8)


@pytest.mark.parametrize("b,nb", [(32, 256), (4, 20), (3, 10), (5, 5), (1, 7)])
@pytest.mark.parametrize("recursive", [True, False])
def test_schedule_events_are_causal(b, nb, recursive):
    sched = recursive_panel_schedule(b, nb, recursive)
    p = sched.panels
    received = {t: set() for t in range(p)}
    factored = []
    for kind, item in sched.events():
        if kind == "factor":
            factored.append(item)
            # every earlier panel's factors have reached this panel
            assert received[item] == set(range(item))
        else:
            s0, s1 = item.source
            assert all(s in factored for s in range(s0, s1))
            for t in range(*item.target):
                assert t not in factored
                received[t].update(range(s0, s1))
    assert factored == list(range(p))


# --- dbr / sbr ------------------------------------------------------------------

def test_diagonal_input_passes_through():
    d = np.arange(1.0, 11.0)
    a = SymmetricMatrix(np.diag(d))
    bm, q = dbr(a, DbrConfig(2, 4, accumulate_q=True))
    assert np.array_equal(bm.to_dense(), a.data)
    assert np.array_equal(q.q, np.eye(10))


def test_banded_input_keeps_band():
    band = make_band(40, 3, seed=4)
    a = SymmetricMatrix(band.to_dense())
    bm, q = dbr(a, DbrConfig(3, 9, accumulate_q=True))
    assert np.linalg.norm(bm.to_dense() - band.to_dense()) <= 100 * 40 * EPS * a.norm()
    assert similarity_residual(a, q, bm) <= 100 * 40 * EPS


def test_dbr_eigenvalues_match_oracle():
    a = make_symmetric(64, 11, "gaussian")
    bm, _ = dbr(a, DbrConfig(4, 8))
    ev_a = jacobi_oracle(a).values
    ev_b = jacobi_oracle(bm.to_dense()).values
    assert np.max(np.abs(ev_a - ev_b)) <= 1e-11 * a.norm()


@pytest.mark.parametrize("b", [1, 4, 8])
def test_sbr_is_dbr_with_nb_equal_b(b):
    a = make_symmetric(128, 2, "gaussian")
    b1, q1 = sbr(a, b, accumulate_q=True)
    b2, q2 = dbr(a, DbrConfig(b, b, accumulate_q=True))
    assert np.array_equal(b1.bands, b2.bands) and np.array_equal(q1.q, q2.q)


def test_sbr_and_dbr_share_spectrum():
    a = make_symmetric(64, 3, "gaussian")
    e1 = jacobi_oracle(sbr(a, 4)[0].to_dense()).values
    e2 = jacobi_oracle(dbr(a, DbrConfig(4, 16))[0].to_dense()).values
    assert np.max(np.abs(e1 - e2)) <= 1e-11 * a.norm()


def test_sbr_identity():
    bm, _ = sbr(SymmetricMatrix(np.eye(12)), 3)
    assert np.array_equal(bm.to_dense(), np.eye(12))


def test_invalid_config():
    a = make_symmetric(16)
    for b, nb in [(0, 4), (5, 4), (4, 16), (4, 20)]:
        with pytest.raises(ValueError, match="invalid configuration"):
            dbr(a, DbrConfig(b, nb))


@pytest.mark.parametrize("n", [1, 2])
def test_tiny_inputs_pass_through(n):
    a = make_symmetric(n, 5)
    bm, q = dbr(a, DbrConfig(4, 8, accumulate_q=True))
    assert np.array_equal(bm.to_dense(), a.data)
    assert np.array_equal(q.q, np.eye(n))


@pytest.mark.parametrize("n", [64, 128])
@pytest.mark.parametrize("b,nb", [(4, 8), (4, 16), (8, 32), (5, 16), (3, 7)])
def test_bandwidth_postcondition(n, b, nb):
    a = make_symmetric(n, n + b, "gaussian")
    bm, q = dbr(a, DbrConfig(b, nb, accumulate_q=True))
    full = q.q.T @ a.data @ q.q
    assert off_band_max(full, b) <= 100 * n * EPS * a.norm()
    assert similarity_residual(a, q, bm) <= 100 * n * EPS
    assert q.orthogonality_error() <= tol_orth(n)


@pytest.mark.parametrize("b,nb", [(4, 8), (4, 16), (8, 32)])
def test_recursive_and_flat_schedules_agree(b, nb):
    a = make_symmetric(128, 17, "gaussian")
    br, _ = dbr(a, DbrConfig(b, nb, recursive_panels=True))
    bf, _ = dbr(a, DbrConfig(b, nb, recursive_panels=False))
    assert np.max(np.abs(br.bands - bf.bands)) <= 1e-12 * a.norm()


@settings(max_examples=60, deadline=None)
@given(n=st.integers(3, 40), b=st.integers(1, 12), nb=st.integers(1, 40), rec=st.booleans(), seed=st.integers(0, 10**6))
def test_dbr_any_geometry(n, b, nb, rec, seed):
    b = min(b, n - 1)
    nb = min(max(nb, b), n - 1)
    if b > nb:
        return
    a = make_symmetric(n, seed, "uniform")
    bm, q = dbr(a, DbrConfig(b, nb, accumulate_q=True, recursive_panels=rec))
    assert similarity_residual(a, q, bm) <= 100 * n * EPS
    assert q.orthogonality_error() <= tol_orth(n)
    assert off_band_max(q.q.T @ a.data @ q.q, b) <= 100 * n * EPS * a.norm()


def test_dbr_conserves_trace():
    a = make_symmetric(200, 8, "gaussian")
    bm, _ = dbr(a, DbrConfig(6, 30))
    assert abs(trace(a) - trace(bm)) <= 1e-10 * a.norm()


def test_dbr_result_independent_of_workers():
    a = make_symmetric(300, 1, "gaussian")
    b1, _ = dbr(a, DbrConfig(8, 64), workers=1)
    b4, _ = dbr(a, DbrConfig(8, 64), workers=4)
    assert np.array_equal(b1.bands, b4.bands)


# --- direct tridiagonalization ------------------------------------------------

def test_direct_keeps_tridiagonal_input():
    t = TridiagonalMatrix(np.linspace(-1, 1, 30), np.full(29, 0.3))
    a = SymmetricMatrix(t.to_dense())
    t2, q = tridiag_direct(a, accumulate_q=True)
    assert np.linalg.norm(t2.to_dense() - a.data) <= 100 * 30 * EPS * a.norm()
    assert similarity_residual(a, q, t2) <= 100 * 30 * EPS


def test_direct_identity():
    t, _ = tridiag_direct(SymmetricMatrix(np.eye(9)))
    assert np.array_equal(t.d, np.ones(9)) and np.array_equal(t.e, np.zeros(8))


@pytest.mark.parametrize("n,nb", [(1, 32), (2, 32), (3, 2), (50, 7), (130, 32)])
def test_direct_residual(n, nb):
    a = make_symmetric(n, n, "gaussian")
    t, q = tridiag_direct(a, accumulate_q=True, nb=nb)
    assert similarity_residual(a, q, t) <= 100 * n * EPS
    assert q.orthogonality_error() <= tol_orth(n)


def test_direct_agrees_with_two_stage():
    a = make_symmetric(96, 21, "gaussian")
    t1, _ = tridiag_direct(a)
    bm, _ = dbr(a, DbrConfig(4, 16))
    t2, _ = chase_serial(bm)
    e1, e2 = eig_qr(t1).values, eig_qr(t2).values
    assert np.max(np.abs(e1 - e2)) <= 1e-11 * a.norm()


# --- flop accounting ----------------------------------------------------------

def test_dbr_flops_match_model_when_nb_small():
    n = 2048
    cnt = FlopCounter()
    dbr(make_symmetric(n, 0), DbrConfig(4, 16), counter=cnt)
    assert abs(cnt.total / flop_model("dbr", n) - 1.0) <= 0.05


def test_dbr_flop_excess_is_order_n2_nb():
    # (counted - 4/3 n^3) / (n^2 nb) stays bounded as n grows at fixed nb
    ratios = []
    for n in (256, 512, 1024):
        cnt = FlopCounter()
        dbr(make_symmetric(n, 0), DbrConfig(16, 128), counter=cnt)
        ratios.append((cnt.total - flop_model("dbr", n)) / (n * n * 128))
    assert all(0 < r < 4 for r in ratios)
    assert max(ratios) / min(ratios) < 1.5
