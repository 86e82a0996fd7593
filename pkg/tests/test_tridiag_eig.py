import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from evdkit.matrix import EPS, SymmetricMatrix, TridiagonalMatrix, make_symmetric
from evdkit.tridiag_eig import eig_qr, jacobi_oracle


def random_tridiag(n, seed):
    r = np.random.default_rng(seed)
    return TridiagonalMatrix(r.standard_normal(n), r.standard_normal(n - 1))


def test_diagonal_needs_no_iterations():
    res = eig_qr(TridiagonalMatrix([3.0, -1.0, 2.0], [0.0, 0.0]))
    assert np.array_equal(res.values, [-1.0, 2.0, 3.0])
    assert res.iterations == 0 and res.converged


def test_two_by_two():
    res = eig_qr(TridiagonalMatrix([2.0, 2.0], [1.0]))
    assert np.allclose(res.values, [1.0, 3.0], rtol=0, atol=4 * EPS)


def test_single_entry():
    assert eig_qr(TridiagonalMatrix([5.5], [])).values.tolist() == [5.5]


def test_random_matches_jacobi():
    t = random_tridiag(200, 1)
    ev = eig_qr(t).values
    ref = jacobi_oracle(t.to_dense()).values
    assert np.max(np.abs(ev - ref)) <= 1e-11 * t.norm()


def test_wilkinson_close_pair(frozen):
    # W21+ has its two largest eigenvalues agreeing to ~7e-14
    w = make_symmetric(21, dist="wilkinson").data
    t = TridiagonalMatrix(np.diag(w), np.diag(w, -1))
    ev = eig_qr(t).values
    ref = np.array(frozen["eigenvalues"]["wilkinson_21"])
    assert np.max(np.abs(ev - ref)) <= 1e-13 * t.norm()
    assert ev[-1] == pytest.approx(10.746194182903393, abs=1e-13)


@pytest.mark.parametrize("case", ["gaussian_12_5", "uniform_20_9"])
def test_jacobi_against_frozen_high_precision(frozen, case):
    dist, n, seed = case.split("_")
    a = make_symmetric(int(n), int(seed), dist)
    ev = jacobi_oracle(a).values
    assert np.max(np.abs(ev - np.array(frozen["eigenvalues"][case]))) <= 1e-13 * a.norm()


def test_bad_tolerance():
    with pytest.raises(ValueError):
        eig_qr(TridiagonalMatrix([1.0, 2.0], [1.0]), tol=0.0)


def test_iteration_cap_reported():
    t = random_tridiag(50, 3)
    res = eig_qr(t, tol=1e-300)
    assert not res.converged
    assert res.iterations == 30 * 50


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 60), seed=st.integers(0, 10**6))
def test_conservation_and_order(n, seed):
    t = random_tridiag(n, seed)
    res = eig_qr(t)
    assert res.converged
    assert np.all(np.diff(res.values) >= 0)
    nf = t.norm()
    assert abs(res.values.sum() - t.d.sum()) <= 1e-10 * nf
    assert abs(np.sum(res.values**2) - nf**2) <= 1e-9 * nf**2


def test_deterministic():
    t = random_tridiag(80, 4)
    assert np.array_equal(eig_qr(t).values, eig_qr(t).values)


def test_graded_and_zero_entries():
    t = TridiagonalMatrix([1e10, 1.0, 1e-10, 0.0], [1e-3, 0.0, 1e-12])
    ev = eig_qr(t).values
    ref = np.linalg.eigvalsh(t.to_dense())
    assert np.max(np.abs(ev - ref)) <= 1e-15 * t.norm()


def test_jacobi_identity():
    assert np.array_equal(jacobi_oracle(SymmetricMatrix(np.eye(4))).values, np.ones(4))


def test_jacobi_two_by_two():
    res = jacobi_oracle(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(res.values, [-1.0, 1.0], rtol=0, atol=EPS)


def test_jacobi_within_gershgorin_discs():
    a = make_symmetric(64, 5, "gaussian").data
    ev = jacobi_oracle(a).values
    radii = np.sum(np.abs(a), axis=1) - np.abs(np.diag(a))
    lo, hi = np.diag(a) - radii, np.diag(a) + radii
    for lam in ev:
        assert np.any((lam >= lo - 1e-12) & (lam <= hi + 1e-12))


def test_jacobi_does_not_modify_input():
    a = make_symmetric(10, 1)
    before = a.data.copy()
    jacobi_oracle(a)
    assert np.array_equal(a.data, before)
