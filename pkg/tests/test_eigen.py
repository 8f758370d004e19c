import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from thinmax.eigen import (
    EigenError,
    EigenResult,
    SolveOptions,
    dense_cap,
    dump_matrix,
    residual_check,
    solve_lowest,
)


def p1_interval(n):
    """P1 stiffness/consistent mass on (0, 1) with Dirichlet ends, ``n`` elements."""
    h = 1.0 / n
    m = n - 1
    K = sp.diags([-np.ones(m - 1), 2 * np.ones(m), -np.ones(m - 1)], [-1, 0, 1]) / h
    M = sp.diags([np.ones(m - 1), 4 * np.ones(m), np.ones(m - 1)], [-1, 0, 1]) * h / 6
    return K.tocsr(), M.tocsr()


def test_diagonal_example():
    res = solve_lowest(np.diag([0.0, 1.0, 4.0]), np.eye(3), 3)
    np.testing.assert_allclose(res.eigenvalues, [0, 1, 4], atol=1e-14)
    assert res.kernel_dim == 1
    assert residual_check(np.diag([0.0, 1.0, 4.0]), np.eye(3), res) <= 1e-12


def test_interval_first_eigenvalue():
    K, M = p1_interval(200)
    res = solve_lowest(K, M, 3)
    assert res.eigenvalues[0] == pytest.approx(np.pi**2, rel=1e-3)
    assert res.eigenvalues[1] == pytest.approx(4 * np.pi**2, rel=1e-3)
    assert np.all(res.residuals <= 1e-8 * res.eigenvalues.max())
    assert residual_check(K, M, res) <= 1e-8 * res.eigenvalues.max()


def test_m_orthonormal():
    K, M = p1_interval(40)
    res = solve_lowest(K, M, 5)
    G = res.eigenvectors.T @ (M @ res.eigenvectors)
    np.testing.assert_allclose(G, np.eye(5), atol=1e-10)


def test_zero_row_gives_kernel():
    K = np.diag([0.0, 2.0, 3.0, 5.0])
    res = solve_lowest(K, np.eye(4), 2)
    assert res.kernel_dim >= 1


def test_shift_invert_matches_dense():
    K, M = p1_interval(300)
    dense = solve_lowest(K, M, 6)
    si = solve_lowest(K, M, 6, SolveOptions(mode="shift_invert", sigma=1.0))
    np.testing.assert_allclose(si.eigenvalues, dense.eigenvalues, rtol=1e-7)


def test_errors():
    K, M = p1_interval(10)
    with pytest.raises(EigenError):
        solve_lowest(K, M, 100)
    with pytest.raises(EigenError):
        solve_lowest(K, M[:3, :3], 1)
    with pytest.raises(EigenError):
        solve_lowest(K, -M.toarray(), 2)  # not positive definite
    with pytest.raises(EigenError):
        solve_lowest(np.array([[1.0, 2.0], [0.0, 1.0]]), np.eye(2), 1)
    with pytest.raises(EigenError):
        solve_lowest(K, M, 2, SolveOptions(mode="shift_invert"))
    with pytest.raises(EigenError):
        solve_lowest(K, M, 2, SolveOptions(mode="lobpcg"))
    with pytest.raises(EigenError):
        solve_lowest(K, M, 2, SolveOptions(dense_cap=3))


def test_dense_cap_env(monkeypatch):
    monkeypatch.setenv("THINMAX_DENSE_CAP", "5")
    assert dense_cap() == 5
    K, M = p1_interval(10)
    with pytest.raises(EigenError, match="cap"):
        solve_lowest(K, M, 2)
    monkeypatch.setenv("THINMAX_DENSE_CAP", "many")
    with pytest.raises(EigenError):
        dense_cap()


def test_residual_check_detects_bad_pair():
    K, M = p1_interval(20)
    res = solve_lowest(K, M, 2)
    bad = EigenResult(res.eigenvalues + 1.0, res.eigenvectors, res.residuals, 0, 0.0)
    assert residual_check(K, M, bad) > 1e-3
    zero = EigenResult(res.eigenvalues, np.zeros_like(res.eigenvectors), res.residuals, 0, 0.0)
    with pytest.raises(EigenError):
        residual_check(K, M, zero)


def test_dump_matrix(tmp_path):
    K, _ = p1_interval(5)
    dump_matrix(K, tmp_path / "k.mtx")
    assert (tmp_path / "k.mtx").read_text().startswith("%%MatrixMarket")


@settings(max_examples=20, deadline=None)
@given(st.permutations(list(range(9))))
def test_permutation_invariance(perm):
    K, M = p1_interval(10)
    P = np.eye(9)[list(perm)]
    a = solve_lowest(K, M, 9).eigenvalues
    b = solve_lowest(P @ K.toarray() @ P.T, P @ M.toarray() @ P.T, 9).eigenvalues
    np.testing.assert_allclose(a, b, rtol=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.sampled_from([-1.0, 1.0]), min_size=9, max_size=9))
def test_sign_flip_invariance(signs):
    K, M = p1_interval(10)
    S = np.diag(signs)
    a = solve_lowest(K, M, 9).eigenvalues
    b = solve_lowest(S @ K.toarray() @ S, S @ M.toarray() @ S, 9).eigenvalues
    np.testing.assert_allclose(a, b, rtol=1e-10)
