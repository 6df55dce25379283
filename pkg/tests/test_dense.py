import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from irhlb.dense import (
    bidiag_qr_step,
    cholesky,
    givens,
    jacobi_svd,
    solve_lower,
    solve_lower_transpose,
    sym_eig,
)
from irhlb.exceptions import NotPositiveDefiniteError

from conftest import EPS


def bidiag(a, b):
    return np.diag(a) + np.diag(b, 1)


def householder_orthogonal(rng, n, count=3):
    Q = np.eye(n)
    for _ in range(count):
        v = rng.standard_normal(n)
        v /= np.linalg.norm(v)
        Q -= 2.0 * np.outer(Q @ v, v)
    return Q


def eig_by_jacobi(S):
    """Eigenvalues of symmetric S via singular values of the shifted SPD matrix."""
    c = np.abs(S).sum(axis=1).max() + 1.0
    _, s, _ = jacobi_svd(S + c * np.eye(S.shape[0]))
    return np.sort(s - c)


class TestGivens:
    @pytest.mark.parametrize("a, b", [(1.0, 0.0), (0.0, 1.0), (3.0, 4.0), (-2.0, 0.5), (1e300, 1e300), (1e-300, -3e-300)])
    def test_annihilates(self, a, b):
        c, s, r = givens(a, b)
        assert abs(c * c + s * s - 1.0) <= 1e-14
        G = np.array([[c, s], [-s, c]])
        out = G.T @ np.array([a, b])
        assert abs(out[1]) <= 1e-15 * max(abs(a), abs(b))
        assert out[0] == pytest.approx(r, rel=1e-15)
        assert abs(r) == pytest.approx(np.hypot(a, b), rel=1e-15)

    def test_identity_cases(self):
        assert givens(1.0, 0.0) == (1.0, 0.0, 1.0)
        assert givens(0.0, 0.0) == (1.0, 0.0, 0.0)
        c, s, r = givens(3.0, 4.0)
        assert r == 5.0


class TestSymEig:
    def test_diag(self):
        lam, V = sym_eig(np.diag([2.0, -1.0]))
        np.testing.assert_array_equal(lam, [-1.0, 2.0])
        np.testing.assert_allclose(np.abs(V), [[0.0, 1.0], [1.0, 0.0]], atol=1e-15)

    def test_swap(self):
        lam, _ = sym_eig([[0.0, 1.0], [1.0, 0.0]])
        np.testing.assert_allclose(lam, [-1.0, 1.0], atol=1e-15)

    def test_random_12_against_jacobi(self, rng):
        S = rng.standard_normal((12, 12))
        S = S + S.T
        lam, V = sym_eig(S)
        ref = eig_by_jacobi(S)
        np.testing.assert_allclose(lam, ref, rtol=1e-12, atol=1e-12 * np.abs(ref).max())

    @pytest.mark.parametrize("n", [1, 2, 3, 7, 30, 64])
    def test_residual_and_orthogonality(self, rng, n):
        S = rng.standard_normal((n, n))
        S = S + S.T
        lam, V = sym_eig(S)
        norm = np.linalg.norm(S, 2)
        assert np.all(np.diff(lam) >= 0)
        assert np.abs(S @ V - V * lam).max() <= 10 * n * EPS * norm
        assert np.abs(V.T @ V - np.eye(n)).max() <= 10 * n * EPS

    def test_clustered_and_zero(self):
        S = np.zeros((5, 5))
        lam, V = sym_eig(S)
        np.testing.assert_array_equal(lam, np.zeros(5))
        S = np.diag([1.0, 1.0, 1.0 + 1e-15, 2.0])
        lam, V = sym_eig(S)
        np.testing.assert_allclose(lam, np.diag(S), atol=1e-15)

    def test_rejects_nonsymmetric(self):
        with pytest.raises(ValueError):
            sym_eig([[1.0, 2.0], [0.0, 1.0]])


class TestCholesky:
    def test_identity(self):
        np.testing.assert_array_equal(cholesky(np.eye(4)), np.eye(4))

    def test_hand_case(self):
        np.testing.assert_allclose(cholesky([[4.0, 2.0], [2.0, 5.0]]), [[2.0, 0.0], [1.0, 2.0]], atol=1e-15)

    def test_gram_reconstruction(self, rng):
        G = rng.standard_normal((9, 6))
        S = G.T @ G
        L = cholesky(S)
        assert np.all(np.diag(L) > 0)
        np.testing.assert_array_equal(L, np.tril(L))
        assert np.abs(L @ L.T - S).max() <= 1e-13 * np.abs(S).max()

    @pytest.mark.parametrize("S", [[[1.0, 2.0], [2.0, 1.0]], [[1.0, 1.0], [1.0, 1.0]], [[0.0, 0.0], [0.0, 1.0]]])
    def test_not_positive_definite(self, S):
        with pytest.raises(NotPositiveDefiniteError):
            cholesky(S)

    def test_triangular_solves(self, rng):
        L = np.tril(rng.standard_normal((6, 6))) + 6 * np.eye(6)
        B = rng.standard_normal((6, 3))
        np.testing.assert_allclose(L @ solve_lower(L, B), B, atol=1e-13)
        np.testing.assert_allclose(L.T @ solve_lower_transpose(L, B), B, atol=1e-13)


class TestJacobiSVD:
    def test_diag(self):
        U, s, V = jacobi_svd(np.diag([3.0, 4.0]))
        np.testing.assert_allclose(s, [4.0, 3.0], atol=1e-15)

    def test_orthogonal(self, rng):
        Q = householder_orthogonal(rng, 5)
        _, s, _ = jacobi_svd(Q)
        np.testing.assert_allclose(s, np.ones(5), atol=1e-13)

    def test_random_8x5_cross_kernel(self, rng):
        D = rng.standard_normal((8, 5))
        U, s, V = jacobi_svd(D)
        norm = np.abs(D).max()
        assert np.abs(U * s @ V.T - D).max() <= 1e-12 * norm
        assert np.abs(U.T @ U - np.eye(5)).max() <= 1e-13
        assert np.abs(V.T @ V - np.eye(5)).max() <= 1e-13
        lam, _ = sym_eig(D.T @ D)
        np.testing.assert_allclose(np.sort(s**2), lam, rtol=1e-11)

    def test_wide_and_rank_deficient(self, rng):
        G = rng.standard_normal((3, 2))
        D = (G @ rng.standard_normal((2, 6)))  # 3x6 of rank 2
        U, s, V = jacobi_svd(D)
        assert U.shape == (3, 3) and V.shape == (6, 3)
        assert s[-1] <= 1e-13 * s[0]
        assert np.abs(U.T @ U - np.eye(3)).max() <= 1e-12
        assert np.abs(U * s @ V.T - D).max() <= 1e-12 * np.abs(D).max()


class TestBidiagQRStep:
    def test_perfect_shift_deflates(self, rng):
        a = rng.uniform(0.5, 2.0, 3)
        b = rng.uniform(0.5, 2.0, 2)
        B = bidiag(a, b)
        _, s, _ = jacobi_svd(B)
        for mu in s:
            d, e, P, Q = bidiag_qr_step(a, b, mu)
            assert abs(e[-1]) <= 1e-10 * np.linalg.norm(B, 2)
            assert abs(abs(d[-1]) - mu) <= 1e-10 * s[0]

    def test_zero_shift_on_deflated_diag(self):
        d, e, P, Q = bidiag_qr_step([1.0, 2.0], [0.0], 0.0)
        np.testing.assert_allclose(np.abs(d), [1.0, 2.0], atol=1e-15)
        assert abs(e[0]) <= 1e-15
        for X in (P, Q):
            np.testing.assert_allclose(np.abs(X), np.eye(2), atol=1e-15)

    def test_random_6x6(self, rng):
        a = rng.standard_normal(6)
        b = rng.standard_normal(5)
        B = bidiag(a, b)
        mu = abs(rng.standard_normal())
        d, e, P, Q = bidiag_qr_step(a, b, mu)
        Bn = bidiag(d, e)
        _, s0, _ = jacobi_svd(B)
        _, s1, _ = jacobi_svd(Bn)
        np.testing.assert_allclose(s1, s0, rtol=1e-12)
        assert np.abs(P.T @ B @ Q - Bn).max() <= 1e-12 * np.linalg.norm(B, 2)
        assert abs(np.linalg.norm(Bn) - np.linalg.norm(B)) <= 1e-13 * np.linalg.norm(B)

    def test_accumulators_compose(self, rng):
        a = rng.standard_normal(8)
        b = rng.standard_normal(7)
        B = bidiag(a, b)
        d, e, P, Q = a, b, None, None
        for mu in rng.uniform(0.0, 2.0, 5):
            d, e, P, Q = bidiag_qr_step(d, e, mu, P, Q)
        n = 8
        assert np.abs(P.T @ P - np.eye(n)).max() <= 100 * n * EPS
        assert np.abs(Q.T @ Q - np.eye(n)).max() <= 100 * n * EPS
        assert np.abs(P.T @ B @ Q - bidiag(d, e)).max() <= 1e-12 * np.linalg.norm(B, 2)

    def test_needs_two(self):
        with pytest.raises(ValueError):
            bidiag_qr_step([1.0], [], 0.5)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 12), st.floats(0.0, 3.0), st.integers(0, 2**32 - 1))
    def test_preserves_singular_values(self, m, mu, seed):
        r = np.random.default_rng(seed)
        a, b = r.standard_normal(m), r.standard_normal(m - 1)
        d, e, P, Q = bidiag_qr_step(a, b, mu)
        _, s0, _ = jacobi_svd(bidiag(a, b))
        _, s1, _ = jacobi_svd(bidiag(d, e))
        np.testing.assert_allclose(s1, s0, rtol=1e-11, atol=1e-13 * s0[0])
        assert np.abs(P.T @ P - np.eye(m)).max() <= 100 * m * EPS
