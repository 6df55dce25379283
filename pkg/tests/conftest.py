import pathlib

import numpy as np
import pytest

from irhlb.sparse import SparseMatrix

FIXTURES = pathlib.Path(__file__).parent / "fixtures"
EPS = np.finfo(float).eps


def dense_of(A: SparseMatrix) -> np.ndarray:
    """Dense expansion built entry by entry, independent of the product kernels."""
    D = np.zeros(A.shape)
    for i, j, v in A.entries():
        D[i, j] = v
    return D


def random_sparse(rng, M, N, density=0.3):
    mask = rng.random((M, N)) < density
    vals = rng.standard_normal((M, N)) * mask
    return SparseMatrix.from_dense(vals)


def random_sparse_coo(rng, M, N, nnz):
    """Fast sparse generator for larger shapes (unique coordinates)."""
    keys = rng.choice(M * N, size=nnz, replace=False)
    return SparseMatrix((M, N), keys // N, keys % N, rng.standard_normal(nnz))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def fixtures_dir():
    return FIXTURES


def orthonormal_columns(rng, n, k):
    Q, _ = np.linalg.qr(rng.standard_normal((n, k)))
    return Q


def synthetic_factorization(rng, M, N, m, alphas=None, betas=None, beta=None):
    """Exact factorization for A = P B Q^T + beta P e_m q_{m+1}^T.

    Returns the dense A and a matching BidiagFactorization, built without the
    Lanczos recurrence.
    """
    from irhlb.bidiag import BidiagFactorization

    alphas = rng.uniform(0.2, 2.0, m) if alphas is None else np.asarray(alphas, float)
    betas = rng.uniform(0.2, 2.0, m - 1) if betas is None else np.asarray(betas, float)
    beta = float(rng.uniform(0.1, 1.0)) if beta is None else float(beta)
    P = orthonormal_columns(rng, M, m)
    Qx = orthonormal_columns(rng, N, m + 1)
    Q, q_next = Qx[:, :m], Qx[:, m]
    B = np.diag(alphas) + np.diag(betas, 1)
    A = P @ B @ Q.T + beta * np.outer(P[:, -1], q_next)
    fact = BidiagFactorization(P=P, Q=Q, alphas=alphas, betas=betas,
                               beta_residual=beta, q_next=q_next)
    return A, fact


def augmented(A, tau):
    M, N = A.shape
    At = np.zeros((M + N, M + N))
    At[:M, M:] = A
    At[M:, :M] = A.T
    return At - tau * np.eye(M + N)
