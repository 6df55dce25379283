"""Small dense kernels: rotations, Cholesky, a symmetric eigensolver and the
shifted bidiagonal QR step.

Problem sizes here are at most a couple of hundred, so everything is written
directly on top of numpy arrays without LAPACK. ``jacobi_svd`` exists as an
independent reference for tests and is not used by the solver.
"""

from __future__ import annotations

import math

import numpy as np

from .exceptions import ConvergenceFailure, NotPositiveDefiniteError

EPS = np.finfo(np.float64).eps

__all__ = [
    "givens",
    "sym_eig",
    "cholesky",
    "solve_lower",
    "solve_lower_transpose",
    "jacobi_svd",
    "bidiag_qr_step",
]


def givens(a: float, b: float) -> tuple[float, float, float]:
    """Return ``(c, s, r)`` with ``c*a - s*b = r`` and ``s*a + c*b = 0``.

    That is, ``[[c, s], [-s, c]].T @ (a, b) == (r, 0)``. ``r >= 0``.
    """
    if b == 0.0:
        if a == 0.0:
            return 1.0, 0.0, 0.0
        return (1.0, 0.0, a) if a > 0 else (-1.0, 0.0, -a)
    r = math.hypot(a, b)
    return a / r, -b / r, r


def _check_symmetric(S: np.ndarray, rtol: float = 1e-12) -> None:
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError("expected a square matrix")
    scale = np.abs(S).max() if S.size else 0.0
    if np.abs(S - S.T).max(initial=0.0) > rtol * max(scale, np.finfo(float).tiny):
        raise ValueError("matrix is not symmetric to working tolerance")


def _tridiagonalize(S: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Householder reduction ``S = Z T Z.T``; returns diag, subdiag, Z."""
    n = S.shape[0]
    A = S.astype(np.float64, copy=True)
    Z = np.eye(n)
    for k in range(n - 2):
        x = A[k + 1:, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        v = x.copy()
        v[0] += math.copysign(alpha, x[0])
        vnorm2 = v @ v
        if vnorm2 == 0.0:
            continue
        beta = 2.0 / vnorm2
        # two-sided update of the trailing block with H = I - beta v v^T
        A22 = A[k + 1:, k + 1:]
        p = beta * (A22 @ v)
        w = p - (0.5 * beta * (p @ v)) * v
        A22 -= np.outer(v, w) + np.outer(w, v)
        A[k + 1, k] = A[k, k + 1] = -math.copysign(alpha, x[0])
        A[k + 2:, k] = 0.0
        A[k, k + 2:] = 0.0
        Zk = Z[:, k + 1:]
        Zk -= beta * np.outer(Zk @ v, v)
    d = np.diag(A).copy()
    e = np.zeros(n)
    if n > 1:
        e[: n - 1] = np.diag(A, -1)
    return d, e, Z


def _tridiagonal_ql(d: np.ndarray, e: np.ndarray, Z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Implicit-shift QL on the tridiagonal (d, e) accumulating into Z.

    ``e[i]`` couples rows i and i+1; ``e[n-1]`` is ignored.
    """
    n = d.size
    d = d.copy()
    e = e.copy()
    zt = np.ascontiguousarray(Z.T)  # rows of zt are eigenvector columns
    budget = 30 * n
    for l in range(n):
        iters = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= EPS * dd:
                    break
                m += 1
            if m == l:
                break
            iters += 1
            if iters > budget:
                raise ConvergenceFailure("tridiagonal QL did not converge")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                zi = zt[i]
                zi1 = zt[i + 1]
                tmp = zi1.copy()
                zi1 *= c
                zi1 += s * zi
                zi *= c
                zi -= s * tmp
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return d, zt.T


def sym_eig(S) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a symmetric matrix.

    Returns eigenvalues in ascending order and the orthogonal matrix whose
    columns are the matching eigenvectors.
    """
    S = np.asarray(S, dtype=np.float64)
    _check_symmetric(S)
    n = S.shape[0]
    if n == 0:
        return np.zeros(0), np.zeros((0, 0))
    if n == 1:
        return S[0].copy(), np.ones((1, 1))
    d, e, Z = _tridiagonalize(0.5 * (S + S.T))
    lam, V = _tridiagonal_ql(d, e, Z)
    order = np.argsort(lam, kind="stable")
    return lam[order], np.ascontiguousarray(V[:, order])


def cholesky(S) -> np.ndarray:
    """Lower-triangular ``L`` with ``L @ L.T == S``.

    Raises ``NotPositiveDefiniteError`` when a pivot drops to
    ``n * eps * max(diag(S))`` or below.
    """
    S = np.asarray(S, dtype=np.float64)
    n = S.shape[0]
    if S.shape != (n, n):
        raise ValueError("expected a square matrix")
    L = np.zeros_like(S)
    floor = n * EPS * max(float(np.max(np.diag(S), initial=0.0)), 0.0)
    for j in range(n):
        Lj = L[j, :j]
        pivot = S[j, j] - Lj @ Lj
        if not pivot > floor:
            raise NotPositiveDefiniteError(f"non-positive pivot {pivot:.3e} at column {j}")
        ljj = math.sqrt(pivot)
        L[j, j] = ljj
        if j + 1 < n:
            L[j + 1:, j] = (S[j + 1:, j] - L[j + 1:, :j] @ Lj) / ljj
    return L


def solve_lower(L: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Forward substitution for ``L X = B`` (``B`` vector or matrix)."""
    X = np.array(B, dtype=np.float64, copy=True)
    n = L.shape[0]
    for i in range(n):
        if i:
            X[i] -= L[i, :i] @ X[:i]
        X[i] /= L[i, i]
    return X


def solve_lower_transpose(L: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Back substitution for ``L.T X = B``."""
    X = np.array(B, dtype=np.float64, copy=True)
    n = L.shape[0]
    for i in range(n - 1, -1, -1):
        if i + 1 < n:
            X[i] -= L[i + 1:, i] @ X[i + 1:]
        X[i] /= L[i, i]
    return X


def _complete_basis(U: np.ndarray, good: np.ndarray) -> np.ndarray:
    """Replace columns of U not flagged ``good`` with an orthonormal completion."""
    U = U.copy()
    rows = U.shape[0]
    basis = [U[:, j] for j in range(U.shape[1]) if good[j]]
    candidates = iter(np.eye(rows))
    for j in range(U.shape[1]):
        if good[j]:
            continue
        for cand in candidates:
            w = cand.copy()
            for _ in range(2):
                for b in basis:
                    w -= (b @ w) * b
            nw = np.linalg.norm(w)
            if nw > 0.5:
                U[:, j] = w / nw
                basis.append(U[:, j])
                break
    return U


def jacobi_svd(D, max_sweeps: int = 80) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One-sided (Hestenes) Jacobi SVD: ``D = U @ diag(s) @ V.T``.

    Singular values come back in descending order. Wide inputs are handled by
    transposing.
    """
    D = np.asarray(D, dtype=np.float64)
    if D.shape[0] < D.shape[1]:
        U, s, V = jacobi_svd(D.T, max_sweeps)
        return V, s, U
    rows, cols = D.shape
    W = D.copy()
    V = np.eye(cols)
    for _ in range(max_sweeps):
        rotated = False
        for p in range(cols - 1):
            for q in range(p + 1, cols):
                wp, wq = W[:, p], W[:, q]
                alpha = wp @ wp
                beta = wq @ wq
                gamma = wp @ wq
                if gamma == 0.0 or abs(gamma) <= EPS * math.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                tmp = wp.copy()
                W[:, p] = c * tmp - s * wq
                W[:, q] = s * tmp + c * wq
                vp = V[:, p].copy()
                V[:, p] = c * vp - s * V[:, q]
                V[:, q] = s * vp + c * V[:, q]
        if not rotated:
            break
    else:
        raise ConvergenceFailure("Jacobi SVD sweep budget exceeded")
    sv = np.linalg.norm(W, axis=0)
    order = np.argsort(-sv, kind="stable")
    sv, W, V = sv[order], W[:, order], V[:, order]
    good = sv > EPS * max(sv.max(initial=0.0), np.finfo(float).tiny) * max(rows, cols)
    U = np.zeros_like(W)
    U[:, good] = W[:, good] / sv[good]
    if not good.all():
        U = _complete_basis(U, good)
    return U, sv, V


def bidiag_qr_step(alphas, betas, mu: float, Pt=None, Qt=None):
    """One implicit-shift QR step on ``B^T B - mu^2 I`` for upper bidiagonal B.

    ``alphas`` is the diagonal (length m), ``betas`` the superdiagonal
    (length m-1). Left rotations are accumulated into ``Pt`` and right
    rotations into ``Qt`` (identity when omitted) so that the returned
    bidiagonal equals ``Pt_new.T @ B @ Qt_new`` when both start as identity.

    Returns ``(alphas, betas, Pt, Qt)`` as new arrays.
    """
    d = np.array(alphas, dtype=np.float64, copy=True)
    e = np.array(betas, dtype=np.float64, copy=True)
    m = d.size
    if m < 2:
        raise ValueError("bidiag_qr_step needs at least a 2x2 bidiagonal")
    if e.size != m - 1:
        raise ValueError("betas must have length len(alphas) - 1")
    Pt = np.eye(m) if Pt is None else np.array(Pt, dtype=np.float64, copy=True)
    Qt = np.eye(m) if Qt is None else np.array(Qt, dtype=np.float64, copy=True)
    # column-pair updates on the transposes are row operations on contiguous memory
    Pr = np.ascontiguousarray(Pt.T)
    Qr = np.ascontiguousarray(Qt.T)

    y = (d[0] - mu) * (d[0] + mu)
    z = d[0] * e[0]
    for k in range(m - 1):
        # right rotation on columns (k, k+1)
        c, s, r = givens(y, z)
        if k > 0:
            e[k - 1] = r
        dk, ek = d[k], e[k]
        d[k] = c * dk - s * ek
        e[k] = s * dk + c * ek
        bulge = -s * d[k + 1]
        d[k + 1] = c * d[k + 1]
        qa, qb = Qr[k], Qr[k + 1]
        tmp = qa.copy()
        qa *= c
        qa -= s * qb
        qb *= c
        qb += s * tmp

        # left rotation on rows (k, k+1) removes the subdiagonal bulge
        c, s, r = givens(d[k], bulge)
        d[k] = r
        ek, dk1 = e[k], d[k + 1]
        e[k] = c * ek - s * dk1
        d[k + 1] = s * ek + c * dk1
        if k < m - 2:
            z = -s * e[k + 1]
            e[k + 1] = c * e[k + 1]
            y = e[k]
        pa, pb = Pr[k], Pr[k + 1]
        tmp = pa.copy()
        pa *= c
        pa -= s * pb
        pb *= c
        pb += s * tmp
    return d, e, np.ascontiguousarray(Pr.T), np.ascontiguousarray(Qr.T)
