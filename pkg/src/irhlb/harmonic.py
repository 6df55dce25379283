"""Harmonic Rayleigh-Ritz extraction from a bidiagonal factorization.

For a target ``tau`` the harmonic condition on span(blkdiag(P, Q)) leads to
the symmetric-definite pencil

    Bt z = nu Ct z,    nu = 1 / (theta - tau)

with ``Bt = [[-tau I, B], [B^T, -tau I]]`` and ``Ct`` the Gram matrix of
``(Atilde - tau I) blkdiag(P, Q)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bidiag import BidiagFactorization
from .dense import cholesky, solve_lower, solve_lower_transpose, sym_eig
from .exceptions import ExtractionEmptyError, NotPositiveDefiniteError, PencilDegenerateError

NU_FLOOR = 1e-12
SEMIDEFINITE_CUTOFF = 1e-12

__all__ = [
    "HarmonicPencil",
    "HarmonicApproximation",
    "build_pencil",
    "solve_pencil",
    "harmonic_approximations",
    "extract",
    "form_vectors",
    "conditioning_diagnostic",
]


@dataclass(frozen=True)
class HarmonicPencil:
    Btilde: np.ndarray
    Ctilde: np.ndarray
    tau: float


@dataclass
class HarmonicApproximation:
    theta: float
    rho: float
    x: np.ndarray
    y: np.ndarray
    residual_estimate: float


def _bidiag_products(alphas: np.ndarray, betas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``B B^T`` and ``B^T B`` as dense tridiagonals, built from the bands."""
    a2 = alphas * alphas
    b2 = betas * betas
    BBt = np.diag(a2 + np.append(b2, 0.0))
    BtB = np.diag(a2 + np.insert(b2, 0, 0.0))
    if betas.size:
        off_left = betas * alphas[1:]
        off_right = alphas[:-1] * betas
        BBt += np.diag(off_left, 1) + np.diag(off_left, -1)
        BtB += np.diag(off_right, 1) + np.diag(off_right, -1)
    return BBt, BtB


def build_pencil(alphas, betas, beta_residual: float, tau: float) -> HarmonicPencil:
    alphas = np.asarray(alphas, dtype=np.float64)
    betas = np.asarray(betas, dtype=np.float64)
    m = alphas.size
    if m < 1:
        raise ValueError("need at least one bidiagonalization step")
    if betas.size != m - 1:
        raise ValueError("betas must have length len(alphas) - 1")
    B = np.diag(alphas) + np.diag(betas, 1)
    I = np.eye(m)
    BBt, BtB = _bidiag_products(alphas, betas)
    BBt[m - 1, m - 1] += beta_residual * beta_residual

    Bt = np.block([[-tau * I, B], [B.T, -tau * I]])
    Ct = np.block([[tau * tau * I + BBt, -2.0 * tau * B], [-2.0 * tau * B.T, tau * tau * I + BtB]])
    return HarmonicPencil(Bt, Ct, float(tau))


def solve_pencil(pencil: HarmonicPencil) -> list[tuple[float, np.ndarray]]:
    """Solve ``Bt z = nu Ct z`` and return ``(theta, z)`` with ``theta = tau + 1/nu``.

    Directions with ``|nu| <= 1e-12 max|nu|`` (theta at infinity) are dropped.
    A semidefinite ``Ct`` is handled by restricting to its numerical range.
    """
    Bt, Ct, tau = pencil.Btilde, pencil.Ctilde, pencil.tau
    try:
        L = cholesky(Ct)
    except NotPositiveDefiniteError:
        lam, V = sym_eig(Ct)
        keep = lam > SEMIDEFINITE_CUTOFF * max(lam[-1], 0.0)
        if not keep.any():
            raise PencilDegenerateError("Ctilde has no numerically positive eigenvalue") from None
        W = V[:, keep] / np.sqrt(lam[keep])
        S = W.T @ Bt @ W
        nu, Y = sym_eig(0.5 * (S + S.T))
        Z = W @ Y
    else:
        X = solve_lower(L, Bt)  # L^{-1} Bt
        S = solve_lower(L, X.T)  # L^{-1} Bt L^{-T} (Bt symmetric)
        nu, Y = sym_eig(0.5 * (S + S.T))
        Z = solve_lower_transpose(L, Y)

    numax = np.abs(nu).max(initial=0.0)
    if numax == 0.0:
        raise PencilDegenerateError("pencil has no finite harmonic Ritz value")
    out = []
    for i in range(nu.size):
        if abs(nu[i]) > NU_FLOOR * numax:
            out.append((tau + 1.0 / nu[i], Z[:, i].copy()))
    return out


def _approximation(theta: float, z: np.ndarray, B: np.ndarray, beta_m: float,
                   use_theta: bool) -> HarmonicApproximation | None:
    m = B.shape[0]
    x, y = z[:m], z[m:]
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if nx == 0.0 or ny == 0.0:
        return None
    x = x / nx
    y = y / ny
    rho = float(x @ B @ y)
    value = theta if use_theta else rho
    left = B @ y - value * x
    right = B.T @ x - value * y
    est = np.sqrt(left @ left + right @ right + (beta_m * x[-1]) ** 2)
    return HarmonicApproximation(float(theta), rho, x, y, float(est))


def harmonic_approximations(fact: BidiagFactorization, tau: float, use_theta: bool = False):
    """All approximations from the current factorization.

    Returns ``(positive, negative_thetas)``: the positive-theta approximations
    sorted by ``|theta - tau|`` (ties by residual estimate), and the discarded
    negative theta values.
    """
    pencil = build_pencil(fact.alphas, fact.betas, fact.beta_residual, tau)
    pairs = solve_pencil(pencil)
    B = fact.B()
    positive, negative = [], []
    for theta, z in pairs:
        if theta > 0.0:
            approx = _approximation(theta, z, B, fact.beta_residual, use_theta)
            if approx is not None:
                positive.append(approx)
        else:
            negative.append(theta)
    positive.sort(key=lambda a: (abs(a.theta - tau), a.residual_estimate))
    return positive, negative


def extract(fact: BidiagFactorization, tau: float, want: int,
            use_theta: bool = False) -> list[HarmonicApproximation]:
    """The ``want`` approximations nearest ``tau``.

    ``use_theta`` swaps rho for theta in the residual estimate (debugging aid).
    """
    if want <= 0:
        return []
    positive, _ = harmonic_approximations(fact, tau, use_theta)
    if not positive:
        raise ExtractionEmptyError("no positive harmonic Ritz value")
    return positive[:want]


def form_vectors(fact: BidiagFactorization, approx: HarmonicApproximation) -> tuple[np.ndarray, np.ndarray]:
    return fact.P @ approx.x, fact.Q @ approx.y


def conditioning_diagnostic(pencil: HarmonicPencil) -> float:
    """``||Btilde^{-1}||``, or ``inf`` when Btilde is numerically singular."""
    lam, _ = sym_eig(pencil.Btilde)
    absl = np.abs(lam)
    scale = absl.max(initial=0.0)
    smallest = absl.min()
    if smallest < 1e-14 * scale or smallest == 0.0:
        return float("inf")
    return float(1.0 / smallest)
