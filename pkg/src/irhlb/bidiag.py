"""Golub-Kahan-Lanczos bidiagonalization with one-sided reorthogonalization.

After ``j`` steps the factorization satisfies::

    A Q_j   = P_j B_j
    A^T P_j = Q_j B_j^T + beta_j q_{j+1} e_j^T

with ``B_j`` upper bidiagonal. Only the right vectors ``Q`` are
reorthogonalized (classical Gram-Schmidt, two passes).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import BreakdownError
from .sparse import MatvecCounter, SparseMatrix, matvec, matvec_transpose

BREAKDOWN_TOL = 1e-14

__all__ = ["BidiagFactorization", "start", "extend", "random_orthogonal_unit"]


@dataclass
class BidiagFactorization:
    P: np.ndarray  # M x j
    Q: np.ndarray  # N x j
    alphas: np.ndarray  # length j
    betas: np.ndarray  # length j - 1
    beta_residual: float
    q_next: np.ndarray  # length N; zero when exhausted
    exhausted: bool = False
    breakdowns: int = 0
    events: list = field(default_factory=list)

    @property
    def steps(self) -> int:
        return self.alphas.size

    def B(self) -> np.ndarray:
        """Dense copy of the upper bidiagonal ``B_j``."""
        return np.diag(self.alphas) + np.diag(self.betas, 1)

    def copy(self) -> "BidiagFactorization":
        return BidiagFactorization(
            self.P.copy(), self.Q.copy(), self.alphas.copy(), self.betas.copy(),
            float(self.beta_residual), self.q_next.copy(), self.exhausted,
            self.breakdowns, list(self.events),
        )


def _cgs2(V: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Orthogonalize ``r`` against the columns of ``V``; twice is enough."""
    if V.shape[1] == 0:
        return r
    r = r - V @ (V.T @ r)
    return r - V @ (V.T @ r)


def random_orthogonal_unit(V: np.ndarray, rng: np.random.Generator) -> np.ndarray | None:
    """Random unit vector orthogonal to the columns of ``V``.

    Returns None when ``V`` already spans the whole space.
    """
    n, k = V.shape
    if k >= n:
        return None
    for _ in range(5):
        w = _cgs2(V, rng.uniform(-1.0, 1.0, n))
        nw = np.linalg.norm(w)
        if nw > 1e-8:
            w = _cgs2(V, w / nw)
            return w / np.linalg.norm(w)
    return None


def _close_step(fact_Q: np.ndarray, r: np.ndarray, anorm: float, rng, events: list, step: int):
    """Turn the reorthogonalized residual into (beta, q_next, exhausted, broke)."""
    beta = float(np.linalg.norm(r))
    if beta > BREAKDOWN_TOL * anorm:
        return beta, r / beta, False, False
    events.append(("right", step))
    if rng is None:
        rng = np.random.default_rng(0)
    q = random_orthogonal_unit(fact_Q, rng)
    if q is None:
        return beta, np.zeros(fact_Q.shape[0]), True, True
    return beta, q, False, True


def start(A: SparseMatrix, q1, counter: MatvecCounter | None = None,
          rng: np.random.Generator | None = None) -> BidiagFactorization:
    """One bidiagonalization step from the unit vector ``q1``."""
    q1 = np.asarray(q1, dtype=np.float64)
    if q1.shape != (A.shape[1],):
        raise ValueError(f"starting vector must have length {A.shape[1]}")
    nq = np.linalg.norm(q1)
    if abs(nq - 1.0) > 1e-12:
        raise ValueError(f"starting vector must be unit norm (got {nq!r})")
    anorm = A.norm1
    p = matvec(A, q1, counter)
    alpha = float(np.linalg.norm(p))
    if alpha <= BREAKDOWN_TOL * anorm:
        raise BreakdownError("starting vector lies in the null space of A")
    p /= alpha
    Q = q1[:, None].copy()
    r = _cgs2(Q, matvec_transpose(A, p) - alpha * q1)
    events: list = []
    beta, q_next, exhausted, broke = _close_step(Q, r, anorm, rng, events, 1)
    return BidiagFactorization(
        P=p[:, None], Q=Q, alphas=np.array([alpha]), betas=np.zeros(0),
        beta_residual=beta, q_next=q_next, exhausted=exhausted,
        breakdowns=int(broke), events=events,
    )


def extend(A: SparseMatrix, fact: BidiagFactorization, target_steps: int,
           counter: MatvecCounter | None = None,
           rng: np.random.Generator | None = None) -> BidiagFactorization:
    """Run the recurrence until the factorization has ``target_steps`` steps.

    The input factorization is not modified.
    """
    j0 = fact.steps
    if target_steps < j0:
        raise ValueError("cannot extend to fewer steps than already present")
    if target_steps > min(A.shape):
        raise ValueError("target_steps exceeds min(M, N)")
    if target_steps == j0:
        return fact.copy()
    if fact.exhausted:
        raise ValueError("factorization already spans the full space")

    M, N = A.shape
    anorm = A.norm1
    P = np.empty((M, target_steps))
    Q = np.empty((N, target_steps))
    P[:, :j0] = fact.P
    Q[:, :j0] = fact.Q
    alphas = np.empty(target_steps)
    alphas[:j0] = fact.alphas
    betas = np.empty(target_steps - 1)
    betas[: j0 - 1] = fact.betas
    beta = fact.beta_residual
    q = fact.q_next
    events = list(fact.events)
    breakdowns = fact.breakdowns
    exhausted = False

    for j in range(j0, target_steps):
        Q[:, j] = q
        betas[j - 1] = beta
        p = matvec(A, q, counter) - beta * P[:, j - 1]
        alpha = float(np.linalg.norm(p))
        if alpha > BREAKDOWN_TOL * anorm:
            p /= alpha
        else:
            events.append(("left", j + 1))
            breakdowns += 1
            p = random_orthogonal_unit(P[:, :j], rng if rng is not None else np.random.default_rng(0))
            if p is None:
                p = np.zeros(M)
        P[:, j] = p
        alphas[j] = alpha
        r = _cgs2(Q[:, : j + 1], matvec_transpose(A, p) - alpha * q)
        beta, q, exhausted, broke = _close_step(Q[:, : j + 1], r, anorm, rng, events, j + 1)
        breakdowns += int(broke)

    return BidiagFactorization(
        P=P, Q=Q, alphas=alphas, betas=betas, beta_residual=beta, q_next=q,
        exhausted=exhausted, breakdowns=breakdowns, events=events,
    )
