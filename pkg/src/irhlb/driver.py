"""Implicitly restarted harmonic Lanczos bidiagonalization.

``solve`` computes the ``k`` singular triplets of a sparse matrix whose
singular values are nearest a target ``tau``.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import bidiag, harmonic, restart
from .exceptions import BreakdownError, ExtractionEmptyError, PencilDegenerateError
from .sparse import MatvecCounter, SparseMatrix, matvec, matvec_transpose

log = logging.getLogger(__name__)

__all__ = [
    "SolverConfig",
    "SingularTriplet",
    "RunStats",
    "SolverResult",
    "solve",
    "generate_test_matrix",
]

MAX_EMPTY_EXTRACTIONS = 3


@dataclass(frozen=True)
class SolverConfig:
    tau: float
    k: int
    m: int
    tol: float = 1e-6
    max_restarts: int = 2000
    seed: int = 0
    extras: int = 3
    relgap_threshold: float = 1e-3
    verbose: bool = False
    use_theta_estimate: bool = False

    def __post_init__(self):
        if not (isinstance(self.tau, (int, float)) and math.isfinite(self.tau)) or self.tau < 0:
            raise ValueError(f"tau must be a finite non-negative number, got {self.tau!r}")
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k!r}")
        if int(self.m) != self.m or self.m < self.k + 1:
            raise ValueError(f"m must be an integer >= k + 1 (got m={self.m!r}, k={self.k!r})")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol!r}")
        if self.max_restarts < 0:
            raise ValueError("max_restarts must be non-negative")
        if self.extras < 0:
            raise ValueError("extras must be non-negative")


@dataclass
class SingularTriplet:
    sigma: float
    u: np.ndarray
    v: np.ndarray
    residual: float


@dataclass
class RunStats:
    restarts: int = 0
    matvecs: int = 0
    wall_seconds: float = 0.0
    stopcrit: float = math.inf
    breakdown_events: int = 0
    shifts_replaced: int = 0
    verification_matvecs: int = 0
    fresh_starts: int = 0
    residual_history: list[list[float]] = field(default_factory=list)


@dataclass
class SolverResult:
    triplets: list[SingularTriplet]
    stats: RunStats
    converged: bool
    anorm: float = 0.0

    @property
    def sigma(self) -> np.ndarray:
        return np.array([t.sigma for t in self.triplets])

    @property
    def residuals(self) -> np.ndarray:
        return np.array([t.residual for t in self.triplets])


def _random_unit(n: int, rng: np.random.Generator) -> np.ndarray:
    q = rng.uniform(-1.0, 1.0, n)
    return q / np.linalg.norm(q)


def _verify(A: SparseMatrix, fact, approxs, counter: MatvecCounter):
    """Form the vectors and compute true residuals (one product with A each)."""
    triplets = []
    for a in approxs:
        u, v = harmonic.form_vectors(fact, a)
        u /= np.linalg.norm(u)
        v /= np.linalg.norm(v)
        sigma = a.rho
        Av = matvec(A, v, counter)
        Atu = matvec_transpose(A, u)
        res = math.sqrt(float(np.sum((Av - sigma * u) ** 2) + np.sum((Atu - sigma * v) ** 2)))
        if sigma < 0:
            sigma, u = -sigma, -u
        triplets.append(SingularTriplet(sigma, u, v, res))
    return triplets


def _fresh_start(A, counter, rng, stats):
    for _ in range(MAX_EMPTY_EXTRACTIONS):
        q1 = _random_unit(A.shape[1], rng)
        try:
            return bidiag.start(A, q1, counter, rng)
        except BreakdownError:
            stats.fresh_starts += 1
    raise BreakdownError("could not find a starting vector outside the null space of A")


def solve(A: SparseMatrix, config: SolverConfig) -> SolverResult:
    """Compute the ``config.k`` singular triplets nearest ``config.tau``.

    Wide matrices are handled through their transpose; the returned ``u`` and
    ``v`` always refer to the matrix passed in. All products with the working
    matrix are counted, including the ones spent verifying convergence.
    """
    M, N = A.shape
    if config.k >= min(M, N):
        raise ValueError(f"k={config.k} must be smaller than min(M, N)={min(M, N)}")
    transposed = M < N
    W = A.transpose() if transposed else A
    nmin = min(M, N)

    m = min(config.m, nmin)
    if m < config.k + 1:
        raise ValueError(f"subspace size {m} leaves no room for shifts with k={config.k}")
    extras = min(config.extras, m - config.k - 1)
    k, tau = config.k, float(config.tau)
    k_eff = k + extras
    anorm = W.norm1
    threshold = config.tol * anorm

    rng = np.random.default_rng(config.seed)
    counter = MatvecCounter()
    stats = RunStats()
    t0 = time.perf_counter()

    fact = _fresh_start(W, counter, rng, stats)
    empty_in_a_row = 0
    converged = False
    triplets: list[SingularTriplet] = []
    approxs: list[harmonic.HarmonicApproximation] = []

    while True:
        fact = bidiag.extend(W, fact, m, counter, rng)
        try:
            positive, negative = harmonic.harmonic_approximations(fact, tau, config.use_theta_estimate)
            if not positive:
                raise ExtractionEmptyError("no positive harmonic Ritz value")
        except (ExtractionEmptyError, PencilDegenerateError) as exc:
            empty_in_a_row += 1
            if empty_in_a_row >= MAX_EMPTY_EXTRACTIONS:
                raise ExtractionEmptyError(
                    f"harmonic extraction failed {empty_in_a_row} times in a row: {exc}"
                ) from exc
            stats.fresh_starts += 1
            fact = _fresh_start(W, counter, rng, stats)
            continue
        empty_in_a_row = 0

        approxs = positive[:k_eff]
        wanted = approxs[:k]
        history = [a.residual_estimate for a in wanted] + [math.nan] * (k - len(wanted))
        stats.residual_history.append(history)
        if config.verbose:
            pencil = harmonic.build_pencil(fact.alphas, fact.betas, fact.beta_residual, tau)
            log.info("restart %d: eps=%s cond(Btilde)=%.3e", stats.restarts,
                     ", ".join(f"{x:.3e}" for x in history),
                     harmonic.conditioning_diagnostic(pencil))

        if len(wanted) == k and all(a.residual_estimate < threshold for a in wanted):
            before = counter.count_A
            triplets = _verify(W, fact, wanted, counter)
            stats.verification_matvecs += counter.count_A - before
            stats.stopcrit = max(t.residual for t in triplets)
            if stats.stopcrit / anorm < config.tol:
                converged = True
                break

        if stats.restarts >= config.max_restarts:
            break

        p = m - k_eff
        shifts = restart.select_shifts(positive, k_eff, p, tau, negative)
        shifts = restart.adapt_shifts(
            shifts, [(a.rho, a.residual_estimate) for a in approxs], tau, positive,
            config.relgap_threshold,
        )
        stats.shifts_replaced += shifts.replaced_count
        fact = restart.implicit_restart(fact, shifts, anorm, rng)
        stats.restarts += 1

    if not converged:
        before = counter.count_A
        triplets = _verify(W, fact, approxs[:k], counter)
        stats.verification_matvecs += counter.count_A - before
        if triplets:
            stats.stopcrit = max(t.residual for t in triplets)

    triplets.sort(key=lambda t: abs(t.sigma - tau))
    if transposed:
        triplets = [SingularTriplet(t.sigma, t.v, t.u, t.residual) for t in triplets]
    stats.matvecs = counter.count_A
    stats.breakdown_events = fact.breakdowns
    stats.wall_seconds = time.perf_counter() - t0
    return SolverResult(triplets, stats, converged, anorm)


def _householder_vectors(n: int, count: int, rng: np.random.Generator) -> list[np.ndarray]:
    vs = []
    for _ in range(count):
        v = rng.standard_normal(n)
        vs.append(v / np.linalg.norm(v))
    return vs


def _apply_reflectors_left(X: np.ndarray, vs) -> np.ndarray:
    # (I - 2 v v^T) applied in reverse order gives H_1 H_2 ... H_c X
    for v in reversed(vs):
        X -= 2.0 * np.outer(v, v @ X)
    return X


def generate_test_matrix(M: int, N: int, sigma_values, seed: int,
                         reflectors: int = 4) -> SparseMatrix:
    """Dense-pattern ``A = U diag(sigma) V^T`` with known singular values.

    ``U`` and ``V`` are products of ``reflectors`` seeded Householder
    reflections, so the result is reproducible bit for bit.
    """
    sigma_values = np.asarray(sigma_values, dtype=np.float64)
    if M < N:
        raise ValueError("generate_test_matrix expects M >= N")
    if sigma_values.shape != (N,):
        raise ValueError(f"need exactly N={N} singular values")
    if np.any(sigma_values < 0):
        raise ValueError("singular values must be non-negative")
    rng = np.random.default_rng(seed)
    us = _householder_vectors(M, reflectors, rng)
    vs = _householder_vectors(N, reflectors, rng)
    X = np.zeros((M, N))
    X[np.arange(N), np.arange(N)] = sigma_values
    X = _apply_reflectors_left(X, us)  # U Sigma
    X = _apply_reflectors_left(X.T.copy(), vs).T  # (V (U Sigma)^T)^T = U Sigma V^T
    return SparseMatrix.from_dense(X)
