"""Implicit restarting and harmonic shift selection."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bidiag import BREAKDOWN_TOL, BidiagFactorization, random_orthogonal_unit
from .dense import bidiag_qr_step
from .harmonic import HarmonicApproximation

RELGAP_THRESHOLD = 1e-3

__all__ = ["ShiftSet", "select_shifts", "adapt_shifts", "implicit_restart"]


@dataclass
class ShiftSet:
    shifts: list[float] = field(default_factory=list)
    replaced_count: int = 0
    degenerate: bool = False  # zero-shift fallback was used

    def __len__(self) -> int:
        return len(self.shifts)


def select_shifts(approximations: Sequence[HarmonicApproximation], k_eff: int, p: int,
                  tau: float, discarded: Sequence[float] = ()) -> ShiftSet:
    """Use the unwanted harmonic Ritz values as shifts.

    ``approximations`` must already be sorted by ``|theta - tau|``. The
    approximations ranked after the ``k_eff`` wanted ones supply the shifts;
    a shortfall is made up from the largest ``|theta|`` in ``discarded``
    (the negative harmonic Ritz values), and otherwise ``p`` shrinks.
    """
    if p < 1:
        raise ValueError("at least one shift must be requested")
    shifts = [float(a.theta) for a in approximations[k_eff:k_eff + p]]
    if len(shifts) < p and len(discarded):
        fill = sorted((abs(float(t)) for t in discarded), reverse=True)
        shifts.extend(fill[: p - len(shifts)])
    if not shifts:
        return ShiftSet([0.0], degenerate=True)
    return ShiftSet(shifts)


def adapt_shifts(shifts: ShiftSet, wanted: Sequence[tuple[float, float]], tau: float,
                 approximations: Sequence[HarmonicApproximation],
                 threshold: float = RELGAP_THRESHOLD) -> ShiftSet:
    """Replace shifts that sit too close to a wanted value.

    A shift ``mu`` is bad when ``|((rho - eps) - mu) / rho| <= threshold`` for
    any wanted ``(rho, eps)``. Bad shifts become the rho farthest from ``tau``
    among ``approximations``; that value is never itself replaced.
    """
    if not wanted:
        raise ValueError("adapt_shifts needs at least one wanted approximation")
    if not approximations:
        return ShiftSet(list(shifts.shifts), shifts.replaced_count, shifts.degenerate)
    farthest = max(approximations, key=lambda a: abs(a.rho - tau))
    replacement = abs(float(farthest.rho))
    new = []
    replaced = 0
    for mu in shifts.shifts:
        if mu != replacement and any(
            rho != 0.0 and abs(((rho - eps) - mu) / rho) <= threshold for rho, eps in wanted
        ):
            new.append(replacement)
            replaced += 1
        else:
            new.append(mu)
    return ShiftSet(new, shifts.replaced_count + replaced, shifts.degenerate)


def implicit_restart(fact: BidiagFactorization, shifts: ShiftSet | Sequence[float],
                     anorm: float | None = None,
                     rng: np.random.Generator | None = None) -> BidiagFactorization:
    """Apply one shifted QR step per shift and truncate to ``m - p`` steps.

    The retained factorization starts from the filtered vector
    ``prod_j (A^T A - mu_j^2 I) q_1`` (normalized).
    """
    mus = list(shifts.shifts if isinstance(shifts, ShiftSet) else shifts)
    m = fact.steps
    p = len(mus)
    if p < 1 or p >= m:
        raise ValueError(f"need 1 <= number of shifts < {m}, got {p}")
    k = m - p

    d, e = fact.alphas, fact.betas
    Pt = Qt = None
    for mu in mus:
        d, e, Pt, Qt = bidiag_qr_step(d, e, mu, Pt, Qt)

    P_new = fact.P @ Pt[:, :k]
    QQ = fact.Q @ Qt[:, : k + 1]
    Q_new = np.ascontiguousarray(QQ[:, :k])
    d_new = d[:k].copy()
    e_new = e[: k - 1].copy()

    r = fact.beta_residual * Pt[m - 1, k - 1] * fact.q_next + e[k - 1] * QQ[:, k]

    # keep the diagonal and superdiagonal non-negative
    last_sign = 1.0
    for i in range(k):
        if d_new[i] < 0.0:
            d_new[i] = -d_new[i]
            P_new[:, i] *= -1.0
            if i < k - 1:
                e_new[i] = -e_new[i]
            else:
                last_sign = -1.0
        if i < k - 1 and e_new[i] < 0.0:
            e_new[i] = -e_new[i]
            Q_new[:, i + 1] *= -1.0
            d_new[i + 1] = -d_new[i + 1]
    r *= last_sign

    r = r - Q_new @ (Q_new.T @ r)
    beta = float(np.linalg.norm(r))
    if anorm is None:
        anorm = max(np.abs(fact.alphas).max(), 1.0)
    events = list(fact.events)
    breakdowns = fact.breakdowns
    exhausted = False
    if beta > BREAKDOWN_TOL * anorm:
        q_next = r / beta
    else:
        events.append(("restart", k))
        breakdowns += 1
        q_next = random_orthogonal_unit(Q_new, rng if rng is not None else np.random.default_rng(0))
        if q_next is None:
            q_next = np.zeros(Q_new.shape[0])
            exhausted = True
    return BidiagFactorization(
        P=P_new, Q=Q_new, alphas=d_new, betas=e_new, beta_residual=beta,
        q_next=q_next, exhausted=exhausted, breakdowns=breakdowns, events=events,
    )
