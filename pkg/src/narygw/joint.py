"""Joint law of (V_{N,n}, nu_n) by iterating the generating-function recursion

    E(s^{nu_{n+1}}; V_{N,n+1} = j) = s G_N(psi_n(s), phi_n(s); j),

where psi_n(s) = E(s^{nu_n}; V_{N,n} > 0) and phi_n(s) = E(s^{nu_n}; V_{N,n} = 0).
Everything is a power series in s truncated at degree T; coefficients of
degree <= T are exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .offspring import OffspringLaw
from .series import TruncatedSeries, compose_pgf, series_g_eval


@dataclass
class JointTable:
    """``probs[j, t] = P(V_{N,n} = j, nu_n = t)`` for t <= T."""

    N: int
    n: int
    T: int
    probs: np.ndarray
    tail: TruncatedSeries
    retained_mass: list[float] = field(default_factory=list)
    phi_mass: list[float] = field(default_factory=list)

    def row(self, j: int) -> TruncatedSeries:
        return TruncatedSeries(self.probs[j])

    @property
    def rows(self) -> list[TruncatedSeries]:
        return [TruncatedSeries(r) for r in self.probs]

    def marginal_v(self) -> np.ndarray:
        """P(V_{N,n} = j, nu_n <= T) for each j."""
        return self.probs.sum(axis=1)

    def marginal_nu(self) -> np.ndarray:
        """P(nu_n = t) for t = 0..T (includes mass beyond j_max via ``tail``)."""
        return self.probs.sum(axis=0) + self.tail.coeffs

    @property
    def deficit(self) -> float:
        """Probability that nu_n exceeds T, i.e. mass not represented in the table."""
        return max(0.0, 1.0 - math.fsum(self.marginal_nu()))

    def records(self):
        """(j, t, probability) triples for the non-zero cells."""
        js, ts = np.nonzero(self.probs)
        return [(int(j), int(t), float(self.probs[j, t])) for j, t in zip(js, ts)]


def joint_init(N: int, T: int) -> tuple[TruncatedSeries, TruncatedSeries]:
    """(psi_0, phi_0) = (s, 0): the root alone is a height-0 complete tree."""
    if T < 1:
        raise DomainError("truncation degree T must be >= 1")
    if N < 1:
        raise DomainError("N must be >= 1")
    return TruncatedSeries.monomial(1, T), TruncatedSeries.zero(T)


def default_j_max(N: int, T: int) -> int:
    return -(-T // N)


def joint_step(
    law: OffspringLaw,
    N: int,
    psi: TruncatedSeries,
    phi: TruncatedSeries,
    j_max: int | None = None,
):
    """One generation of the recursion.

    Returns ``(rows, new_psi, new_phi, marginal)`` where ``rows[j]`` is
    E(s^{nu_{n+1}}; V_{N,n+1} = j) for j = 0..j_max and ``marginal`` is
    E s^{nu_{n+1}} = s f(psi + phi).  The new psi is taken as marginal minus
    the j = 0 row, so a finite ``j_max`` never loses mass from psi.
    """
    psi._match(phi)
    if j_max is None:
        j_max = default_j_max(N, psi.T)
    if j_max < 1:
        raise DomainError("j_max must be >= 1")
    rows = [series_g_eval(law, psi, phi, j, N).shift() for j in range(j_max + 1)]
    marginal = compose_pgf(law, psi + phi).shift()
    new_phi = rows[0]
    new_psi = marginal - new_phi
    return rows, new_psi, new_phi, marginal


def joint_run(
    law: OffspringLaw, N: int, n: int, T: int = 64, j_max: int | None = None
) -> JointTable:
    """Apply ``joint_step`` n times from ``joint_init``."""
    if n < 1:
        raise DomainError("n must be >= 1")
    if j_max is None:
        j_max = default_j_max(N, T)
    psi, phi = joint_init(N, T)
    retained, phi_mass = [], []
    for _ in range(n):
        rows, psi, phi, marginal = joint_step(law, N, psi, phi, j_max)
        retained.append(float(marginal(1.0)))
        phi_mass.append(float(phi(1.0)))
    probs = np.vstack([r.coeffs for r in rows])
    tail = marginal - TruncatedSeries(probs.sum(axis=0))
    return JointTable(N, n, T, probs, tail, retained, phi_mass)
