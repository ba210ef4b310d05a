"""Distribution of V_N, the number of disjoint infinite complete N-ary subtrees.

``pmf_vn`` works for any offspring law through the band sums
P(V_N = j) = G_N(tau_N, 1 - tau_N; j).  The fractional linear, Poisson and
one-or-many families also have closed forms, which are implemented
separately so that the two routes can be compared.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.special import gammaln, xlogy

from .errors import DomainError, ParamOutOfRange, UnsupportedFamily
from .offspring import FractionalLinear, OffspringLaw, OneOrMany, Poisson
from .solver import tau_family, tau_iterate

TAIL_TOL = 1e-12
J_CAP = 10**4


@dataclass
class PmfTable:
    """P(V_N = j) for j = 0..len(probs)-1; ``tail`` is the mass left beyond."""

    N: int
    probs: np.ndarray
    mean: float
    tail: float
    tau: float
    method: str = field(default="theorem")

    @property
    def j_max(self) -> int:
        return self.probs.size - 1

    def prob(self, j: int) -> float:
        return float(self.probs[j]) if 0 <= j < self.probs.size else 0.0

    def pgf(self, s: float) -> float:
        return float(np.polynomial.polynomial.polyval(s, self.probs))

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "tau": self.tau,
            "mean": self.mean,
            "tail": self.tail,
            "method": self.method,
            "probs": self.probs.tolist(),
        }


def _point_mass(N: int, method: str) -> PmfTable:
    return PmfTable(N, np.array([1.0]), 0.0, 0.0, 0.0, method)


def _check_N(N: int) -> None:
    if int(N) != N or N < 1:
        raise DomainError(f"N must be a positive integer, got {N!r}")


def pmf_vn(law: OffspringLaw, N: int, tol: float = 1e-12, max_iter: int = 10**6) -> PmfTable:
    """Pmf of V_N for an arbitrary law from the band sums at tau_N."""
    _check_N(N)
    tau = tau_iterate(law, N, tol=tol, max_iter=max_iter).tau
    if tau == 0.0:
        return _point_mass(N, "theorem")
    x, y = tau, 1.0 - tau
    top = law.support_max
    chunk = 64
    pieces = []
    total = 0.0
    j0 = 0
    done = False
    while not done and j0 < J_CAP:
        n = min(chunk, J_CAP - j0)
        k = np.arange(j0 * N, (j0 + n) * N)
        bands = law.scaled_terms(k, x, y).reshape(n, N).sum(axis=1)
        for i, b in enumerate(bands):
            pieces.append(b)
            total += b
            j = j0 + i
            if total >= 1.0 - TAIL_TOL or (top is not None and (j + 1) * N > top):
                done = True
                break
        j0 += n
    probs = np.array(pieces)
    j = np.arange(probs.size)
    return PmfTable(N, probs, float(np.dot(j, probs)), max(0.0, 1.0 - math.fsum(probs)), tau)


def pmf_fractional_linear(p: float, b: float, N: int) -> PmfTable:
    """Zero-modified geometric law of V_N under fractional linear offspring.

    With theta = (p tau / (1 - p (1 - tau)))^N and c = b / (p (1 - p)):
    P(V_N = 0) = 1 - c theta, P(V_N = j) = c (1 - theta) theta^j for j >= 1,
    and E V_N = c theta / (1 - theta).
    """
    _check_N(N)
    law = FractionalLinear(p, b)
    tau = tau_family(law, N).tau
    if tau == 0.0:
        return _point_mass(N, "fractional-linear")
    c = b / (p * (1.0 - p))
    theta = (p * tau / (1.0 - p * (1.0 - tau))) ** N
    if theta >= 1.0:  # pragma: no cover - tau <= 1 keeps theta < 1
        raise ParamOutOfRange("theta must be < 1")
    # tail beyond J is c theta^(J+1)
    J = math.ceil(math.log(TAIL_TOL / c) / math.log(theta)) if theta > 0 else 0
    J = int(min(max(J, 1), J_CAP))
    j = np.arange(1, J + 1)
    probs = np.empty(J + 1)
    probs[0] = 1.0 - c * theta
    probs[1:] = c * (1.0 - theta) * np.exp(j * math.log(theta))
    mean = c * theta / (1.0 - theta)
    tail = c * theta ** (J + 1)
    return PmfTable(N, probs, mean, tail, tau, "fractional-linear")


def _log_poisson_pmf(k: np.ndarray, lam: float) -> np.ndarray:
    return xlogy(k, lam) - lam - gammaln(k + 1.0)


def pmf_poisson(m: float, N: int) -> PmfTable:
    """V_N under Poisson(m) offspring: P(V_N = j) = P(jN <= Y <= jN + N - 1), Y ~ Poisson(m tau_N)."""
    _check_N(N)
    tau = tau_family(Poisson(m), N).tau
    if tau == 0.0:
        return _point_mass(N, "poisson")
    lam = m * tau
    K = int(lam + 40.0 * math.sqrt(lam) + 60.0)
    n_bands = K // N + 1
    k = np.arange(n_bands * N)
    pmf = np.exp(_log_poisson_pmf(k, lam))
    bands = pmf.reshape(n_bands, N).sum(axis=1)
    cum = np.cumsum(bands)
    stop = int(np.searchsorted(cum, 1.0 - TAIL_TOL)) + 1
    probs = bands[: min(stop, n_bands)]
    j = np.arange(probs.size)
    return PmfTable(N, probs, float(np.dot(j, probs)), max(0.0, 1.0 - math.fsum(probs)), tau, "poisson")


def pmf_one_or_many(p: float, r: int, N: int) -> PmfTable:
    """V_N under 1-or-r offspring via binomial band sums.

    With B ~ Binomial(r, tau_N), P(V_N = j) = p P(jN <= B <= jN + U) for
    j >= 1, U = min(N - 1, r - jN), and zero once jN > r.  The 1-child
    branch (probability 1 - p) can only contribute when N = 1.
    """
    _check_N(N)
    if N >= r:
        raise ParamOutOfRange(f"need N < r, got N={N}, r={r}")
    law = OneOrMany(p, r)
    tau = tau_family(law, N).tau
    if tau == 0.0:
        return _point_mass(N, "one-or-many")
    r = law.r
    binom = stats.binom.pmf(np.arange(r + 1), r, tau)
    J = r // N
    probs = np.zeros(J + 1)
    for j in range(J + 1):
        lo = j * N
        hi = min(lo + N - 1, r)
        probs[j] = p * math.fsum(binom[lo: hi + 1])
    if N == 1:
        probs[0] += (1.0 - p) * (1.0 - tau)
        probs[1] += (1.0 - p) * tau
    else:
        probs[0] += 1.0 - p
    j = np.arange(J + 1)
    return PmfTable(N, probs, float(np.dot(j, probs)), 0.0, tau, "one-or-many")


def pmf_closed_form(law: OffspringLaw, N: int) -> PmfTable:
    """Dispatch to the family-specific closed form for ``law``."""
    if isinstance(law, FractionalLinear):
        return pmf_fractional_linear(law.p, law.b, N)
    if isinstance(law, Poisson):
        return pmf_poisson(law.m, N)
    if isinstance(law, OneOrMany):
        return pmf_one_or_many(law.p, law.r, N)
    raise UnsupportedFamily(f"no closed form for family {law.family!r}")


def pgf_v1(law: OffspringLaw, s: float) -> float:
    """E s^{V_1} = f(q + (1 - q) s), q the extinction probability."""
    if not 0.0 <= s <= 1.0:
        raise DomainError(f"s must lie in [0, 1], got {s!r}")
    q = 1.0 - tau_iterate(law, 1).tau
    return law.pgf(min(1.0, q + (1.0 - q) * s))
