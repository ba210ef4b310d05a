"""Solvers for tau_N = P(V_N > 0) and the critical offspring means.

``tau_iterate`` works for any law: starting from tau_{N,0} = 1 it runs

    1 - tau_{N,n+1} = G_N(tau_{N,n}, 1 - tau_{N,n}; 0),

which decreases monotonically to tau_N, and then polishes the limit by a
bracketing root search.  ``tau_family`` solves the closed-form equations
available for the fractional linear, Poisson and one-or-many families and
serves as an independent check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, stats
from scipy.special import gammainc, gammaln

from .errors import DomainError, NoConvergence, ParamOutOfRange, UnsupportedFamily
from .gfun import g_eval
from .offspring import FractionalLinear, Geometric, OffspringLaw, OneOrMany, Poisson

GRID = 1024
PEAK_GRID = 256
XTOL = 1e-300
RTOL = 8.9e-16


@dataclass
class FixedPointResult:
    tau: float
    iterations: int
    residual: float
    trajectory: list[float] | None = None
    method: str = "iterate"


@dataclass
class CriticalValue:
    N: int
    family: str
    m_crit: float
    tau_crit: float
    y: float = field(default=math.nan)


def _root(fun, lo, hi):
    """Root of ``fun`` bracketed by [lo, hi] to full double precision."""
    return optimize.brentq(fun, lo, hi, xtol=XTOL, rtol=RTOL, maxiter=500)


def _fixed_point_gap(law: OffspringLaw, N: int):
    """x -> x - G_N(1 - x, x; 0); its smallest zero in [0, 1] is 1 - tau_N."""
    return lambda x: x - g_eval(law, N, 0, 1.0 - x, x)


def residual(law: OffspringLaw, N: int, tau: float) -> float:
    return abs((1.0 - tau) - g_eval(law, N, 0, tau, 1.0 - tau))


def tau_iterate(
    law: OffspringLaw,
    N: int,
    tol: float = 1e-12,
    max_iter: int = 10**6,
    keep_trajectory: bool = False,
    n_steps: int | None = None,
) -> FixedPointResult:
    """tau_N by monotone iteration from tau_{N,0} = 1, polished by root bracketing.

    With ``n_steps`` the iteration stops after exactly that many steps and
    returns tau_{N,n_steps} (no polishing); the trajectory then holds
    tau_{N,0}..tau_{N,n_steps}.
    """
    if int(N) != N or N < 1:
        raise DomainError(f"N must be a positive integer, got {N!r}")
    tau = 1.0
    traj = [tau] if (keep_trajectory or n_steps is not None) else None
    limit = n_steps if n_steps is not None else max_iter
    it = 0
    delta = math.inf
    while it < limit:
        new = 1.0 - g_eval(law, N, 0, tau, 1.0 - tau)
        new = min(max(new, 0.0), tau)  # guard rounding; the sequence is non-increasing
        delta = tau - new
        tau = new
        it += 1
        if traj is not None:
            traj.append(tau)
        if n_steps is None and delta < tol:
            break
    if n_steps is not None:
        return FixedPointResult(tau, it, residual(law, N, tau), traj, "trajectory")
    if delta >= tol:
        raise NoConvergence(f"no convergence after {max_iter} iterations (last step {delta:.3g})")

    tau = _polish(law, N, tau, max(delta, tol))
    return FixedPointResult(tau, it, residual(law, N, tau), traj, "iterate")


def _polish(law: OffspringLaw, N: int, tau: float, step: float) -> float:
    """Refine the iterate by bracketing the smallest zero of the gap in x = 1 - tau."""
    gap = _fixed_point_gap(law, N)
    x_lo = 1.0 - tau
    g_lo = gap(x_lo)
    if g_lo == 0.0:
        return tau
    if g_lo > 0.0:
        # iterate overshot by rounding; look below
        width = step
        while width < 1.0:
            x = max(0.0, x_lo - width)
            if gap(x) <= 0.0:
                return 1.0 - _root(gap, x, x_lo)
            if x == 0.0:
                break
            width *= 4.0
        return tau
    width = max(step, 1e-14)
    while width < 1.0:
        x_hi = min(1.0, x_lo + width)
        g_hi = gap(x_hi)
        if g_hi == 0.0:
            return 1.0 - x_hi
        if g_hi > 0.0:
            return 1.0 - _root(gap, x_lo, x_hi)
        if x_hi == 1.0:
            break
        width *= 4.0
    # tangential contact: the iterate itself is the best estimate
    return tau


# -- family equations --------------------------------------------------------

def family_equation(law: OffspringLaw, N: int):
    """F(tau) whose largest zero in [0, 1] is tau_N; F(1) >= 0 for every family."""
    if isinstance(law, FractionalLinear):
        p, b = law.p, law.b
        scale = (b / (1.0 - p)) ** (1.0 / N)
        expo = 1.0 - 1.0 / N
        return lambda t: (1.0 - p * (1.0 - t)) - scale * (p * t) ** expo
    if isinstance(law, Poisson):
        m = law.m
        # (1-s) e^{ms} = sum_{j<N} (ms)^j / j!  <=>  P(Poisson(ms) >= N) = s
        return lambda s: s - gammainc(N, m * s)
    if isinstance(law, OneOrMany):
        p, r = law.p, law.r
        one = 1.0 if N == 1 else 0.0
        # a single child only helps when N == 1
        return lambda s: s - (1.0 - p) * one * s - p * stats.binom.sf(N - 1, r, s)
    raise UnsupportedFamily(f"no closed-form equation for family {law.family!r}")


def tau_family(law: OffspringLaw, N: int) -> FixedPointResult:
    """Largest root in [0, 1] of the family equation, or tau = 0 if only the trivial one exists."""
    if int(N) != N or N < 1:
        raise DomainError(f"N must be a positive integer, got {N!r}")
    F = family_equation(law, N)
    grid = np.linspace(1.0, 0.0, GRID + 1)
    prev_t, prev_v = grid[0], F(grid[0])
    if prev_v == 0.0:
        return FixedPointResult(1.0, 0, residual(law, N, 1.0), method="family")
    for t in grid[1:]:
        if t == 0.0:
            break  # tau = 0 is always a root of the Poisson/one-or-many forms
        v = F(t)
        if v == 0.0:
            return FixedPointResult(float(t), 0, residual(law, N, t), method="family")
        if (v < 0.0) != (prev_v < 0.0):
            tau = _root(F, t, prev_t)
            return FixedPointResult(tau, 0, residual(law, N, tau), method="family")
        prev_t, prev_v = t, v
    if isinstance(law, FractionalLinear) and N == 1:
        v0 = F(0.0)
        if v0 <= 0.0 and prev_v > 0.0:
            tau = _root(F, 0.0, prev_t)
            return FixedPointResult(tau, 0, residual(law, N, tau), method="family")
    return FixedPointResult(0.0, 0, residual(law, N, 0.0), method="family")


# -- critical values ---------------------------------------------------------

def _critical_y_equation(N: int):
    # y^N/(N-1)! + sum_{j<N} y^j/j! = e^y, divided by e^y:
    #   N * P(Y = N) - P(Y >= N) with Y ~ Poisson(y)
    def H(y):
        log_pmf = N * math.log(y) - y - gammaln(N + 1.0)
        return N * math.exp(log_pmf) - gammainc(N, y)
    return H


def critical_y(N: int) -> float:
    """Positive root y of y^N/(N-1)! + sum_{j<N} y^j/j! = e^y (N >= 2)."""
    if int(N) != N or N < 2:
        raise DomainError("critical_y needs N >= 2")
    H = _critical_y_equation(N)
    grid = np.linspace(1e-3, 20.0 * N, 20 * GRID)
    prev = grid[0]
    prev_v = H(prev)
    for y in grid[1:]:
        v = H(y)
        if (v < 0.0) != (prev_v < 0.0):
            return _root(H, prev, y)
        prev, prev_v = y, v
    raise NoConvergence(f"no sign change found for critical_y({N})")  # pragma: no cover


def critical_y_residual(N: int, y: float) -> float:
    """Residual of the critical-y equation in its raw (unscaled) form, relative to e^y."""
    lhs = y**N / math.factorial(N - 1) + sum(y**j / math.factorial(j) for j in range(N))
    return abs(lhs - math.exp(y)) / math.exp(y)


def _gap_peak(law: OffspringLaw, N: int) -> tuple[float, float]:
    """max over tau in (0, 1] of (1 - G_N(tau, 1-tau; 0) - tau) / tau, and its argmax.

    A non-trivial tau_N exists exactly when the maximum is >= 0; at the
    critical mean the maximum touches zero (double root).
    """
    def D(t):
        return (1.0 - g_eval(law, N, 0, t, 1.0 - t) - t) / t

    n = PEAK_GRID
    grid = np.linspace(1.0 / n, 1.0, n)
    vals = np.array([D(t) for t in grid])
    i = int(np.argmax(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, n - 1)]
    res = optimize.minimize_scalar(lambda t: -D(t), bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-12})
    if -res.fun >= vals[i]:
        return float(-res.fun), float(res.x)
    return float(vals[i]), float(grid[i])


def _law_from_mean(family: str, m: float, r: int | None) -> OffspringLaw:
    if family == "geometric":
        return Geometric.from_mean(m)
    if family == "poisson":
        return Poisson(m)
    if family == "one-or-many":
        return OneOrMany((m - 1.0) / (r - 1.0), r)
    raise UnsupportedFamily(f"critical mean not available for family {family!r}")


def critical_mean(family: str, N: int, r: int | None = None) -> CriticalValue:
    """Critical offspring mean m^c_N of a one-parameter family.

    Poisson uses the explicit pair of equations in y = m tau.  Other
    families (geometric; one-or-many with fixed ``r``) bisect on m for the
    tangency at which the fixed-point equation first gains a non-trivial root.
    """
    family = family.lower().replace("_", "-")
    if int(N) != N or N < 1:
        raise DomainError(f"N must be a positive integer, got {N!r}")
    if family not in ("poisson", "geometric", "one-or-many"):
        raise UnsupportedFamily(f"critical mean not available for family {family!r}")
    if family == "one-or-many" and (r is None or r <= N):
        raise ParamOutOfRange("one-or-many critical mean needs r > N")
    if N == 1:
        return CriticalValue(1, family, 1.0, 0.0, 0.0)
    if family == "poisson":
        y = critical_y(N)
        m = math.exp(y + gammaln(N) - (N - 1) * math.log(y))
        return CriticalValue(N, family, m, y / m, y)

    lo, hi = 1.0, 2.0
    if family == "one-or-many":
        hi = float(r)  # p -> 1
    else:
        while _gap_peak(_law_from_mean(family, hi, r), N)[0] < 0.0:
            lo, hi = hi, 2.0 * hi
    if family == "one-or-many" and _gap_peak(_law_from_mean(family, hi * (1 - 1e-12), r), N)[0] < 0.0:
        raise ParamOutOfRange(f"no critical mean for one-or-many with r={r}, N={N}")
    while hi - lo > 1e-11 * hi:
        mid = 0.5 * (lo + hi)
        if _gap_peak(_law_from_mean(family, mid, r), N)[0] >= 0.0:
            hi = mid
        else:
            lo = mid
    _, t = _gap_peak(_law_from_mean(family, hi, r), N)
    return CriticalValue(N, family, hi, t, hi * t)


# -- tree function -----------------------------------------------------------

def cayley_tree(z: float, branch: str = "principal", tol: float = 1e-15, max_iter: int = 200) -> float:
    """Solution y of y = z e^y for 0 <= z <= 1/e, by Newton iteration.

    ``branch="principal"`` gives the root in [0, 1], i.e. the tree function
    sum_{k>=1} k^(k-1) z^k / k!.  ``branch="upper"`` gives the root y >= 1,
    which is the one that solves the binary critical-value equation.
    """
    if not 0.0 <= z <= math.exp(-1.0) * (1.0 + 1e-15):
        raise DomainError(f"tree function needs 0 <= z <= 1/e, got {z!r}")
    if z == 0.0:
        if branch == "principal":
            return 0.0
        raise DomainError("the upper branch is unbounded at z = 0")
    if branch == "principal":
        y = z
        for _ in range(max_iter):
            g = y - z * math.exp(y)
            dg = 1.0 - z * math.exp(y)
            if dg <= 0.0:
                return 1.0
            step = g / dg
            y -= step
            if abs(step) < tol:
                break
        return min(y, 1.0)
    if branch == "upper":
        # solve y - log y + log z = 0 from the right, where it is convex and increasing
        y = 2.0 - 2.0 * math.log(z)
        for _ in range(max_iter):
            g = y - math.log(y) + math.log(z)
            dg = 1.0 - 1.0 / y
            if dg <= 0.0:
                return 1.0
            step = g / dg
            y -= step
            if abs(step) < tol * y or y <= 1.0:
                break
        return max(y, 1.0)
    raise ValueError(f"unknown branch {branch!r}")


def cayley_series(z: float, terms: int = 200) -> float:
    """Partial sum of sum_{k>=1} k^(k-1) z^k / k! (cross-check for small z)."""
    if z == 0.0:
        return 0.0
    k = np.arange(1, terms + 1, dtype=float)
    logt = (k - 1.0) * np.log(k) + k * math.log(z) - gammaln(k + 1.0)
    return float(np.sum(np.exp(logt)))


# -- sufficient condition ----------------------------------------------------

def sufficient_condition(law: OffspringLaw, N: int) -> bool:
    """2N sum_{j>=N} p_j/(j+1) <= (1 - sum_{j<N} p_j)^2, which guarantees tau_N > 0.

    When the law puts no mass at or above N both sides vanish and the
    predicate is reported as true even though tau_N = 0; callers should also
    check ``law.standing_assumption(N)``.
    """
    if int(N) != N or N < 2:
        raise DomainError("the sufficient condition is stated for N >= 2")
    c = law.coeffs
    j = np.arange(c.size)
    lhs = 2.0 * N * math.fsum(c[N:] / (j[N:] + 1.0))
    rhs = (1.0 - math.fsum(c[:N])) ** 2
    return lhs <= rhs
