"""Monte Carlo simulation of V_{N,n} and nu_n, and an exhaustive enumerator.

Trees are generated depth-first and never stored.  A node at depth n has
V_{N,0} = 1; a node higher up has V_{N,k} > 0 exactly when at least N of
its children have V_{N,k-1} > 0, and at the root V_{N,n} = floor(C / N)
with C the number of such children.

Two evaluation modes share the same traversal:

* ``progeny=True`` generates every node of height <= n, giving nu_n and the
  whole profile V_{N,0..n} of the root from one tree;
* ``progeny=False`` stops examining a non-root node's children as soon as
  its indicator is decided, which keeps deep supercritical trees cheap but
  leaves nu_n unknown.

Replicates are grouped in fixed chunks of ``CHUNK``; chunk c draws from its
own stream derived from (seed, c) and whole chunks are handed to workers, so
results do not depend on the worker count.
"""
from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy.special import gammainc

from .errors import BudgetDominated, DomainError, TooLarge
from .offspring import FractionalLinear, OffspringLaw, OneOrMany, Poisson

DEFAULT_BUDGET = 10**7
CENSOR_LIMIT = 1e-3
CHUNK = 4096

_FRACTIONAL, _POISSON, _ONE_OR_MANY, _TABLE = 0, 1, 2, 3


# -- compiled kernels --------------------------------------------------------

@numba.njit(cache=True)
def _draw(code, params, cdf, rng):
    if code == _FRACTIONAL:
        u = rng.random()
        p0 = params[0]
        if u < p0:
            return 0
        v = (u - p0) / (1.0 - p0)
        return 1 + np.int64(np.floor(np.log1p(-v) / params[1]))
    if code == _POISSON:
        return np.int64(rng.poisson(params[0]))
    if code == _ONE_OR_MANY:
        if rng.random() < params[0]:
            return np.int64(params[1])
        return np.int64(1)
    return np.int64(np.searchsorted(cdf, rng.random(), side="right"))


@numba.njit(cache=True)
def _lazy_tree(code, params, cdf, N, n, budget, rng, sf_N):
    """V_{N,n} of one tree with short-circuiting; returns (v, nodes), v = -1 if censored.

    A node at depth n - 1 is complete exactly when it has >= N children, so
    it is resolved by one uniform against ``sf_N = P(Z >= N)`` instead of
    drawing Z.
    """
    if n == 0:
        return np.int64(1), np.int64(1)
    remaining = np.zeros(n, np.int64)
    found = np.zeros(n, np.int64)
    nodes = np.int64(1)
    remaining[0] = _draw(code, params, cdf, rng)
    if n == 1:
        return remaining[0] // N, nodes + remaining[0]
    d = 0
    while True:
        done = remaining[d] == 0
        if not done and d > 0 and (found[d] >= N or found[d] + remaining[d] < N):
            done = True
        if done:
            if d == 0:
                return found[0] // N, nodes
            hit = 1 if found[d] >= N else 0
            d -= 1
            remaining[d] -= 1
            found[d] += hit
            continue
        nodes += 1
        if nodes > budget:
            return np.int64(-1), nodes
        if d == n - 2:
            remaining[d] -= 1
            if rng.random() < sf_N:
                found[d] += 1
            continue
        d += 1
        remaining[d] = _draw(code, params, cdf, rng)
        found[d] = 0


@numba.njit(cache=True)
def _full_tree(code, params, cdf, N, n, budget, rng, profile):
    """Generate all nodes of height <= n.

    Fills ``profile[k] = V_{N,k}`` of the root for k = 0..n and returns
    (nu_n, censored).  ``cnt[d, k]`` counts children of the current depth-d
    node whose own complete-subtree height is >= k.
    """
    profile[0] = 1
    if n == 0:
        return np.int64(1), False
    remaining = np.zeros(n, np.int64)
    cnt = np.zeros((n, n), np.int64)
    nodes = np.int64(1)
    remaining[0] = _draw(code, params, cdf, rng)
    d = 0
    while True:
        if d == n - 1:
            nodes += remaining[d]
            cnt[d, 0] += remaining[d]
            remaining[d] = 0
            if nodes > budget:
                return nodes, True
        if remaining[d] == 0:
            if d == 0:
                for k in range(1, n + 1):
                    profile[k] = cnt[0, k - 1] // N
                return nodes, False
            h = 0
            for k in range(n - d):
                if cnt[d, k] >= N:
                    h = k + 1
                else:
                    break
            for k in range(n):
                cnt[d, k] = 0
            d -= 1
            remaining[d] -= 1
            for k in range(h + 1):
                cnt[d, k] += 1
            continue
        nodes += 1
        if nodes > budget:
            return nodes, True
        d += 1
        remaining[d] = _draw(code, params, cdf, rng)


@numba.njit(cache=True)
def _lazy_block(code, params, cdf, N, n, budget, rng, sf_N, size):
    v = np.empty(size, np.int64)
    for i in range(size):
        v[i], _ = _lazy_tree(code, params, cdf, N, n, budget, rng, sf_N)
    return v


@numba.njit(cache=True)
def _full_block(code, params, cdf, N, n, budget, rng, size):
    v = np.empty(size, np.int64)
    nu = np.empty(size, np.int64)
    profile = np.zeros(n + 1, np.int64)
    for i in range(size):
        nodes, censored = _full_tree(code, params, cdf, N, n, budget, rng, profile)
        v[i] = -1 if censored else profile[n]
        nu[i] = -1 if censored else nodes
    return v, nu


@numba.njit(cache=True)
def _draw_many(code, params, cdf, rng, size):
    out = np.empty(size, np.int64)
    for i in range(size):
        out[i] = _draw(code, params, cdf, rng)
    return out


def _kernel_law(law: OffspringLaw):
    empty = np.zeros(1)
    if isinstance(law, FractionalLinear):
        return _FRACTIONAL, np.array([law.p0, math.log(law.p)]), empty
    if isinstance(law, Poisson):
        return _POISSON, np.array([law.m]), empty
    if isinstance(law, OneOrMany):
        return _ONE_OR_MANY, np.array([law.p, float(law.r)]), empty
    cdf = np.cumsum(law.coeffs)
    cdf[-1] = max(cdf[-1], 1.0)
    return _TABLE, np.zeros(1), cdf


def _sf(law: OffspringLaw, N: int) -> float:
    """P(Z >= N) for the offspring count Z."""
    if isinstance(law, FractionalLinear):
        return 1.0 if N == 0 else (1.0 - law.p0) * law.p ** (N - 1)
    if isinstance(law, Poisson):
        return float(gammainc(N, law.m)) if N > 0 else 1.0
    return max(0.0, 1.0 - math.fsum(law.coeffs[:N]))


def stream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for chunk ``index`` of run ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def kernel_samples(law: OffspringLaw, rng: np.random.Generator, size: int) -> np.ndarray:
    """Offspring draws through the compiled sampler used by the tree kernels."""
    code, params, cdf = _kernel_law(law)
    return _draw_many(code, params, cdf, rng, size)


# -- single replicate --------------------------------------------------------

@dataclass
class SampleOutcome:
    v: int | None
    nu: int | None
    censored: bool
    profile: np.ndarray | None = None


def simulate_vnn(
    law: OffspringLaw,
    N: int,
    n: int,
    rng: np.random.Generator,
    budget: int = DEFAULT_BUDGET,
    progeny: bool = True,
) -> SampleOutcome:
    """One Galton-Watson tree evaluated to depth n.

    With ``progeny=True`` the outcome also carries nu_n and the profile
    V_{N,0..n}; otherwise only V_{N,n} is computed (``nu`` is None).
    """
    _check(N, n, budget)
    code, params, cdf = _kernel_law(law)
    if progeny:
        profile = np.zeros(n + 1, np.int64)
        nu, censored = _full_tree(code, params, cdf, N, n, budget, rng, profile)
        if censored:
            return SampleOutcome(None, None, True)
        return SampleOutcome(int(profile[n]), int(nu), False, profile)
    v, _ = _lazy_tree(code, params, cdf, N, n, budget, rng, _sf(law, N))
    if v < 0:
        return SampleOutcome(None, None, True)
    return SampleOutcome(int(v), None, False)


def _check(N, n, budget):
    if int(N) != N or N < 1:
        raise DomainError(f"N must be a positive integer, got {N!r}")
    if int(n) != n or n < 0:
        raise DomainError(f"n must be a non-negative integer, got {n!r}")
    if budget < 1:
        raise DomainError("budget must be >= 1")


# -- many replicates ---------------------------------------------------------

@dataclass
class MonteCarloSummary:
    N: int
    n: int
    reps: int
    seed: int
    counts: np.ndarray
    censored: int
    estimates: dict = field(default_factory=dict)
    tau_hat: float = math.nan
    tau_stderr: float = math.nan
    tau_ci: tuple = (math.nan, math.nan)
    mean_v: float = math.nan
    mean_v_stderr: float = math.nan
    mean_nu: float | None = None

    @property
    def censored_frac(self) -> float:
        return self.censored / self.reps

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "n": self.n,
            "reps": self.reps,
            "seed": self.seed,
            "tau_hat": self.tau_hat,
            "tau_stderr": self.tau_stderr,
            "tau_ci": list(self.tau_ci),
            "mean_v": self.mean_v,
            "mean_v_stderr": self.mean_v_stderr,
            "mean_nu": self.mean_nu,
            "censored_frac": self.censored_frac,
            "estimates": {
                str(j): {"p_hat": e[0], "stderr": e[1], "ci_low": e[2][0], "ci_high": e[2][1]}
                for j, e in self.estimates.items()
            },
        }


def wilson_interval(count: int, nobs: int, alpha: float = 0.05) -> tuple[float, float]:
    from statsmodels.stats.proportion import proportion_confint

    lo, hi = proportion_confint(count, nobs, alpha=alpha, method="wilson")
    return float(lo), float(hi)


def _run_chunks(law, N, n, seed, chunks, reps, budget, progeny):
    """Simulate the listed chunk indices; returns (v, nu) in replicate order."""
    code, params, cdf = _kernel_law(law)
    sf_N = _sf(law, N)
    vs, nus = [], []
    for c in chunks:
        size = min(CHUNK, reps - c * CHUNK)
        rng = stream(seed, c)
        if progeny:
            v, nu = _full_block(code, params, cdf, N, n, budget, rng, size)
        else:
            v = _lazy_block(code, params, cdf, N, n, budget, rng, sf_N, size)
            nu = np.full(size, -1, np.int64)
        vs.append(v)
        nus.append(nu)
    return np.concatenate(vs), np.concatenate(nus)


def resolve_workers(workers: int) -> int:
    env = os.environ.get("NARYGW_THREADS")
    if env:
        workers = int(env)
    return max(1, int(workers))


def mc_estimate(
    law: OffspringLaw,
    N: int,
    n: int,
    reps: int,
    seed: int = 0,
    workers: int = 1,
    budget: int = DEFAULT_BUDGET,
    progeny: bool = False,
    alpha: float = 0.05,
) -> MonteCarloSummary:
    """Estimate the law of V_{N,n} (and tau_{N,n} = P(V_{N,n} > 0)) from ``reps`` trees.

    Raises ``BudgetDominated`` (with the summary attached) when more than
    0.1% of the replicates exceed the node budget.
    """
    _check(N, n, budget)
    if int(reps) != reps or reps < 1:
        raise DomainError(f"reps must be a positive integer, got {reps!r}")
    reps = int(reps)
    workers = resolve_workers(workers)
    n_chunks = -(-reps // CHUNK)
    groups = [g.tolist() for g in np.array_split(np.arange(n_chunks), min(workers, n_chunks))]
    if len(groups) == 1:
        parts = [_run_chunks(law, N, n, seed, groups[0], reps, budget, progeny)]
    else:
        from joblib import Parallel, delayed

        parts = Parallel(n_jobs=len(groups))(
            delayed(_run_chunks)(law, N, n, seed, g, reps, budget, progeny) for g in groups
        )
    v = np.concatenate([p[0] for p in parts])
    nu = np.concatenate([p[1] for p in parts])
    return summarize(v, nu if progeny else None, N, n, seed, alpha)


def summarize(v: np.ndarray, nu, N: int, n: int, seed: int, alpha: float = 0.05) -> MonteCarloSummary:
    reps = v.size
    ok = v >= 0
    censored = int(reps - ok.sum())
    counts = np.bincount(v[ok]) if ok.any() else np.zeros(1, np.int64)
    estimates = {}
    for j, c in enumerate(counts):
        p = c / reps
        estimates[j] = (float(p), math.sqrt(p * (1.0 - p) / reps), wilson_interval(int(c), reps, alpha))
    positive = int(ok.sum() - counts[0])
    tau = positive / reps
    vv = v[ok].astype(float)
    summary = MonteCarloSummary(
        N=N,
        n=n,
        reps=reps,
        seed=seed,
        counts=counts,
        censored=censored,
        estimates=estimates,
        tau_hat=tau,
        tau_stderr=math.sqrt(tau * (1.0 - tau) / reps),
        tau_ci=wilson_interval(positive, reps, alpha),
        mean_v=float(vv.mean()) if vv.size else math.nan,
        mean_v_stderr=float(vv.std(ddof=1) / math.sqrt(vv.size)) if vv.size > 1 else math.nan,
        mean_nu=float(nu[ok].mean()) if nu is not None and ok.any() else None,
    )
    if summary.censored_frac > CENSOR_LIMIT:
        raise BudgetDominated(
            f"{summary.censored_frac:.2%} of replicates exceeded the node budget", summary
        )
    return summary


# -- exhaustive enumeration --------------------------------------------------

def _tree_count(support, n):
    count = 1
    for _ in range(n):
        count = sum(count**z for z in support)
    return count


def brute_force_joint(law: OffspringLaw, N: int, n: int, max_trees: int = 10**7) -> dict:
    """Exact P(V_{N,n} = j, nu_n = t) by listing every tree of height <= n.

    Only for finite-support laws with at most four support points.
    """
    _check(N, n, 1)
    if law.support_max is None:
        raise TooLarge("enumeration needs a finite-support law")
    c = law.coeffs
    support = [int(k) for k in np.flatnonzero(c > 0.0)]
    if len(support) > 4:
        raise TooLarge(f"support has {len(support)} points; at most 4 allowed")
    if _tree_count(support, n) > max_trees:
        raise TooLarge(f"more than {max_trees} trees of height <= {n}")

    def trees(depth):
        # (probability, children) pairs; children is None at the depth limit
        if depth == 0:
            return [(1.0, None)]
        sub = trees(depth - 1)
        out = []
        for z in support:
            for combo in itertools.product(sub, repeat=z):
                prob = c[z]
                for q, _ in combo:
                    prob *= q
                out.append((prob, tuple(t for _, t in combo)))
        return out

    def complete(tree, k):
        if k == 0:
            return True
        return sum(complete(ch, k - 1) for ch in tree) >= N

    def size(tree):
        return 1 if tree is None else 1 + sum(size(ch) for ch in tree)

    result: dict = {}
    for prob, tree in trees(n):
        if n == 0:
            key = (1, 1)
        else:
            hits = sum(complete(ch, n - 1) for ch in tree)
            key = (hits // N, size(tree))
        result[key] = result.get(key, 0.0) + prob
    return result
