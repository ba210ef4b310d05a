"""Offspring laws of a Galton-Watson process.

Every law exposes its pgf ``f``, the scaled Taylor coefficients
``T_k(y) = f^(k)(y) / k!`` (never the raw derivative, which overflows for
large ``k``), its mean, its probability list and an exact sampler.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Mapping

import numpy as np
from scipy import stats
from scipy.special import gammaln, xlogy

from .errors import DomainError, ParamOutOfRange, PmfNotNormalized, UnsupportedFamily

EPS_TAIL = 1e-12
MAX_GENERIC_LEN = 10**6 + 1


def _check_unit(name: str, value) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError(f"{name} must lie in [0, 1], got {value!r}")
    return arr


def _as_result(arr: np.ndarray):
    return float(arr) if arr.ndim == 0 else arr


def _log_binom(i, k):
    return gammaln(i + 1.0) - gammaln(k + 1.0) - gammaln(i - k + 1.0)


class OffspringLaw:
    """Common interface; concrete families are the subclasses below."""

    family: str = "abstract"
    epsilon_tail: float = EPS_TAIL

    # -- to be provided by subclasses -------------------------------------
    @property
    def mean(self) -> float:
        raise NotImplementedError

    @cached_property
    def coeffs(self) -> np.ndarray:
        """Probabilities p_0..p_K, truncated where the tail mass drops below
        ``epsilon_tail`` for infinite-support laws."""
        raise NotImplementedError

    def _pgf(self, s: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _log_terms(self, k: np.ndarray, x: float, y: float) -> np.ndarray:
        """log of x^k T_k(y) for an integer array ``k`` (may be -inf)."""
        raise NotImplementedError

    def to_dict(self) -> dict[str, Any]:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError

    # -- shared -----------------------------------------------------------
    @property
    def support_max(self) -> int | None:
        """Largest k with p_k > 0, or None for infinite support."""
        return None

    def pgf(self, s):
        """f(s) for s in [0, 1]; accepts scalars or arrays."""
        s = _check_unit("s", s)
        return _as_result(np.asarray(self._pgf(s), dtype=float))

    def scaled_terms(self, k, x: float, y: float) -> np.ndarray:
        """Vector of x^k T_k(y) for the integer array ``k``.

        Terms are assembled in log space so that neither the factorial nor
        the power over/underflows; ``0**0`` is taken as 1.
        """
        _check_unit("x", x)
        _check_unit("y", y)
        k = np.atleast_1d(np.asarray(k, dtype=np.int64))
        if np.any(k < 0):
            raise DomainError("derivative order must be non-negative")
        out = np.zeros(k.shape, dtype=float)
        zero = k == 0
        if np.any(zero):
            out[zero] = float(self._pgf(np.asarray(float(y))))
        rest = ~zero
        if np.any(rest):
            with np.errstate(divide="ignore", under="ignore"):
                out[rest] = np.exp(self._log_terms(k[rest], float(x), float(y)))
        return out

    def taylor_coeff(self, k: int, y: float) -> float:
        """T_k(y) = f^(k)(y) / k!."""
        if k < 0:
            raise DomainError("derivative order must be non-negative")
        return float(self.scaled_terms([k], 1.0, y)[0])

    def standing_assumption(self, N: int) -> bool:
        """True when p_k < 1 for all k and p_k > 0 for some k > N."""
        c = self.coeffs
        if np.any(c >= 1.0):
            return False
        if self.support_max is None:
            return True
        return bool(np.any(c[N + 1:] > 0.0))

    def __repr__(self) -> str:
        params = ", ".join(f"{k}={v!r}" for k, v in self.to_dict().items() if k != "family")
        return f"{type(self).__name__}({params})"


@dataclass(frozen=True, repr=False)
class FractionalLinear(OffspringLaw):
    """f(s) = 1 - b/(1-p) + b s / (1 - p s), with 0 < p < 1 and 0 < b <= 1 - p."""

    p: float
    b: float
    epsilon_tail: float = EPS_TAIL
    family = "fractional-linear"

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ParamOutOfRange(f"p must be in (0, 1), got {self.p}")
        if not 0.0 < self.b <= 1.0 - self.p + 1e-15:
            raise ParamOutOfRange(f"b must be in (0, 1-p], got {self.b}")

    @property
    def p0(self) -> float:
        return max(0.0, 1.0 - self.b / (1.0 - self.p))

    @property
    def mean(self) -> float:
        return self.b / (1.0 - self.p) ** 2

    @cached_property
    def coeffs(self) -> np.ndarray:
        p, b = self.p, self.b
        # tail beyond K is b p^K / (1 - p)
        K = max(1, math.ceil(math.log(self.epsilon_tail * (1.0 - p) / b) / math.log(p)))
        k = np.arange(1, K + 1)
        c = np.empty(K + 1)
        c[0] = self.p0
        c[1:] = b * p ** (k - 1.0)
        return c

    def _pgf(self, s):
        return self.p0 + self.b * s / (1.0 - self.p * s)

    def _log_terms(self, k, x, y):
        p, b = self.p, self.b
        denom = math.log1p(-p * y)
        return math.log(b) - math.log(p) - denom + xlogy(k, p * x) - k * denom

    def to_dict(self):
        return {"family": self.family, "p": self.p, "b": self.b}

    def sample(self, rng, size=None):
        u = rng.random(size)
        p0 = self.p0
        v = np.clip((u - p0) / (1.0 - p0), 0.0, 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = 1 + np.floor(np.log1p(-v) / math.log(self.p))
        out = np.where(u < p0, 0, g).astype(np.int64)
        return int(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True, repr=False)
class Geometric(FractionalLinear):
    """p_k = (1 - p) p^k, k >= 0, mean p / (1 - p)."""

    p: float
    b: float = field(init=False)
    epsilon_tail: float = EPS_TAIL
    family = "geometric"

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ParamOutOfRange(f"p must be in (0, 1), got {self.p}")
        object.__setattr__(self, "b", self.p * (1.0 - self.p))

    @classmethod
    def from_mean(cls, m: float, **kw) -> "Geometric":
        if not m > 0:
            raise ParamOutOfRange(f"mean must be positive, got {m}")
        return cls(m / (1.0 + m), **kw)

    @property
    def p0(self) -> float:
        return 1.0 - self.p

    @property
    def mean(self) -> float:
        return self.p / (1.0 - self.p)

    def _pgf(self, s):
        return (1.0 - self.p) / (1.0 - self.p * s)

    def to_dict(self):
        return {"family": self.family, "p": self.p}

    def sample(self, rng, size=None):
        u = rng.random(size)
        out = np.floor(np.log1p(-u) / math.log(self.p)).astype(np.int64)
        return int(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True, repr=False)
class Poisson(OffspringLaw):
    m: float
    epsilon_tail: float = EPS_TAIL
    family = "poisson"

    def __post_init__(self):
        if not (self.m > 0 and math.isfinite(self.m)):
            raise ParamOutOfRange(f"m must be positive, got {self.m}")

    @property
    def mean(self) -> float:
        return self.m

    @cached_property
    def coeffs(self) -> np.ndarray:
        m = self.m
        hi = int(m + 50.0 * math.sqrt(m) + 50)
        sf = stats.poisson.sf(np.arange(hi), m)
        K = int(np.argmax(sf < self.epsilon_tail))
        k = np.arange(K + 1)
        return np.exp(xlogy(k, m) - m - gammaln(k + 1.0))

    def _pgf(self, s):
        return np.exp(self.m * (s - 1.0))

    def _log_terms(self, k, x, y):
        m = self.m
        return xlogy(k, m * x) - m * (1.0 - y) - gammaln(k + 1.0)

    def to_dict(self):
        return {"family": self.family, "m": self.m}

    def sample(self, rng, size=None):
        out = rng.poisson(self.m, size)
        return int(out) if np.ndim(out) == 0 else out.astype(np.int64)


class _FiniteSupport(OffspringLaw):
    """Shared machinery for laws given by a finite probability list."""

    @property
    def support_max(self) -> int:
        nz = np.flatnonzero(self.coeffs > 0.0)
        return int(nz[-1]) if nz.size else 0

    @property
    def mean(self) -> float:
        c = self.coeffs
        return float(np.dot(np.arange(c.size), c))

    @cached_property
    def _cdf(self) -> np.ndarray:
        cdf = np.cumsum(self.coeffs)
        cdf[-1] = max(cdf[-1], 1.0)
        return cdf

    @cached_property
    def _log_p(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.coeffs)

    def _pgf(self, s):
        return np.polynomial.polynomial.polyval(s, self.coeffs)

    def _log_terms(self, k, x, y):
        c, logp = self.coeffs, self._log_p
        K = c.size - 1
        out = np.full(k.shape, -np.inf)
        for idx, kk in enumerate(k):
            if kk > K:
                continue
            i = np.arange(kk, K + 1)
            lp = logp[kk:]
            keep = np.isfinite(lp)
            if not keep.any():
                continue
            i = i[keep]
            w = lp[keep] + _log_binom(i, kk) + xlogy(i - kk, y) + xlogy(kk, x)
            top = np.max(w)
            if top == -np.inf:
                continue
            out[idx] = top + math.log(np.sum(np.exp(w - top)))
        return out

    def sample(self, rng, size=None):
        u = rng.random(size)
        out = np.searchsorted(self._cdf, u, side="right")
        return int(out) if np.ndim(out) == 0 else out.astype(np.int64)


@dataclass(frozen=True, repr=False)
class OneOrMany(_FiniteSupport):
    """p_1 = 1 - p, p_r = p: f(s) = (1 - p) s + p s^r."""

    p: float
    r: int
    epsilon_tail: float = EPS_TAIL
    family = "one-or-many"

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ParamOutOfRange(f"p must be in (0, 1), got {self.p}")
        if int(self.r) != self.r or self.r <= 1:
            raise ParamOutOfRange(f"r must be an integer > 1, got {self.r}")
        object.__setattr__(self, "r", int(self.r))

    @property
    def mean(self) -> float:
        return (1.0 - self.p) + self.p * self.r

    @cached_property
    def coeffs(self) -> np.ndarray:
        c = np.zeros(self.r + 1)
        c[1] = 1.0 - self.p
        c[self.r] = self.p
        return c

    def _pgf(self, s):
        return (1.0 - self.p) * s + self.p * s**self.r

    def to_dict(self):
        return {"family": self.family, "p": self.p, "r": self.r}

    def sample(self, rng, size=None):
        u = rng.random(size)
        out = np.where(u < self.p, self.r, 1).astype(np.int64)
        return int(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True, repr=False, eq=False)
class Generic(_FiniteSupport):
    """Arbitrary finite pmf p_0..p_K; it must already sum to one."""

    probs: tuple
    epsilon_tail: float = EPS_TAIL
    family = "generic"

    def __post_init__(self):
        c = np.asarray(self.probs, dtype=float).ravel()
        if c.size == 0 or c.size > MAX_GENERIC_LEN:
            raise ParamOutOfRange(f"need 1..{MAX_GENERIC_LEN} coefficients, got {c.size}")
        if np.any(~np.isfinite(c)) or np.any(c < 0.0) or np.any(c > 1.0):
            raise ParamOutOfRange("probabilities must lie in [0, 1]")
        total = math.fsum(c)
        if abs(total - 1.0) > 1e-9:
            raise PmfNotNormalized(f"probabilities sum to {total!r}, not 1")
        c.setflags(write=False)
        object.__setattr__(self, "probs", tuple(c.tolist()))
        object.__setattr__(self, "_arr", c)

    @cached_property
    def coeffs(self) -> np.ndarray:
        return self._arr

    def __eq__(self, other):
        return isinstance(other, Generic) and self.probs == other.probs

    def __hash__(self):
        return hash(self.probs)

    def to_dict(self):
        return {"family": self.family, "coeffs": list(self.probs)}


def materialize(law: OffspringLaw) -> Generic:
    """Generic copy of ``law`` built from its (truncated) probability list."""
    c = np.array(law.coeffs, dtype=float)
    c[0] += 1.0 - math.fsum(c)  # fold the truncated tail mass into p_0
    return Generic(tuple(c))


def make_law(spec: Mapping[str, Any]) -> OffspringLaw:
    """Build a law from a JSON-style mapping such as ``{"family": "poisson", "m": 13}``.

    Geometric laws accept either ``p`` or the mean ``m``.
    """
    spec = dict(spec)
    family = str(spec.pop("family", "")).lower().replace("_", "-")
    eps = spec.pop("epsilon_tail", EPS_TAIL)
    try:
        if family == "geometric":
            if "p" in spec:
                return Geometric(float(spec["p"]), epsilon_tail=eps)
            return Geometric.from_mean(float(spec["m"]), epsilon_tail=eps)
        if family in ("fractional-linear", "fractional"):
            return FractionalLinear(float(spec["p"]), float(spec["b"]), epsilon_tail=eps)
        if family == "poisson":
            return Poisson(float(spec["m"]), epsilon_tail=eps)
        if family in ("one-or-many", "oneormany"):
            return OneOrMany(float(spec["p"]), spec["r"], epsilon_tail=eps)
        if family == "generic":
            return Generic(tuple(spec["coeffs"]), epsilon_tail=eps)
    except KeyError as exc:
        raise ParamOutOfRange(f"missing parameter {exc.args[0]!r} for family {family!r}") from None
    raise UnsupportedFamily(f"unknown offspring family {family!r}")
