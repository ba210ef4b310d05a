"""Truncated power series in the progeny variable s.

A ``TruncatedSeries`` holds the coefficients c_0..c_T of a power series and
silently drops every degree above T.  All series built from progeny
generating functions have non-negative powers only, so the retained prefix
is exact.
"""
from __future__ import annotations

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, TruncationMismatch
from .offspring import OffspringLaw


class TruncatedSeries:
    __slots__ = ("_c",)

    def __init__(self, coeffs, T: int | None = None):
        c = np.array(coeffs, dtype=float).ravel()
        if T is not None:
            if T < 0:
                raise ValueError("truncation degree must be >= 0")
            if c.size > T + 1:
                c = c[: T + 1]
            elif c.size < T + 1:
                c = np.concatenate([c, np.zeros(T + 1 - c.size)])
        if c.size == 0:
            raise ValueError("a series needs at least one coefficient")
        c.setflags(write=False)
        self._c = c

    # -- constructors ---------------------------------------------------
    @classmethod
    def zero(cls, T: int) -> "TruncatedSeries":
        return cls(np.zeros(T + 1))

    @classmethod
    def constant(cls, value: float, T: int) -> "TruncatedSeries":
        c = np.zeros(T + 1)
        c[0] = value
        return cls(c)

    @classmethod
    def monomial(cls, degree: int, T: int, coeff: float = 1.0) -> "TruncatedSeries":
        c = np.zeros(T + 1)
        if degree <= T:
            c[degree] = coeff
        return cls(c)

    # -- basic access ---------------------------------------------------
    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def T(self) -> int:
        return self._c.size - 1

    def __len__(self) -> int:
        return self._c.size

    def __getitem__(self, t):
        return self._c[t]

    def __call__(self, s):
        """Evaluate the retained polynomial at s."""
        return np.polynomial.polynomial.polyval(s, self._c)

    def __repr__(self) -> str:
        return f"TruncatedSeries({np.array2string(self._c, precision=6, threshold=12)}, T={self.T})"

    def __eq__(self, other):
        return isinstance(other, TruncatedSeries) and np.array_equal(self._c, other._c)

    __hash__ = None

    def allclose(self, other: "TruncatedSeries", atol: float = 1e-12) -> bool:
        self._match(other)
        return bool(np.allclose(self._c, other._c, rtol=0.0, atol=atol))

    # -- arithmetic -----------------------------------------------------
    def _match(self, other: "TruncatedSeries") -> None:
        if not isinstance(other, TruncatedSeries):
            raise TypeError(f"expected TruncatedSeries, got {type(other).__name__}")
        if other.T != self.T:
            raise TruncationMismatch(f"truncation degrees differ: {self.T} vs {other.T}")

    def __add__(self, other):
        if isinstance(other, (int, float)):
            c = self._c.copy()
            c[0] += other
            return TruncatedSeries(c)
        self._match(other)
        return TruncatedSeries(self._c + other._c)

    __radd__ = __add__

    def __sub__(self, other):
        self._match(other)
        return TruncatedSeries(self._c - other._c)

    def __neg__(self):
        return TruncatedSeries(-self._c)

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating)):
            return self.scale(float(other))
        self._match(other)
        n = self._c.size
        return TruncatedSeries(np.convolve(self._c, other._c)[:n])

    def __rmul__(self, other):
        if isinstance(other, (int, float, np.floating)):
            return self.scale(float(other))
        return NotImplemented

    def scale(self, c: float) -> "TruncatedSeries":
        return TruncatedSeries(c * self._c)

    def shift(self) -> "TruncatedSeries":
        """Multiply by s."""
        c = np.zeros_like(self._c)
        c[1:] = self._c[:-1]
        return TruncatedSeries(c)

    def __pow__(self, k: int) -> "TruncatedSeries":
        if int(k) != k or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = TruncatedSeries.constant(1.0, self.T)
        base = self
        k = int(k)
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result


def _binomial_weights(law: OffspringLaw, k: int, top: int) -> np.ndarray:
    """w_i = p_i C(i, k) for i = k..top."""
    c = law.coeffs
    top = min(top, c.size - 1)
    if top < k:
        return np.zeros(0)
    i = np.arange(k, top + 1)
    p = c[k: top + 1]
    with np.errstate(divide="ignore"):
        logw = np.log(p) + gammaln(i + 1.0) - gammaln(k + 1.0) - gammaln(i - k + 1.0)
    return np.where(p > 0.0, np.exp(logw), 0.0)


def series_taylor_coeff(law: OffspringLaw, k: int, phi: TruncatedSeries) -> TruncatedSeries:
    """Truncated series of T_k(phi(s)) = sum_{i>=k} p_i C(i, k) phi(s)^(i-k).

    Horner evaluation over the law's probability list.  When phi has zero
    constant term, phi^d vanishes below degree d, so terms with i - k > T are
    dropped exactly.
    """
    if k < 0:
        raise DomainError("derivative order must be non-negative")
    c0 = phi.coeffs[0]
    if not 0.0 <= c0 < 1.0:
        raise DomainError(f"constant term of phi must lie in [0, 1), got {c0!r}")
    T = phi.T
    top = k + T if c0 == 0.0 else law.coeffs.size - 1
    w = _binomial_weights(law, k, top)
    if w.size == 0:
        return TruncatedSeries.zero(T)
    nz = np.flatnonzero(w)
    if nz.size == 0:
        return TruncatedSeries.zero(T)
    w = w[: nz[-1] + 1]
    phi_c = phi.coeffs
    acc = np.zeros(T + 1)
    acc[0] = w[-1]
    for wi in w[-2::-1]:
        acc = np.convolve(acc, phi_c)[: T + 1]
        acc[0] += wi
    return TruncatedSeries(acc)


def series_g_eval(
    law: OffspringLaw, psi: TruncatedSeries, phi: TruncatedSeries, j: int, N: int
) -> TruncatedSeries:
    """Truncated series of G_N(psi(s), phi(s); j)."""
    psi._match(phi)
    if int(N) != N or N < 1 or int(j) != j or j < 0:
        raise DomainError("need N >= 1 and j >= 0")
    if not 0.0 <= psi.coeffs[0] < 1.0:
        raise DomainError("constant term of psi must lie in [0, 1)")
    T = psi.T
    out = TruncatedSeries.zero(T)
    k_lo = j * N
    if psi.coeffs[0] == 0.0 and k_lo > T:
        return out
    finite = law.support_max
    power = psi ** k_lo
    for k in range(k_lo, k_lo + N):
        if finite is not None and k > finite:
            break
        if not power.coeffs.any():
            break
        out = out + power * series_taylor_coeff(law, k, phi)
        power = power * psi
    return out


def compose_pgf(law: OffspringLaw, h: TruncatedSeries) -> TruncatedSeries:
    """f(h(s)) by direct summation of p_i h^i (no Taylor machinery)."""
    T = h.T
    c = law.coeffs
    top = c.size - 1 if h.coeffs[0] != 0.0 else min(c.size - 1, T)
    out = np.zeros(T + 1)
    power = TruncatedSeries.constant(1.0, T)
    for i in range(top + 1):
        if c[i] > 0.0:
            out += c[i] * power.coeffs
        power = power * h
    return TruncatedSeries(out)

