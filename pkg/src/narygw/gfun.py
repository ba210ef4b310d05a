"""Band sums of the Taylor expansion of the offspring pgf.

``g_eval(law, N, j, x, y)`` is

    G_N(x, y; j) = sum_{k=jN}^{jN+N-1} x^k f^(k)(y) / k!,

the j-th block of N consecutive terms of the expansion of f(x + y) about y.
"""
from __future__ import annotations

import numpy as np

from .errors import DomainError
from .offspring import OffspringLaw

BAND_STOP = 1e-15


def _check(N: int, j: int) -> None:
    if int(N) != N or N < 1:
        raise DomainError(f"N must be a positive integer, got {N!r}")
    if int(j) != j or j < 0:
        raise DomainError(f"j must be a non-negative integer, got {j!r}")


def g_eval(law: OffspringLaw, N: int, j: int, x: float, y: float) -> float:
    """G_N(x, y; j) for x, y in [0, 1]."""
    _check(N, j)
    k = np.arange(j * N, j * N + N)
    return float(np.sum(law.scaled_terms(k, x, y)))


def g_bands(law: OffspringLaw, N: int, x: float, y: float, j_max: int) -> np.ndarray:
    """Array of G_N(x, y; j) for j = 0..j_max in one vectorised pass."""
    _check(N, j_max)
    terms = law.scaled_terms(np.arange((j_max + 1) * N), x, y)
    return terms.reshape(j_max + 1, N).sum(axis=1)


def g0_slope(law: OffspringLaw, N: int, x: float) -> float:
    """d/dx G_N(1 - x, x; 0) = N (1 - x)^(N-1) T_N(x) >= 0.

    The derivative telescopes down to a single term, which is what makes
    x -> G_N(1 - x, x; 0) non-decreasing on [0, 1] (equivalently
    x -> G_N(x, 1 - x; 0) non-increasing).
    """
    _check(N, 0)
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x must lie in [0, 1], got {x!r}")
    return N * (1.0 - x) ** (N - 1) * law.taylor_coeff(N, x)


def partition_sum(law: OffspringLaw, N: int, x: float, max_bands: int = 100_000):
    """Sum G_N(x, 1 - x; j) over j until, past the bulk, a band adds < 1e-15.

    Returns ``(total, bands_used)``; the total is f(1) = 1 up to truncation.
    """
    total = 0.0
    chunk = 64
    j0 = 0
    while j0 < max_bands:
        k = np.arange(j0 * N, (j0 + chunk) * N)
        bands = law.scaled_terms(k, x, 1.0 - x).reshape(chunk, N).sum(axis=1)
        for i, b in enumerate(bands):
            total += b
            if b < BAND_STOP and total > 0.5:
                return total, j0 + i + 1
        j0 += chunk
    return total, j0
