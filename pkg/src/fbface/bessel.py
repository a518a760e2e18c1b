"""Bessel functions of the first kind and their positive zeros.

Arguments up to 12 use the ascending power series; larger arguments use
Miller's downward recurrence normalised with ``J_0 + 2 * sum(J_2k) = 1``.
The series is not used for ``12 < x <= n``: cancellation there costs up to
``I_n(n) * eps`` absolute error, far outside 1e-10 for high orders.

Zeros are bracketed by a coarse scan (consecutive zeros of ``J_n`` are more
than ``pi`` apart) and polished with a safeguarded Newton iteration seeded by
McMahon's expansion.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

MAX_ORDER = 64
SERIES_LIMIT = 12.0

_RESCALE = 1e250


def _check_order(n: int) -> int:
    if int(n) != n or n < 0:
        raise ValueError(f"Bessel order must be a non-negative integer, got {n!r}")
    if n > MAX_ORDER:
        raise ValueError(f"Bessel order {n} exceeds the supported cap {MAX_ORDER}")
    return int(n)


def _series(n: int, x: np.ndarray) -> np.ndarray:
    half = 0.5 * x
    term = np.ones_like(x)
    for k in range(1, n + 1):
        term = term * half / k
    total = term.copy()
    q = -half * half
    k = 0
    while True:
        k += 1
        term = term * q / (k * (k + n))
        total += term
        if np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(total), 1e-300)):
            break
        if k > 500:
            break
    return total


def _miller_start(nmax: int, xmax: float) -> int:
    m = max(nmax, int(xmax)) + 20 + int(math.sqrt(40.0 * max(nmax, xmax, 1.0)))
    return m + (m % 2)


def _miller(nmax: int, x: np.ndarray) -> np.ndarray:
    """All orders ``0..nmax`` at strictly positive ``x``; shape ``(nmax+1, len(x))``."""
    out = np.zeros((nmax + 1, x.size))
    if x.size == 0:
        return out
    m = _miller_start(nmax, float(x.max()))
    two_over_x = 2.0 / x
    j_next = np.zeros_like(x)
    j_cur = np.full_like(x, 1e-300)
    norm = np.zeros_like(x)
    for k in range(m, 0, -1):
        j_prev = k * two_over_x * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        big = np.abs(j_cur) > _RESCALE
        if np.any(big):
            scale = np.where(big, 1.0 / _RESCALE, 1.0)
            j_cur *= scale
            j_next *= scale
            norm *= scale
            out *= scale
        if k - 1 <= nmax:
            out[k - 1] = j_cur
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * j_cur
    norm += j_cur
    return out / norm


def jv_array(n: int, x) -> np.ndarray:
    """Vectorised ``J_n(x)`` for ``x >= 0``."""
    n = _check_order(n)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValueError("Bessel argument must be finite and non-negative")
    flat = x.ravel()
    out = np.empty_like(flat)
    zero = flat == 0.0
    out[zero] = 1.0 if n == 0 else 0.0
    small = ~zero & (flat <= SERIES_LIMIT)
    large = ~zero & ~small
    if np.any(small):
        out[small] = _series(n, flat[small])
    if np.any(large):
        out[large] = _miller(n, flat[large])[n]
    return out.reshape(x.shape)


def jv_orders(nmax: int, x) -> np.ndarray:
    """Table of ``J_0..J_nmax`` at ``x``; shape ``(nmax + 1,) + x.shape``."""
    nmax = _check_order(nmax)
    x = np.asarray(x, dtype=float)
    return np.stack([jv_array(n, x) for n in range(nmax + 1)])


def _series_scalar(n: int, x: float) -> float:
    half = 0.5 * x
    term = 1.0
    for k in range(1, n + 1):
        term *= half / k
    total = term
    q = -half * half
    k = 0
    while k < 500:
        k += 1
        term *= q / (k * (k + n))
        total += term
        if abs(term) <= 1e-17 * abs(total):
            break
    return total


def _miller_scalar(n: int, x: float) -> float:
    m = _miller_start(n, x)
    two_over_x = 2.0 / x
    j_next, j_cur = 0.0, 1e-300
    norm = 0.0
    result = 0.0
    for k in range(m, 0, -1):
        j_prev = k * two_over_x * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        if abs(j_cur) > _RESCALE:
            j_cur /= _RESCALE
            j_next /= _RESCALE
            norm /= _RESCALE
            result /= _RESCALE
        if k - 1 == n:
            result = j_cur
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * j_cur
    norm += j_cur
    return result / norm


def bessel_j(n: int, x: float) -> float:
    """Bessel function of the first kind ``J_n(x)``.

    Parameters
    ----------
    n : int
        Order, ``0 <= n <= MAX_ORDER``.
    x : float
        Non-negative argument.

    Raises
    ------
    ValueError
        If the order is negative, non-integral, above the cap, or ``x < 0``.
    """
    n = _check_order(n)
    x = float(x)
    if x < 0 or not math.isfinite(x):
        raise ValueError("Bessel argument must be finite and non-negative")
    if x == 0.0:
        return 1.0 if n == 0 else 0.0
    if x <= SERIES_LIMIT:
        return _series_scalar(n, x)
    return _miller_scalar(n, x)


def _derivative(n: int, x: float) -> float:
    if n == 0:
        return -bessel_j(1, x)
    return 0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x))


def mcmahon_guess(n: int, i: int) -> float:
    """McMahon's large-root asymptotic for the ``i``-th zero of ``J_n``."""
    mu = 4.0 * n * n
    beta = (i + 0.5 * n - 0.25) * math.pi
    b8 = 8.0 * beta
    return (
        beta
        - (mu - 1.0) / b8
        - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * b8**3)
        - 32.0 * (mu - 1.0) * (83.0 * mu**2 - 982.0 * mu + 3779.0) / (15.0 * b8**5)
    )


def _polish(n: int, lo: float, hi: float, guess: float) -> float:
    f_lo = bessel_j(n, lo)
    x = guess if lo < guess < hi else 0.5 * (lo + hi)
    for _ in range(100):
        fx = bessel_j(n, x)
        if fx == 0.0:
            return x
        if (fx > 0) == (f_lo > 0):
            lo, f_lo = x, fx
        else:
            hi = x
        d = _derivative(n, x)
        step = fx / d if d != 0.0 else math.inf
        x_new = x - step
        if not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= 4e-16 * x_new or hi - lo <= 4e-16 * hi:
            return x_new
        x = x_new
    return x


@lru_cache(maxsize=None)
def _roots(n: int, count: int) -> tuple[float, ...]:
    roots: list[float] = []
    step = 1.0
    # no zero of J_n lies in (0, n]
    a = max(float(n), 0.5)
    fa = bessel_j(n, a)
    while len(roots) < count:
        b = a + step
        fb = bessel_j(n, b)
        if fa == 0.0:
            roots.append(a)
        elif fa * fb < 0.0:
            roots.append(_polish(n, a, b, mcmahon_guess(n, len(roots) + 1)))
        a, fa = b, fb
    return tuple(roots)


def bessel_roots(n: int, count: int) -> list[float]:
    """First ``count`` positive zeros of ``J_n`` in increasing order."""
    n = _check_order(n)
    if count < 1:
        raise ValueError("count must be at least 1")
    return list(_roots(n, int(count)))


@lru_cache(maxsize=None)
def _root_table(max_order: int, max_root: int) -> np.ndarray:
    table = np.array([bessel_roots(n, max_root) for n in range(max_order + 1)])
    table.setflags(write=False)
    return table


def root_table(max_order: int, max_root: int) -> np.ndarray:
    """Read-only array ``alpha[n, i-1]`` of zeros for ``n <= max_order``, ``i <= max_root``."""
    _check_order(max_order)
    if max_root < 1:
        raise ValueError("max_root must be at least 1")
    return _root_table(int(max_order), int(max_root))
