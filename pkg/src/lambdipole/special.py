"""Bessel functions of the first kind, orders 0 and 1, and the first zero of J1.

Small arguments use the ascending power series; larger ones use Miller's
backward recurrence normalised by ``J0 + 2 * sum(J_2k) = 1``.
"""
from __future__ import annotations

import math

import numpy as np

__all__ = ["bessel_j", "first_zero_j1"]

# Past this the alternating series loses more than ~3 digits to cancellation.
_SERIES_MAX = 8.0
_SERIES_TERMS = 40


def _series(order: int, r: np.ndarray) -> np.ndarray:
    """Ascending series sum_k (-1)^k (r/2)^(2k+n) / (k! (k+n)!)."""
    half = 0.5 * r
    q = -half * half
    term = half**order / math.factorial(order)
    total = np.array(term, dtype=float, copy=True)
    for k in range(1, _SERIES_TERMS):
        term = term * q / (k * (k + order))
        total = total + term
    return total


def _miller(r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """J0 and J1 by downward recurrence, for r > 0."""
    rmax = float(r.max())
    start = 2 * ((int(rmax) + int(math.sqrt(160.0 * rmax)) + 20) // 2)
    j_next = np.zeros_like(r)
    j_cur = np.full_like(r, 1e-30)
    norm = np.zeros_like(r)
    j0 = j1 = None
    for n in range(start, 0, -1):
        j_prev = (2.0 * n / r) * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        # j_cur now holds J_{n-1}
        if (n - 1) % 2 == 0 and n - 1 > 0:
            norm = norm + 2.0 * j_cur
        if n - 1 == 1:
            j1 = j_cur.copy()
        # keep magnitudes bounded
        big = np.abs(j_cur) > 1e250
        if big.any():
            scale = np.where(big, 1e-250, 1.0)
            j_cur = j_cur * scale
            j_next = j_next * scale
            norm = norm * scale
            j1 = None if j1 is None else j1 * scale
    j0 = j_cur
    norm = norm + j0
    return j0 / norm, j1 / norm


def _check_argument(r) -> np.ndarray:
    arr = np.asarray(r, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("Bessel argument must be finite")
    if np.any(arr < 0):
        raise ValueError("Bessel argument must be non-negative")
    return arr


def _bessel_any(order: int, r) -> np.ndarray:
    arr = _check_argument(r)
    out = np.empty_like(arr)
    small = arr <= _SERIES_MAX
    if small.any():
        out[small] = _series(order, arr[small])
    if (~small).any():
        big = arr[~small]
        if order in (0, 1):
            j0, j1 = _miller(big)
            out[~small] = j0 if order == 0 else j1
        else:
            j0, j1 = _miller(big)
            jn_1, jn = j0, j1
            for n in range(1, order):
                jn_1, jn = jn, (2.0 * n / big) * jn - jn_1
            out[~small] = jn
    return out


def bessel_j(order: int, r):
    """J_order(r) for order in {0, 1} and real r >= 0.

    Accepts scalars or arrays; a scalar in gives a float out.
    """
    if order not in (0, 1):
        raise ValueError(f"only orders 0 and 1 are supported, got {order}")
    out = _bessel_any(order, r)
    return float(out) if out.ndim == 0 else out


def _j1_prime(r: float) -> float:
    return bessel_j(0, r) - bessel_j(1, r) / r


def first_zero_j1() -> float:
    """First positive zero of J1 (about 3.8317)."""
    lo, hi = 3.0, 4.0
    f_lo = bessel_j(1, lo)
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        f_mid = bessel_j(1, mid)
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    for _ in range(5):
        step = bessel_j(1, x) / _j1_prime(x)
        x -= step
        if abs(step) < 1e-16:
            break
    return x


C0 = first_zero_j1()
