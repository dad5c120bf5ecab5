"""Bessel functions J and Y for the orders used in two and three dimensions.

Supported orders are 0, 1/2, 1, 3/2, 2 and 5/2.  All evaluators accept
scalars or numpy arrays and return the same shape.

Integer orders use three regimes:

* ``x <= 8``: ascending power series (J) and the logarithmic series (Y);
* ``8 < x <= 25``: Miller backward recurrence normalised by
  ``J0 + 2 sum J_2k = 1``, with Y from the Neumann series;
* ``x > 25``: Hankel asymptotic expansion.

Half-integer orders use the elementary closed forms, except that J below
``x = 1`` is taken from the ascending series to avoid cancellation.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

__all__ = [
    "SUPPORTED_ORDERS",
    "BesselDomainError",
    "bessel",
    "besselj",
    "bessely",
    "bessel_derivative",
    "first_zero",
]

SUPPORTED_ORDERS = (0.0, 0.5, 1.0, 1.5, 2.0, 2.5)

EULER_GAMMA = 0.57721566490153286061

_SERIES_MAX = 8.0
_MILLER_MAX = 25.0
_MILLER_START = 80
_SERIES_TERMS = 40
_HANKEL_TERMS = 20
_HALF_SERIES_MAX = 1.0


class BesselDomainError(ValueError):
    """Argument or order outside the supported domain."""


def _check_order(nu) -> float:
    try:
        nu = float(Fraction(nu).limit_denominator(2))
    except (TypeError, ValueError) as exc:
        raise BesselDomainError(f"unsupported Bessel order {nu!r}") from exc
    if nu not in SUPPORTED_ORDERS:
        raise BesselDomainError(f"unsupported Bessel order {nu!r}")
    return nu


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _ret(arr, scalar):
    return float(arr) if scalar else arr


# ---------------------------------------------------------------- integer orders


def _series_j(x, n):
    """Ascending series for J_n, n a non-negative integer or half-integer."""
    half = 0.5 * x
    term = half**n / math.gamma(n + 1.0)
    total = term.copy()
    q = -half * half
    for m in range(1, _SERIES_TERMS):
        term = term * q / (m * (m + n))
        total = total + term
    return total


def _series_y01(x):
    half = 0.5 * x
    q = -half * half
    log_term = np.log(half) + EULER_GAMMA
    j0 = _series_j(x, 0)
    j1 = _series_j(x, 1)

    # Y0 = (2/pi)[(ln(x/2)+gamma) J0 + sum_{m>=1} (-1)^{m+1} H_m (x^2/4)^m / (m!)^2]
    acc0 = np.zeros_like(x)
    term = np.ones_like(x)
    harmonic = 0.0
    for m in range(1, _SERIES_TERMS):
        term = term * q / (m * m)
        harmonic += 1.0 / m
        acc0 = acc0 - harmonic * term
    y0 = (2.0 / math.pi) * (log_term * j0 + acc0)

    # Y1 = -2/(pi x) + (2/pi) ln(x/2) J1
    #      - (1/pi) sum_k (psi(k+1)+psi(k+2)) (-x^2/4)^k (x/2) / (k!(k+1)!)
    acc1 = np.zeros_like(x)
    term = half.copy()
    h_k = 0.0
    for k in range(_SERIES_TERMS):
        if k > 0:
            term = term * q / (k * (k + 1))
            h_k += 1.0 / k
        psi_sum = (h_k - EULER_GAMMA) + (h_k + 1.0 / (k + 1) - EULER_GAMMA)
        acc1 = acc1 + psi_sum * term
    y1 = -2.0 / (math.pi * x) + (2.0 / math.pi) * np.log(half) * j1 - acc1 / math.pi
    return j0, j1, y0, y1


def _miller(x):
    """J_0, J_1 and Y_0, Y_1 at moderate x from one normalised backward sweep."""
    n_top = _MILLER_START
    js = [None] * (n_top + 2)
    js[n_top + 1] = np.zeros_like(x)
    js[n_top] = np.full_like(x, 1e-30)
    two_over_x = 2.0 / x
    for n in range(n_top, 0, -1):
        js[n - 1] = n * two_over_x * js[n] - js[n + 1]
        big = np.abs(js[n - 1]) > 1e250
        if np.any(big):
            scale = np.where(big, 1e-250, 1.0)
            for idx in range(n - 1, n_top + 2):
                js[idx] = js[idx] * scale
    # J0 + 2 sum_k J_2k = 1
    norm = js[0] + 2.0 * sum(js[2 * k] for k in range(1, n_top // 2 + 1))
    js = [v / norm for v in js]
    j0, j1 = js[0], js[1]
    log_term = np.log(0.5 * x) + EULER_GAMMA
    even = np.zeros_like(x)
    odd = np.zeros_like(x)
    for k in range(1, n_top // 2):
        sign = -1.0 if k % 2 else 1.0
        even = even + sign * js[2 * k] / k
        odd = odd + sign * (js[2 * k - 1] - js[2 * k + 1]) / (2.0 * k)
    # Y0 = (2/pi)(ln(x/2)+gamma) J0 - (4/pi) sum_k (-1)^k J_2k / k, and Y1 = -Y0'
    y0 = (2.0 / math.pi) * (log_term * j0 - 2.0 * even)
    y1 = -(2.0 / math.pi) * (j0 / x - log_term * j1) + (4.0 / math.pi) * odd
    return j0, j1, y0, y1


def _hankel(x, nu):
    mu = 4.0 * nu * nu
    p = np.ones_like(x)
    q = np.zeros_like(x)
    inv8x = 1.0 / (8.0 * x)
    term = np.ones_like(x)
    for k in range(1, 2 * _HANKEL_TERMS):
        term = term * (mu - (2 * k - 1) ** 2) * inv8x / k
        sign = -1.0 if ((k // 2) % 2) else 1.0
        if k % 2 == 0:
            p = p + sign * term
        else:
            q = q + sign * term
    chi = x - (0.5 * nu + 0.25) * math.pi
    amp = np.sqrt(2.0 / (math.pi * x))
    c, s = np.cos(chi), np.sin(chi)
    return amp * (p * c - q * s), amp * (p * s + q * c)


def _integer_jy(x):
    """Return (J0, J1, Y0, Y1) for positive array x."""
    j0 = np.empty_like(x)
    j1 = np.empty_like(x)
    y0 = np.empty_like(x)
    y1 = np.empty_like(x)
    low = x <= _SERIES_MAX
    mid = (x > _SERIES_MAX) & (x <= _MILLER_MAX)
    high = x > _MILLER_MAX
    if np.any(low):
        a, b, c, d = _series_y01(x[low])
        j0[low], j1[low], y0[low], y1[low] = a, b, c, d
    if np.any(mid):
        a, b, c, d = _miller(x[mid])
        j0[mid], j1[mid], y0[mid], y1[mid] = a, b, c, d
    if np.any(high):
        xs = x[high]
        j0[high], y0[high] = _hankel(xs, 0.0)
        j1[high], y1[high] = _hankel(xs, 1.0)
    return j0, j1, y0, y1


def _integer_j(x, n):
    """J_n for n in {0, 1, 2} at non-negative x (x = 0 allowed)."""
    out = np.empty_like(x)
    zero = x == 0.0
    out[zero] = 1.0 if n == 0 else 0.0
    pos = ~zero
    if np.any(pos):
        xp = x[pos]
        low = xp <= _SERIES_MAX
        res = np.empty_like(xp)
        if np.any(low):
            res[low] = _series_j(xp[low], n)
        if np.any(~low):
            j0, j1, _, _ = _integer_jy(xp[~low])
            res[~low] = (j0, j1, 2.0 * j1 / xp[~low] - j0)[n]
        out[pos] = res
    return out


# ---------------------------------------------------------- half-integer orders


def _half_j(x, nu):
    amp = np.sqrt(2.0 / (math.pi * x))
    s, c = np.sin(x), np.cos(x)
    if nu == -0.5:
        return amp * c
    if nu == 0.5:
        return amp * s
    if nu == 1.5:
        closed = amp * (s / x - c)
    else:
        closed = amp * ((3.0 / (x * x) - 1.0) * s - 3.0 * c / x)
    small = x < _HALF_SERIES_MAX
    if np.any(small):
        closed = np.where(small, _series_j(np.where(small, x, 1.0), nu), closed)
    return closed


def _half_y(x, nu):
    amp = np.sqrt(2.0 / (math.pi * x))
    s, c = np.sin(x), np.cos(x)
    if nu == -0.5:
        return amp * s
    if nu == 0.5:
        return -amp * c
    if nu == 1.5:
        return -amp * (c / x + s)
    return amp * (-(3.0 / (x * x) - 1.0) * c - 3.0 * s / x)


# ------------------------------------------------------------------ public API


def _eval(kind: str, nu: float, x):
    """Evaluate without order validation; nu may also be -1/2 or -1."""
    if nu == -1.0:
        return -_eval(kind, 1.0, x)
    if nu != int(nu):
        return _half_j(x, nu) if kind == "J" else _half_y(x, nu)
    n = int(nu)
    if kind == "J":
        return _integer_j(x, n)
    j0, j1, y0, y1 = _integer_jy(x)
    return (y0, y1, 2.0 * y1 / x - y0)[n]


def bessel(kind: str, nu, x):
    """Bessel function ``J_nu(x)`` (``kind="J"``) or ``Y_nu(x)`` (``kind="Y"``).

    ``x`` must be positive; ``J`` of integer order also accepts ``x = 0``.
    Raises :class:`BesselDomainError` otherwise.
    """
    kind = kind.upper()
    if kind not in ("J", "Y"):
        raise BesselDomainError(f"unknown Bessel kind {kind!r}")
    nu = _check_order(nu)
    arr, scalar = _as_array(x)
    if np.any(~np.isfinite(arr)):
        raise BesselDomainError("non-finite argument")
    allow_zero = kind == "J" and nu == int(nu)
    if np.any(arr < 0.0) or (not allow_zero and np.any(arr == 0.0)):
        raise BesselDomainError(f"{kind}_{nu}(x) requires x > 0")
    flat = np.atleast_1d(arr).astype(float).ravel()
    out = _eval(kind, nu, flat).reshape(arr.shape)
    return _ret(out, scalar)


def besselj(nu, x):
    return bessel("J", nu, x)


def bessely(nu, x):
    return bessel("Y", nu, x)


def bessel_derivative(kind: str, nu, x):
    """d/dx of J_nu or Y_nu via C'_nu = C_{nu-1} - (nu/x) C_nu."""
    kind = kind.upper()
    if kind not in ("J", "Y"):
        raise BesselDomainError(f"unknown Bessel kind {kind!r}")
    nu = _check_order(nu)
    arr, scalar = _as_array(x)
    if np.any(~(arr > 0.0)):
        raise BesselDomainError("derivative requires x > 0")
    flat = np.atleast_1d(arr).astype(float).ravel()
    out = _eval(kind, nu - 1.0, flat) - (nu / flat) * _eval(kind, nu, flat)
    return _ret(out.reshape(arr.shape), scalar)


_ZERO_CACHE: dict[float, float] = {}


def first_zero(nu) -> float:
    """First positive zero j_{nu,1} of J_nu.

    Sign-change scan of [0.1, 10] at step 0.05, then bisection polished by
    Newton steps.
    """
    nu = _check_order(nu)
    if nu in _ZERO_CACHE:
        return _ZERO_CACHE[nu]
    grid = np.arange(0.1, 10.0 + 1e-12, 0.05)
    vals = _eval("J", nu, grid)
    idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0)[0]
    if idx.size == 0:  # pragma: no cover - all supported orders have a zero below 10
        raise BesselDomainError(f"no zero of J_{nu} found below 10")
    lo, hi = float(grid[idx[0]]), float(grid[idx[0] + 1])
    f_lo = float(_eval("J", nu, np.array([lo]))[0])
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        f_mid = float(_eval("J", nu, np.array([mid]))[0])
        if f_mid == 0.0:
            lo = hi = mid
            break
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
        if hi - lo < 1e-13:
            break
    root = 0.5 * (lo + hi)
    for _ in range(3):
        xr = np.array([root])
        f = float(_eval("J", nu, xr)[0])
        df = float((_eval("J", nu - 1.0, xr) - (nu / xr) * _eval("J", nu, xr))[0])
        if df == 0.0:
            break
        step = f / df
        root -= step
        if abs(step) < 1e-16 * root:
            break
    _ZERO_CACHE[nu] = root
    return root
