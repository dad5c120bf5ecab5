"""Closed-form radial objects for the operator (Delta + k^2).

Everything here is radial and explicit: the real fundamental solution
vanishing on a sphere, the mean-value constant, the admissible working
radius, the ball-with-point-source profile and the Pompeiu profile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .specialfn import bessel, first_zero

__all__ = [
    "HelmholtzParams",
    "RadialProfile",
    "SingularConfigurationError",
    "NonPositiveConstantError",
    "r_max",
    "fundamental_solution",
    "fundamental_solution_log_remainder",
    "mvt_constant",
    "ball_volume",
    "ball_dirac_example",
    "pompeiu_profile",
    "mollifier_density",
]

_SINGULAR_THRESHOLD = 1e-12


class SingularConfigurationError(ValueError):
    """J_{(n-2)/2}(kR) too close to zero for the fundamental solution."""


class NonPositiveConstantError(ValueError):
    """Mean-value constant is not positive for the requested radius."""


@dataclass(frozen=True)
class HelmholtzParams:
    n: int
    k: float

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ValueError(f"dimension must be 2 or 3, got {self.n}")
        if not (self.k > 0 and math.isfinite(self.k)):
            raise ValueError(f"frequency k must be positive, got {self.k}")

    @property
    def alpha(self) -> float:
        """Bessel order (n-2)/2 of the radial kernel."""
        return (self.n - 2) / 2


@dataclass(frozen=True)
class RadialProfile:
    """Closed-form radial function ``r -> value`` with its radial derivative."""

    k: float
    R: float
    evaluator: Callable = field(repr=False)
    derivative: Callable | None = field(default=None, repr=False)
    compact: bool = True

    def __call__(self, r):
        r_arr = np.asarray(r, dtype=float)
        out = np.asarray(self.evaluator(r_arr), dtype=float)
        if self.compact:
            out = np.where(r_arr >= self.R, 0.0, out)
        return float(out) if out.ndim == 0 else out

    def radial_derivative(self, r):
        if self.derivative is None:
            raise NotImplementedError("profile carries no derivative")
        r_arr = np.asarray(r, dtype=float)
        out = np.asarray(self.derivative(r_arr), dtype=float)
        if self.compact:
            out = np.where(r_arr >= self.R, 0.0, out)
        return float(out) if out.ndim == 0 else out


def r_max(params: HelmholtzParams) -> float:
    """Working radius R(n, k) = j_{(n-2)/2,1} / (2k)."""
    return 0.5 * first_zero(params.alpha) / params.k


def ball_volume(n: int, R: float) -> float:
    return math.pi ** (n / 2) * R**n / math.gamma(1 + n / 2)


def _prefactor(params: HelmholtzParams, R: float) -> tuple[float, float, float]:
    a = params.alpha
    k = params.k
    jR = bessel("J", a, k * R)
    if abs(jR) < _SINGULAR_THRESHOLD:
        raise SingularConfigurationError(
            f"J_{a}(kR) = {jR:.3e} vanishes for k={k}, R={R}"
        )
    yR = bessel("Y", a, k * R)
    pref = k**a / (4.0 * (2.0 * math.pi) ** a * jR)
    return pref, jR, yR


def fundamental_solution(params: HelmholtzParams, R: float, r):
    """Radial fundamental solution vanishing at |x| = R, and its r-derivative.

    ``(Delta + k^2) Phi = -delta_0`` with ``Phi(R) = 0``.  ``r`` may be an
    array; it must be positive since the value diverges at the origin.

    Returns
    -------
    (value, radial_derivative)
    """
    if not R > 0:
        raise ValueError("R must be positive")
    r_arr = np.asarray(r, dtype=float)
    if np.any(~(r_arr > 0)):
        raise ValueError("fundamental solution is singular at r = 0")
    a = params.alpha
    k = params.k
    pref, jR, yR = _prefactor(params, R)
    kr = k * r_arr
    ra = r_arr ** (-a)
    value = pref * ra * (yR * bessel("J", a, kr) - jR * bessel("Y", a, kr))
    deriv = -k * pref * ra * (yR * bessel("J", a + 1, kr) - jR * bessel("Y", a + 1, kr))
    if r_arr.ndim == 0:
        return float(value), float(deriv)
    return value, deriv


def fundamental_solution_log_remainder(params: HelmholtzParams, R: float) -> float:
    """Limit of Phi(r) + ln(r)/(2 pi) as r -> 0 (two dimensions only)."""
    if params.n != 2:
        raise ValueError("log remainder is defined for n = 2")
    pref, jR, yR = _prefactor(params, R)
    # Y0(kr) = (2/pi)(ln(kr/2) + gamma) + O(r^2 ln r)
    gamma = 0.57721566490153286061
    return pref * yR - (math.log(params.k / 2.0) + gamma) / (2.0 * math.pi)


def mvt_constant(params: HelmholtzParams, R):
    """Mean-value constant: integral over B_R of a metaharmonic w equals c * w(centre).

    Defined for every R > 0; it changes sign at the zeros of J_{n/2}(kR).
    """
    n, k = params.n, params.k
    R_arr = np.asarray(R, dtype=float)
    if np.any(~(R_arr > 0)):
        raise ValueError("R must be positive")
    c = (2.0 * math.pi) ** (n / 2) * R_arr ** (n / 2) * bessel("J", n / 2, k * R_arr) / k ** (n / 2)
    return float(c) if np.ndim(c) == 0 else c


def mollifier_density(params: HelmholtzParams, delta: float) -> float:
    """Constant density 1/c^{MVT}_{n,k,delta} of the Helmholtz mollifier on B_delta."""
    c = mvt_constant(params, delta)
    # a roundoff-sized constant at a Bessel zero counts as vanishing
    if c <= 1e-12 * ball_volume(params.n, delta):
        raise NonPositiveConstantError(
            f"mean-value constant {c:.3e} is not positive for delta={delta}, k={params.k}"
        )
    return 1.0 / c


def ball_dirac_example(params: HelmholtzParams, R: float):
    """Explicit solution for D = B_R with a point mass at the origin.

    The profile u vanishes with its gradient on |x| = R and satisfies
    ``(Delta + k^2) u = chi_{B_R} - weight * delta_0``.

    Returns
    -------
    weight, c1, c2, profile
    """
    n, k = params.n, params.k
    a = params.alpha
    half = n / 2
    weight = k ** (-half) * (2.0 * math.pi * R) ** half * bessel("J", half, k * R)
    c1 = math.pi * R**half * bessel("Y", half, k * R) / (2.0 * k)
    c2 = -math.pi * R**half * bessel("J", half, k * R) / (2.0 * k)

    def value(r):
        r = np.asarray(r, dtype=float)
        rs = np.where(r > 0, r, np.nan)
        ra = rs ** (-a)
        return 1.0 / k**2 + c1 * ra * bessel("J", a, k * rs) + c2 * ra * bessel("Y", a, k * rs)

    def deriv(r):
        r = np.asarray(r, dtype=float)
        rs = np.where(r > 0, r, np.nan)
        ra = rs ** (-a)
        # d/dr [r^-a C_a(kr)] = -k r^-a C_{a+1}(kr)
        return -k * ra * (c1 * bessel("J", a + 1, k * rs) + c2 * bessel("Y", a + 1, k * rs))

    profile = RadialProfile(k=k, R=R, evaluator=value, derivative=deriv)
    return weight, c1, c2, profile


def pompeiu_profile(params: HelmholtzParams):
    """Nonnegative radial solution of (Delta + k^2) v = chi_{B_R*}, v = 0 outside.

    Built from g(r) = Gamma(a+1) (2/(kr))^a J_a(kr), normalised so g(0) = 1,
    shifted by ``offset`` so that its first positive minimum R* sits at level
    zero, then rescaled.

    Returns
    -------
    R_star, offset, profile
    """
    k = params.k
    a = params.alpha
    norm = math.gamma(a + 1.0) * (2.0 / k) ** a
    # g' = -k r^-a J_{a+1}(kr) up to the norm, so the first minimum is j_{a+1,1}
    R_star = first_zero(a + 1.0) / k

    def g(r):
        r = np.asarray(r, dtype=float)
        small = r < 1e-8
        rs = np.where(small, 1.0, r)
        val = norm * rs ** (-a) * bessel("J", a, k * rs)
        return np.where(small, 1.0, val)

    def dg(r):
        r = np.asarray(r, dtype=float)
        rs = np.where(r > 0, r, 1.0)
        val = -k * norm * rs ** (-a) * bessel("J", a + 1, k * rs)
        return np.where(r > 0, val, 0.0)

    g_star = float(g(R_star))
    offset = -g_star
    scale = -1.0 / (k**2 * g_star)

    profile = RadialProfile(
        k=k,
        R=R_star,
        evaluator=lambda r: scale * (g(r) + offset),
        derivative=lambda r: scale * dg(r),
    )
    return R_star, offset, profile
