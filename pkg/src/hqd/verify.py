"""Independent checks of quadrature-domain properties.

All domain integrals use the masked midpoint rule (boundary cells counted by
node membership), so the staircase perimeter error O(h) is the dominant
error term for grid domains.  Analytic disks are handled in closed form
through the mean-value constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import ndimage

from .kernel import (
    HelmholtzParams,
    fundamental_solution,
    fundamental_solution_log_remainder,
    mvt_constant,
    r_max,
)
from .measures import Grid2, Measure, total_mass
from .specialfn import bessel

__all__ = [
    "Disk",
    "DiskMeasure",
    "TestFunction",
    "TestFunctionSet",
    "quadrature_identity_error",
    "quadrature_identity_report",
    "subsolution_inequality",
    "pde_residual",
    "far_field",
    "mvt_numeric_check",
    "DegenerateDomainError",
]


class DegenerateDomainError(ValueError):
    """Empty domain mask."""


@dataclass(frozen=True)
class Disk:
    center: tuple[float, float]
    radius: float

    def mask(self, grid: Grid2) -> np.ndarray:
        return grid.radius(self.center) < self.radius

    def plane_wave_integral(self, k: float, direction) -> complex:
        """Integral of exp(-i k d.x) over the disk: phase * (2 pi rho / k) J1(k rho)."""
        d = np.asarray(direction, dtype=float)
        phase = np.exp(-1j * k * (d[0] * self.center[0] + d[1] * self.center[1]))
        return complex(phase * mvt_constant(HelmholtzParams(2, k), self.radius))

    @property
    def area(self) -> float:
        return math.pi * self.radius**2


@dataclass(frozen=True)
class DiskMeasure:
    """Uniform density on an analytic disk."""

    disk: Disk
    density: float

    @property
    def mass(self) -> float:
        return self.density * self.disk.area


@dataclass(frozen=True)
class TestFunction:
    name: str
    fn: Callable = field(repr=False)
    # direction for plane waves (cos/sin); None for radial members
    direction: tuple | None = None
    phase: str | None = None

    def __call__(self, X, Y):
        return self.fn(np.asarray(X, dtype=float), np.asarray(Y, dtype=float))


@dataclass(frozen=True)
class TestFunctionSet:
    """Metaharmonic test functions: plane-wave pairs or radial J0 bumps."""

    kind: str
    k: float
    count: int = 8
    points: tuple = ()

    def members(self) -> list[TestFunction]:
        k = self.k
        out = []
        if self.kind == "plane_waves":
            for m in range(self.count):
                t = 2.0 * math.pi * m / self.count
                d = (math.cos(t), math.sin(t))
                out.append(TestFunction(f"cos[{m}]", lambda X, Y, d=d: np.cos(k * (d[0] * X + d[1] * Y)), d, "cos"))
                out.append(TestFunction(f"sin[{m}]", lambda X, Y, d=d: np.sin(k * (d[0] * X + d[1] * Y)), d, "sin"))
        elif self.kind == "radial_centers":
            for m, a in enumerate(self.points):
                a = (float(a[0]), float(a[1]))
                out.append(TestFunction(
                    f"J0[{a[0]:.3g},{a[1]:.3g}]",
                    lambda X, Y, a=a: bessel("J", 0, k * np.hypot(X - a[0], Y - a[1])),
                ))
        else:
            raise ValueError(f"unknown test-function kind {self.kind!r}")
        return out


# ------------------------------------------------------------------ pairings


def _gauss_disk(disk: Disk, fn, n_r: int = 96, n_t: int = 192) -> float:
    x, wts = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * disk.radius * (x + 1.0)
    wr = 0.5 * disk.radius * wts * r
    t = 2.0 * math.pi * np.arange(n_t) / n_t
    Rr, Tt = np.meshgrid(r, t)
    vals = fn(disk.center[0] + Rr * np.cos(Tt), disk.center[1] + Rr * np.sin(Tt))
    return float((vals * wr[None, :]).sum() * 2.0 * math.pi / n_t)


def _as_measures(measure) -> list:
    if isinstance(measure, (Measure, DiskMeasure)):
        return [measure]
    return list(measure)


def _pair(measure, fn, grid: Grid2 | None = None) -> float:
    """<mu, w> for a Measure, an analytic DiskMeasure, or a list of them."""
    total = 0.0
    for m in _as_measures(measure):
        if isinstance(m, DiskMeasure):
            total += m.density * _gauss_disk(m.disk, fn)
            continue
        for (px, py), w in m.diracs:
            total += w * float(fn(np.array(px), np.array(py)))
        if m.density is not None:
            g = m.density.grid
            X, Y = g.coords()
            total += float((m.density.values * fn(X, Y)).sum()) * g.cell_area
    return total


def _mass(measure) -> float:
    return sum(m.mass if isinstance(m, DiskMeasure) else total_mass(m) for m in _as_measures(measure))


def _domain_integral(mask: np.ndarray, grid: Grid2, fn) -> float:
    X, Y = grid.coords()
    return float(fn(X[mask], Y[mask]).sum()) * grid.cell_area


# -------------------------------------------------------- quadrature identity


def quadrature_identity_report(domain_mask, measure, tests: TestFunctionSet, grid: Grid2) -> list[dict]:
    mask = np.asarray(domain_mask, dtype=bool)
    if not mask.any():
        raise DegenerateDomainError("domain mask is empty")
    X, Y = grid.coords()
    mass = _mass(measure)
    rows = []
    for tf in tests.members():
        lhs = _domain_integral(mask, grid, tf)
        rhs = _pair(measure, tf)
        wmax = float(np.abs(tf(X[mask], Y[mask])).max())
        denom = abs(rhs) + mass * wmax * 1e-3
        rows.append({"name": tf.name, "domain_integral": lhs, "pairing": rhs,
                     "defect": lhs - rhs, "relative_error": abs(lhs - rhs) / denom})
    return rows


def quadrature_identity_error(domain_mask, measure, tests: TestFunctionSet, grid: Grid2) -> float:
    """Max over test functions of |int_D w - <mu, w>| / (|<mu, w>| + mass max|w| 1e-3)."""
    rows = quadrature_identity_report(domain_mask, measure, tests, grid)
    return max(r["relative_error"] for r in rows)


# ----------------------------------------------------------- sub-solutions


def _log_rect(x0, x1, y0, y1):
    """Exact integral of ln|(x, y)| over the rectangle [x0,x1] x [y0,y1] (vectorised)."""

    def F(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        xs = np.where(x == 0.0, 1.0, x)
        ys = np.where(y == 0.0, 1.0, y)
        r2 = np.where((x == 0.0) & (y == 0.0), 1.0, x * x + y * y)
        # each term tends to zero on the axes
        return 0.5 * (x * y * np.log(r2) - 3.0 * x * y
                      + np.where(x == 0.0, 0.0, x * x * np.arctan(y / xs))
                      + np.where(y == 0.0, 0.0, y * y * np.arctan(x / ys)))

    return F(x1, y1) - F(x0, y1) - F(x1, y0) + F(x0, y0)


def _kernel_cell_integrals(grid: Grid2, params: HelmholtzParams, R: float, z, near_cells: int = 3):
    """Per-node integrals of Phi(|x - z|) over the node's cell.

    Midpoint rule away from z; within ``near_cells`` cells the log part is
    integrated exactly and the smooth remainder by midpoint.
    """
    X, Y = grid.coords()
    h = grid.h
    dist = np.hypot(X - z[0], Y - z[1])
    out = np.empty(grid.shape)
    far = dist > near_cells * h
    out[far] = fundamental_solution(params, R, dist[far])[0] * h * h
    near = ~far
    dx0 = X[near] - h / 2 - z[0]
    dy0 = Y[near] - h / 2 - z[1]
    log_part = _log_rect(dx0, dx0 + h, dy0, dy0 + h)
    d = dist[near]
    ds = np.where(d > 0, d, 1.0)
    smooth = np.where(d > 0, fundamental_solution(params, R, ds)[0] + np.log(ds) / (2 * math.pi),
                      fundamental_solution_log_remainder(params, R))
    out[near] = -log_part / (2 * math.pi) + smooth * h * h
    return out


def _inradius_center(mask: np.ndarray, grid: Grid2):
    dist = ndimage.distance_transform_edt(mask) * grid.h
    j, i = np.unravel_index(np.argmax(dist), dist.shape)
    x, y = grid.axes()
    return (float(x[i]), float(y[j])), float(dist[j, i])


def subsolution_inequality(domain_mask, measure: Measure, grid: Grid2, params: HelmholtzParams,
                           probes: int = 8, R: float | None = None) -> dict:
    """Signed slacks int_D w - <mu, w> for w = 1 and w = -Phi(. - z) at probe points."""
    mask = np.asarray(domain_mask, dtype=bool)
    if R is None:
        R = r_max(params)
    h2 = grid.cell_area
    area = float(mask.sum()) * h2
    mass = total_mass(measure)
    report = {"constant": {"domain_integral": area, "pairing": mass, "slack": area - mass}, "probes": []}
    if not mask.any():
        return report
    (cx, cy), inr = _inradius_center(mask, grid)
    rho = 0.5 * inr
    for m in range(probes):
        t = 2.0 * math.pi * (m + 0.5) / probes
        z = (cx + rho * math.cos(t), cy + rho * math.sin(t))
        cells = -_kernel_cell_integrals(grid, params, R, z)
        lhs = float(cells[mask].sum())
        rhs = 0.0
        for (px, py), w in measure.diracs:
            rhs -= w * fundamental_solution(params, R, math.hypot(px - z[0], py - z[1]))[0]
        if measure.density is not None:
            rhs += float((measure.density.values * cells).sum())
        report["probes"].append({"point": list(z), "domain_integral": lhs, "pairing": rhs, "slack": lhs - rhs})
    return report


# --------------------------------------------------------------- PDE check


def pde_residual(U_mu, V, domain_mask, measure: Measure, grid: Grid2, params: HelmholtzParams,
                 exclude_radius: float | None = None, collar: np.ndarray | None = None):
    """Residuals of (Delta + k^2) u = chi_D - mu with u = U - V.

    Returns ``(interior_residual, exterior_value, exterior_gradient)``.  The
    interior residual is taken over nodes of D at least 3h from its boundary
    and at least ``exclude_radius`` (default 3h) from every point mass.  The
    exterior quantities use nodes whose 5-point stencil lies outside D.
    """
    U = np.asarray(getattr(U_mu, "values", U_mu), dtype=float)
    Vv = np.asarray(getattr(V, "values", V), dtype=float)
    mask = np.asarray(domain_mask, dtype=bool)
    h = grid.h
    k = params.k
    finite = np.isfinite(U)
    u = np.where(finite, U - Vv, 0.0)
    if collar is None:
        collar = grid.radius() >= r_max(params) - 4 * h
    X, Y = grid.coords()
    far_dirac = np.ones(grid.shape, dtype=bool)
    excl = 3 * h if exclude_radius is None else exclude_radius
    for (px, py), _ in measure.diracs:
        far_dirac &= np.hypot(X - px, Y - py) >= excl
    dens = measure.density.values if measure.density is not None else np.zeros(grid.shape)

    lap = np.full(grid.shape, np.nan)
    lap[1:-1, 1:-1] = (u[1:-1, 2:] + u[1:-1, :-2] + u[2:, 1:-1] + u[:-2, 1:-1] - 4 * u[1:-1, 1:-1]) / h**2 \
        + k * k * u[1:-1, 1:-1]
    depth = ndimage.distance_transform_edt(mask) * h
    interior = mask & (depth >= 3 * h) & far_dirac & ~collar & finite
    interior[[0, -1], :] = False
    interior[:, [0, -1]] = False
    # stencil must stay finite
    fin_nb = finite.copy()
    fin_nb[1:-1, 1:-1] &= finite[1:-1, 2:] & finite[1:-1, :-2] & finite[2:, 1:-1] & finite[:-2, 1:-1]
    interior &= fin_nb
    resid = np.abs(lap - (1.0 - dens))
    interior_residual = float(resid[interior].max()) if interior.any() else 0.0

    cross = ndimage.generate_binary_structure(2, 1)
    exterior = ~ndimage.binary_dilation(mask, structure=cross) & ~collar
    exterior[[0, -1], :] = False
    exterior[:, [0, -1]] = False
    ext_value = float(np.abs(u[exterior]).max()) if exterior.any() else 0.0
    gx = np.zeros(grid.shape)
    gy = np.zeros(grid.shape)
    gx[:, 1:-1] = (u[:, 2:] - u[:, :-2]) / (2 * h)
    gy[1:-1, :] = (u[2:, :] - u[:-2, :]) / (2 * h)
    ext_grad = float(np.hypot(gx, gy)[exterior].max()) if exterior.any() else 0.0
    return interior_residual, ext_value, ext_grad


# --------------------------------------------------------------- far field


def _plane_wave(k, d):
    return lambda X, Y: np.exp(-1j * k * (d[0] * X + d[1] * Y))


def _domain_plane_wave(domain, k, d, grid):
    if isinstance(domain, Disk):
        return domain.plane_wave_integral(k, d)
    if isinstance(domain, (list, tuple)) and domain and isinstance(domain[0], Disk):
        return sum(disk.plane_wave_integral(k, d) for disk in domain)
    if grid is None:
        raise ValueError("a grid is required for mask domains")
    mask = np.asarray(domain, dtype=bool)
    X, Y = grid.coords()
    return complex(_plane_wave(k, d)(X[mask], Y[mask]).sum() * grid.cell_area)


def _measure_plane_wave(measure, k, d) -> complex:
    total = 0j
    fn = _plane_wave(k, d)
    for m in _as_measures(measure):
        if isinstance(m, DiskMeasure):
            total += m.density * m.disk.plane_wave_integral(k, d)
            continue
        for (px, py), w in m.diracs:
            total += w * complex(fn(np.array(px), np.array(py)))
        if m.density is not None:
            g = m.density.grid
            X, Y = g.coords()
            total += complex((m.density.values * fn(X, Y)).sum()) * g.cell_area
    return total


@dataclass(frozen=True)
class FarFieldReport:
    angles: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    max_abs: float = 0.0

    def to_dict(self) -> dict:
        return {
            "max_abs": self.max_abs,
            "pattern": [{"angle": float(a), "re": float(v.real), "im": float(v.imag)}
                        for a, v in zip(self.angles, self.values)],
        }


def far_field(domain, measure, params: HelmholtzParams, directions: int = 64,
              grid: Grid2 | None = None) -> FarFieldReport:
    """Source defect F(d) = int_D e^{-ik d.x} dx - <mu, e^{-ik d.x}> over equispaced d.

    ``domain`` is a :class:`Disk`, a list of disjoint disks, or a node mask
    (then ``grid`` is required).  ``measure`` is a :class:`Measure`, a
    :class:`DiskMeasure`, or a list of them.
    """
    k = params.k
    angles = 2.0 * math.pi * np.arange(directions) / directions
    vals = np.empty(directions, dtype=complex)
    for m, t in enumerate(angles):
        d = (math.cos(t), math.sin(t))
        vals[m] = _domain_plane_wave(domain, k, d, grid) - _measure_plane_wave(measure, k, d)
    return FarFieldReport(angles=angles, values=vals, max_abs=float(np.abs(vals).max()))


# ----------------------------------------------------------- mean value check


def mvt_numeric_check(params: HelmholtzParams, R: float, tests: TestFunctionSet | None = None,
                      n_radial: int = 512, n_angular: int = 512,
                      monotone_radii: Sequence[float] | None = None,
                      probe=(0.05, 0.02), n_monotone: int = 128) -> dict:
    """Polar quadrature of metaharmonic w over B_R against c^{MVT} w(0).

    Also samples r -> (1/c_r) int_{B_r} w for w = -Phi(|x - probe|), which
    satisfies (Delta + k^2) w = delta_probe >= 0 and must be nondecreasing.
    That integrand is smooth in polar coordinates about the probe, so a
    coarser ``n_monotone`` rule is already at roundoff.
    """
    if params.n != 2:
        raise ValueError("polar quadrature check is two-dimensional")
    tests = tests or TestFunctionSet("plane_waves", params.k, count=8)
    c = mvt_constant(params, R)
    xg, wg = np.polynomial.legendre.leggauss(n_radial)
    r = 0.5 * R * (xg + 1.0)
    wr = 0.5 * R * wg * r
    t = 2.0 * math.pi * np.arange(n_angular) / n_angular
    Rr, Tt = np.meshgrid(r, t)
    X, Y = Rr * np.cos(Tt), Rr * np.sin(Tt)
    rows = []
    for tf in tests.members():
        integral = float((tf(X, Y) * wr[None, :]).sum() * 2.0 * math.pi / n_angular)
        w0 = float(tf(np.array(0.0), np.array(0.0)))
        defect = abs(integral - c * w0)
        scale = max(abs(c * w0), abs(c))
        rows.append({"name": tf.name, "integral": integral, "expected": c * w0, "abs_error": defect,
                     "rel_error": defect / scale if scale > 0 else math.inf})

    if monotone_radii is None:
        monotone_radii = [0.1 * m for m in range(1, 10)]
    Rk = r_max(params)
    # polar coordinates centred at the probe; s = S u^2 tames the s ln s factor
    ug, uw = np.polynomial.legendre.leggauss(n_monotone)
    u = 0.5 * (ug + 1.0)
    uw = 0.5 * uw
    zx, zy = probe
    t = 2.0 * math.pi * np.arange(n_monotone) / n_monotone
    e = np.stack([np.cos(t), np.sin(t)])
    ze = zx * e[0] + zy * e[1]
    averages = []
    for rad in monotone_radii:
        smax = -ze + np.sqrt(rad * rad - (zx * zx + zy * zy) + ze * ze)
        S = smax[:, None] * (u * u)[None, :]
        jac = smax[:, None] * 2.0 * u[None, :]
        vals = -fundamental_solution(params, Rk, S)[0] * S * jac
        integral = float((vals * uw[None, :]).sum() * 2.0 * math.pi / n_monotone)
        averages.append(integral / mvt_constant(params, rad))
    increments = np.diff(averages)
    return {
        "mvt_constant": c,
        "rows": rows,
        "max_rel_error": max(r_["rel_error"] for r_ in rows),
        "max_abs_error": max(r_["abs_error"] for r_ in rows),
        "radii": list(monotone_radii),
        "averages": averages,
        "min_increment": float(increments.min()) if increments.size else 0.0,
        "monotone": bool(np.all(increments >= -1e-9)),
    }
