"""Partial balayage through the obstacle problem for Delta + k^2.

The largest V with ``(Delta_h + k^2) V >= -1`` and ``V <= U^mu`` inside the
working disk (``V = U^mu`` outside it) is computed through the gap
``w = U^mu - V >= 0``, which solves the complementarity system

    w >= 0,   -(Delta_h + k^2) w >= mu_h - 1,   w * (-(Delta_h + k^2) w - mu_h + 1) = 0

with ``mu_h`` the nodal source (grid density plus bilinearly spread point
masses).  The balayage measure is ``nu = mu_h + (Delta_h + k^2) w``, which is
1 on the non-contact set and ``mu_h`` (up to the one-cell free-boundary band)
on the contact set.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage

from . import _backend
from .kernel import HelmholtzParams, NonPositiveConstantError, ball_volume, r_max
from .measures import Grid2, Measure, ScalarField, SupportError, mollify, node_source, potential, total_mass

__all__ = [
    "SolverConfig",
    "BalayageResult",
    "ConvergenceError",
    "AdmissibilityError",
    "solve_obstacle",
    "extract_sets",
    "iterated_balayage_compare",
    "quadrature_domain_pipeline",
    "PipelineResult",
    "balayage_measure",
    "optimal_omega",
    "mask_perimeter",
    "collar_mask",
]

log = logging.getLogger(__name__)

COLLAR_CELLS = 4


class ConvergenceError(RuntimeError):
    """Projected SOR did not reach the tolerance within max_iters sweeps."""

    def __init__(self, msg, iterations=None, residual=None):
        super().__init__(msg)
        self.iterations = iterations
        self.residual = residual


class AdmissibilityError(ValueError):
    """Pipeline validation failed; ``failed`` names the broken checks."""

    def __init__(self, msg, failed=(), checks=None):
        super().__init__(msg)
        self.failed = tuple(failed)
        self.checks = dict(checks or {})


@dataclass(frozen=True)
class SolverConfig:
    """Projected SOR settings.

    ``omega_relax=None`` picks the asymptotically optimal factor for the
    grid.  ``tol`` bounds the nodewise complementarity residual in density
    units (the units of mu and of the constraint ``-(Delta+k^2) w >= mu - 1``).
    ``contact_tol=None`` means ``1e-9 * max|U^mu|``.
    """

    omega_relax: float | None = None
    tol: float = 1e-8
    max_iters: int = 200_000
    contact_tol: float | None = None
    contact_density_tol: float = 1e-6
    check_every: int = 20
    backend: str | None = None

    def __post_init__(self):
        if self.omega_relax is not None and not (1.0 <= self.omega_relax < 2.0):
            raise ValueError("omega_relax must lie in [1, 2)")
        if self.tol <= 0 or self.max_iters <= 0:
            raise ValueError("tol and max_iters must be positive")

    def to_dict(self) -> dict:
        return {
            "omega_relax": self.omega_relax,
            "tol": self.tol,
            "max_iters": self.max_iters,
            "contact_tol": self.contact_tol,
            "contact_density_tol": self.contact_density_tol,
            "check_every": self.check_every,
            "backend": self.backend,
        }

    @classmethod
    def from_dict(cls, d: dict | None) -> "SolverConfig":
        d = dict(d or {})
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in d.items() if k in known})


@dataclass(frozen=True)
class BalayageResult:
    V: ScalarField
    nu: ScalarField
    omega_mask: np.ndarray = field(repr=False)
    saturated_mask: np.ndarray = field(repr=False)
    iterations: int
    final_residual: float
    gap: ScalarField = field(repr=False)
    U: np.ndarray = field(repr=False)
    source: np.ndarray = field(repr=False)
    collar: np.ndarray = field(repr=False)
    contact_tol: float = 0.0
    omega_relax: float = 0.0
    backend: str = ""
    elapsed: float = 0.0

    @property
    def grid(self) -> Grid2:
        return self.V.grid

    def diagnostics(self) -> dict:
        h2 = self.grid.cell_area
        return {
            "iterations": self.iterations,
            "final_residual": self.final_residual,
            "omega_relax": self.omega_relax,
            "backend": self.backend,
            "elapsed_s": self.elapsed,
            "contact_tol": self.contact_tol,
            "omega_area": float(self.omega_mask.sum() * h2),
            "saturated_area": float(self.saturated_mask.sum() * h2),
            "balayage_mass": float(self.nu.values[~self.collar].sum() * h2),
            "source_mass": float(self.source.sum() * h2),
            "omega_in_saturated": bool(np.all(self.saturated_mask[self.omega_mask])),
            "max_nu": float(self.nu.values[~self.collar].max()),
        }


def optimal_omega(grid: Grid2, params: HelmholtzParams, radius: float) -> float:
    """SOR factor 2/(1+sqrt(1-rho_J^2)) for -(Delta_h+k^2) on a disk."""
    h = grid.h
    lam = (2.404825557695773 / radius) ** 2  # first Dirichlet eigenvalue of the disk
    rho_j = (4.0 - h * h * lam) / (4.0 - h * h * params.k**2)
    rho_j = min(max(rho_j, 0.0), 1.0 - 1e-12)
    return 2.0 / (1.0 + math.sqrt(1.0 - rho_j * rho_j))


def collar_mask(grid: Grid2, radius: float) -> np.ndarray:
    """Nodes within COLLAR_CELLS cells of the working circle, or outside it."""
    return grid.radius() >= radius - COLLAR_CELLS * grid.h


def _active_mask(grid: Grid2, radius: float) -> np.ndarray:
    inside = grid.radius() < radius
    act = inside.copy()
    act[1:-1, 1:-1] &= inside[1:-1, 2:] & inside[1:-1, :-2] & inside[2:, 1:-1] & inside[:-2, 1:-1]
    act[0, :] = act[-1, :] = False
    act[:, 0] = act[:, -1] = False
    return act


def _laplacian_k(w: np.ndarray, h: float, k: float) -> np.ndarray:
    """(Delta_h + k^2) w at interior nodes, zero on the frame."""
    out = np.zeros_like(w)
    out[1:-1, 1:-1] = (
        w[1:-1, 2:] + w[1:-1, :-2] + w[2:, 1:-1] + w[:-2, 1:-1] - 4.0 * w[1:-1, 1:-1]
    ) / (h * h) + k * k * w[1:-1, 1:-1]
    return out


def _finite_max(a: np.ndarray) -> float:
    fin = np.isfinite(a)
    return float(np.abs(a[fin]).max()) if fin.any() else 0.0


def solve_obstacle(measure: Measure, grid: Grid2, params: HelmholtzParams,
                   cfg: SolverConfig | None = None) -> BalayageResult:
    """Largest element of the obstacle class and the derived balayage data."""
    cfg = cfg or SolverConfig()
    if params.n != 2:
        raise ValueError("the obstacle solver is two-dimensional")
    R = r_max(params)
    h = grid.h
    x, y = grid.axes()
    if x[0] > -R + 1e-12 or x[-1] < R - 1e-12 or y[0] > -R + 1e-12 or y[-1] < R - 1e-12:
        raise ValueError(f"grid must cover the closed disk of radius {R:.6g}")
    margin = COLLAR_CELLS * h
    if measure.support_radius() > R - margin:
        raise SupportError(
            f"measure support radius {measure.support_radius():.6g} enters the boundary "
            f"collar (must be <= {R - margin:.6g})"
        )

    active = _active_mask(grid, R)
    src = node_source(measure, grid)
    k2h2 = (params.k * h) ** 2
    inv_diag = 1.0 / (4.0 - k2h2)
    b = np.ascontiguousarray(h * h * (src - 1.0))
    w = np.zeros(grid.shape)
    act_u8 = np.ascontiguousarray(active, dtype=np.uint8)
    omega = cfg.omega_relax if cfg.omega_relax is not None else optimal_omega(grid, params, R)
    impl = _backend.get_backend(cfg.backend)
    backend_name = cfg.backend or _backend.BACKEND
    threads = _backend.thread_count()
    to_density = 1.0 / (inv_diag * h * h)

    t0 = time.perf_counter()
    iterations = 0
    res = math.inf
    if measure.is_zero():
        res = 0.0
    while iterations < cfg.max_iters and res > cfg.tol:
        n = min(cfg.check_every, cfg.max_iters - iterations)
        impl.sweeps(w, b, act_u8, omega, inv_diag, n, threads)
        iterations += n
        res = impl.residual(w, b, act_u8, inv_diag, threads) * to_density
    elapsed = time.perf_counter() - t0
    if res > cfg.tol:
        raise ConvergenceError(
            f"projected SOR stalled at residual {res:.3e} after {iterations} sweeps",
            iterations=iterations, residual=res,
        )
    log.info("balayage converged: %d sweeps, residual %.2e, %.2fs (%s)",
             iterations, res, elapsed, backend_name)

    U, singular = potential(measure, grid, params, R, return_singular=True)
    V = U - w
    if singular.any():
        # point-mass nodes: V is smooth there, fill from the discrete equation
        for j, i in zip(*np.nonzero(singular)):
            nb = V[j, i - 1] + V[j, i + 1] + V[j - 1, i] + V[j + 1, i]
            V[j, i] = (nb + h * h) * inv_diag
    nu = src + _laplacian_k(w, h, params.k)
    frame = np.ones(grid.shape, dtype=bool)
    frame[1:-1, 1:-1] = False
    nu[frame] = src[frame]

    contact_tol = cfg.contact_tol if cfg.contact_tol is not None else 1e-9 * _finite_max(U)
    collar = collar_mask(grid, R)
    result = BalayageResult(
        V=ScalarField(grid, V),
        nu=ScalarField(grid, nu),
        omega_mask=np.zeros(grid.shape, dtype=bool),
        saturated_mask=np.zeros(grid.shape, dtype=bool),
        iterations=iterations,
        final_residual=res,
        gap=ScalarField(grid, w),
        U=U,
        source=src,
        collar=collar,
        contact_tol=contact_tol,
        omega_relax=omega,
        backend=backend_name,
        elapsed=elapsed,
    )
    omega_mask, saturated = extract_sets(result, U, cfg)
    return replace(result, omega_mask=omega_mask, saturated_mask=saturated)


def extract_sets(result: BalayageResult, U_mu: np.ndarray, cfg: SolverConfig | None = None):
    """Non-contact set {U - V > contact_tol} and saturated set {nu > 1 - tol}, opened by one cell."""
    cfg = cfg or SolverConfig()
    U = np.asarray(U_mu.values if isinstance(U_mu, ScalarField) else U_mu)
    V = result.V.values
    tol = result.contact_tol if cfg.contact_tol is None else cfg.contact_tol
    with np.errstate(invalid="ignore"):
        gap = np.where(np.isinf(U), np.inf, U - V)
    omega_mask = (gap > tol) & ~result.collar
    raw = (result.nu.values > 1.0 - cfg.contact_density_tol) & ~result.collar
    cross = ndimage.generate_binary_structure(2, 1)
    saturated = ndimage.binary_opening(raw, structure=cross)
    return omega_mask, saturated


def balayage_measure(result: BalayageResult) -> Measure:
    """Bal(mu) as a grid density: 1 on the saturated set, the swept source elsewhere."""
    nu = np.clip(result.nu.values, 0.0, None)
    nu = np.where(result.collar, 0.0, nu)
    return Measure(density=ScalarField(result.grid, nu))


def mask_perimeter(mask: np.ndarray, h: float) -> float:
    """Length of the staircase boundary of a node mask (edges between in/out nodes)."""
    m = mask.astype(np.int8)
    edges = np.abs(np.diff(m, axis=0)).sum() + np.abs(np.diff(m, axis=1)).sum()
    return float(edges) * h


def iterated_balayage_compare(mu1: Measure, mu2: Measure, grid: Grid2, params: HelmholtzParams,
                              cfg: SolverConfig | None = None) -> dict:
    """Compare Bal(mu1 + mu2) against Bal(Bal(mu1) + mu2)."""
    cfg = cfg or SolverConfig()
    direct = solve_obstacle(mu1 + mu2, grid, params, cfg)
    first = solve_obstacle(mu1, grid, params, cfg)
    nu1 = balayage_measure(first)
    second = solve_obstacle(nu1 + mu2, grid, params, cfg)
    Vd, Vs = direct.V.values, second.V.values
    diff = float(np.abs(Vd - Vs).max())
    scale = _finite_max(direct.U)
    union = first.omega_mask | second.omega_mask
    symdiff = direct.omega_mask ^ union
    h = grid.h
    perimeter = mask_perimeter(direct.omega_mask, h)
    return {
        "sup_norm": diff,
        "max_abs_potential": scale,
        "relative_sup_norm": diff / scale if scale > 0 else diff,
        "symdiff_area": float(symdiff.sum()) * h * h,
        "perimeter": perimeter,
        "symdiff_bound": 3.0 * h * perimeter,
        "direct": direct,
        "first": first,
        "second": second,
    }


@dataclass(frozen=True)
class PipelineResult:
    result: BalayageResult
    domain_mask: np.ndarray = field(repr=False)
    mollified: Measure = field(repr=False)
    checks: dict = field(default_factory=dict)

    @property
    def area(self) -> float:
        return float(self.domain_mask.sum()) * self.result.grid.cell_area

    @property
    def radius_estimate(self) -> float:
        """Radius of the disk with the same area as the domain."""
        return math.sqrt(self.area / math.pi)


def quadrature_domain_pipeline(mu: Measure, params: HelmholtzParams, epsilon: float, grid: Grid2,
                               cfg: SolverConfig | None = None) -> PipelineResult:
    """Mollify mu at scale 2*epsilon, sweep it, and validate the non-contact set.

    Raises :class:`AdmissibilityError` naming every check that failed.
    """
    cfg = cfg or SolverConfig()
    if mu.support_radius() >= epsilon:
        raise ValueError(f"measure support must lie in the ball of radius epsilon={epsilon}")
    R = r_max(params)
    h = grid.h
    mass = total_mass(mu)
    room = ball_volume(2, R - COLLAR_CELLS * h)
    if mass >= room:
        raise AdmissibilityError(
            f"k_range: mass {mass:.4g} cannot fit inside the working disk for k={params.k} "
            f"(area {room:.4g})",
            failed=("k_range",), checks={"k_range": False},
        )
    delta = 2.0 * epsilon
    try:
        smooth = mollify(mu, params, delta, grid)
    except NonPositiveConstantError as exc:
        raise AdmissibilityError(f"mollifier_constant: {exc}", failed=("mollifier_constant",)) from exc
    try:
        result = solve_obstacle(smooth, grid, params, cfg)
    except SupportError as exc:
        raise AdmissibilityError(f"k_range: {exc}", failed=("k_range",)) from exc

    D = result.omega_mask
    rr = grid.radius()
    inner = rr < 4.0 * epsilon
    labels, ncomp = ndimage.label(D, structure=ndimage.generate_binary_structure(2, 1))
    area = float(D.sum()) * h * h
    perimeter = mask_perimeter(D, h)
    touches = bool(np.any(D & (rr >= R - 2 * COLLAR_CELLS * h)))
    checks = {
        "k_range": not touches,
        "support_inclusion": bool(np.all(D[inner])),
        "connected": ncomp == 1,
        "area_bound": area >= mass - perimeter * h,
    }
    details = {
        "mass": mass,
        "area": area,
        "perimeter": perimeter,
        "components": int(ncomp),
        "epsilon": epsilon,
        "delta": delta,
    }
    failed = [name for name, ok in checks.items() if not ok]
    if failed:
        raise AdmissibilityError(
            "admissibility failed: " + ", ".join(failed),
            failed=failed, checks={**checks, **details},
        )
    return PipelineResult(result=result, domain_mask=D, mollified=smooth, checks={**checks, **details})
