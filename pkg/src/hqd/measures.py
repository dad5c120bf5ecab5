"""Source measures, uniform grids and the potential U = Phi * mu.

A :class:`Measure` is a finite non-negative combination of point masses and
an optional nodal density on a :class:`Grid2`.  Potentials are evaluated with
the kernel that vanishes on the working circle of radius ``R`` (by default
``r_max(params)``).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import signal

from .kernel import (
    HelmholtzParams,
    fundamental_solution,
    fundamental_solution_log_remainder,
    mollifier_density,
    r_max,
)

__all__ = [
    "Grid2",
    "ScalarField",
    "Measure",
    "SupportError",
    "potential",
    "mollify",
    "total_mass",
    "node_source",
    "load_measure",
    "save_measure",
    "read_f64",
    "write_f64",
]

# integral of ln|y| over [0,1]^2
_LOG_UNIT_SQUARE = (math.log(2.0) - 3.0 + math.pi / 2.0) / 2.0


class SupportError(ValueError):
    """Measure support leaves the admissible ball."""


@dataclass(frozen=True)
class Grid2:
    """Uniform square-cell grid; node (i, j) sits at centre + (-L + i h, -L + j h)."""

    center: tuple[float, float]
    half_extent: float
    nx: int
    ny: int

    def __post_init__(self):
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        if self.half_extent <= 0 or self.nx < 3 or self.ny < 3:
            raise ValueError("grid needs half_extent > 0 and at least 3 nodes per axis")

    @classmethod
    def covering(cls, radius: float, cells: int, center=(0.0, 0.0)) -> "Grid2":
        """Square grid over [-radius, radius]^2 with ``cells`` cells per side."""
        return cls(center=tuple(center), half_extent=float(radius), nx=cells + 1, ny=cells + 1)

    @property
    def h(self) -> float:
        return 2.0 * self.half_extent / (self.nx - 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def cell_area(self) -> float:
        return self.h * self.h

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        h = self.h
        x = self.center[0] - self.half_extent + h * np.arange(self.nx)
        y = self.center[1] - self.half_extent + h * np.arange(self.ny)
        return x, y

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Node coordinates as (X, Y) arrays of shape (ny, nx)."""
        x, y = self.axes()
        return np.meshgrid(x, y)

    def radius(self, origin=(0.0, 0.0)) -> np.ndarray:
        X, Y = self.coords()
        return np.hypot(X - origin[0], Y - origin[1])

    def to_dict(self) -> dict:
        return {
            "center": list(self.center),
            "half_extent": self.half_extent,
            "nx": self.nx,
            "ny": self.ny,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Grid2":
        return cls(center=tuple(d.get("center", (0.0, 0.0))), half_extent=float(d["half_extent"]),
                   nx=int(d["nx"]), ny=int(d.get("ny", d["nx"])))


@dataclass(frozen=True)
class ScalarField:
    grid: Grid2
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != self.grid.shape:
            raise ValueError(f"values shape {vals.shape} != grid shape {self.grid.shape}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class Measure:
    """Point masses ``diracs = ((point, weight), ...)`` plus an optional density."""

    diracs: tuple = ()
    density: ScalarField | None = None

    def __post_init__(self):
        cleaned = []
        for point, weight in self.diracs:
            p = (float(point[0]), float(point[1]))
            w = float(weight)
            if not (w > 0 and math.isfinite(w)):
                raise ValueError(f"Dirac weight must be positive, got {weight}")
            cleaned.append((p, w))
        object.__setattr__(self, "diracs", tuple(cleaned))
        if self.density is not None:
            v = self.density.values
            if np.any(~np.isfinite(v)) or np.any(v < 0):
                raise ValueError("density values must be finite and non-negative")

    @classmethod
    def zero(cls) -> "Measure":
        return cls()

    @classmethod
    def point(cls, weight: float, point=(0.0, 0.0)) -> "Measure":
        return cls(diracs=((point, weight),))

    @classmethod
    def disk_density(cls, grid: Grid2, radius: float, value: float, center=(0.0, 0.0)) -> "Measure":
        """Density ``value`` on nodes strictly inside the disk."""
        vals = np.where(grid.radius(center) < radius, float(value), 0.0)
        return cls(density=ScalarField(grid, vals))

    def is_zero(self) -> bool:
        return not self.diracs and (self.density is None or not np.any(self.density.values))

    def __add__(self, other: "Measure") -> "Measure":
        density = self.density
        if other.density is not None:
            if density is None:
                density = other.density
            else:
                if density.grid != other.density.grid:
                    raise ValueError("cannot add densities on different grids")
                density = ScalarField(density.grid, density.values + other.density.values)
        return Measure(diracs=self.diracs + other.diracs, density=density)

    def support_radius(self, origin=(0.0, 0.0)) -> float:
        """Largest distance from ``origin`` to a point of the support."""
        r = 0.0
        for p, _ in self.diracs:
            r = max(r, math.hypot(p[0] - origin[0], p[1] - origin[1]))
        if self.density is not None and np.any(self.density.values > 0):
            rr = self.density.grid.radius(origin)
            r = max(r, float(rr[self.density.values > 0].max()))
        return r


def total_mass(measure: Measure) -> float:
    mass = math.fsum(w for _, w in measure.diracs)
    if measure.density is not None:
        mass += float(measure.density.values.sum()) * measure.density.grid.cell_area
    return mass


# ------------------------------------------------------------------ potential


def _kernel_table(params: HelmholtzParams, R: float, grid: Grid2) -> np.ndarray:
    """Cell integrals of Phi over the offset lattice, shape (2ny-1, 2nx-1)."""
    h = grid.h
    ny, nx = grid.shape
    di = np.arange(nx)
    dj = np.arange(ny)
    DI, DJ = np.meshgrid(di, dj)
    dist = h * np.hypot(DI, DJ)
    quad = np.empty_like(dist)
    nz = dist > 0
    quad[nz] = fundamental_solution(params, R, dist[nz])[0] * h * h
    # singular cell: log part exact over the square, smooth remainder by midpoint
    log_integral = h * h * (math.log(h / 2.0) + _LOG_UNIT_SQUARE)
    quad[0, 0] = -log_integral / (2.0 * math.pi) + h * h * fundamental_solution_log_remainder(params, R)
    full = np.empty((2 * ny - 1, 2 * nx - 1))
    full[ny - 1:, nx - 1:] = quad
    full[ny - 1:, :nx - 1] = quad[:, :0:-1]
    full[:ny - 1, nx - 1:] = quad[:0:-1, :]
    full[:ny - 1, :nx - 1] = quad[:0:-1, :0:-1]
    return full


def _check_params(params: HelmholtzParams) -> None:
    if params.n != 2:
        raise ValueError("grid potentials are two-dimensional (n = 2)")


def potential(measure: Measure, grid: Grid2, params: HelmholtzParams, R: float | None = None,
              return_singular: bool = False):
    """Potential U(x) = sum_j w_j Phi(|x - a_j|) + integral of density * Phi(|x - y|).

    Nodes that coincide with a point mass carry ``+inf``; pass
    ``return_singular=True`` to also receive their boolean mask.
    """
    _check_params(params)
    if R is None:
        R = r_max(params)
    for p, _ in measure.diracs:
        if math.hypot(*p) >= R:
            raise SupportError(f"point mass at {p} lies outside the ball of radius {R}")
    X, Y = grid.coords()
    values = np.zeros(grid.shape)
    singular = np.zeros(grid.shape, dtype=bool)
    on_node_tol = 1e-9 * grid.h
    for p, w in measure.diracs:
        dist = np.hypot(X - p[0], Y - p[1])
        hit = dist <= on_node_tol
        safe = np.where(hit, 1.0, dist)
        values += np.where(hit, 0.0, w * fundamental_solution(params, R, safe)[0])
        singular |= hit
    if measure.density is not None and np.any(measure.density.values):
        dgrid = measure.density.grid
        if dgrid != grid:
            raise ValueError("density must live on the evaluation grid")
        rr = grid.radius()
        if np.any(rr[measure.density.values > 0] >= R):
            raise SupportError("density support leaves the ball of radius R")
        table = _kernel_table(params, R, grid)
        conv = signal.fftconvolve(measure.density.values, table, mode="full")
        ny, nx = grid.shape
        values += conv[ny - 1:2 * ny - 1, nx - 1:2 * nx - 1]
    values[singular] = np.inf
    if return_singular:
        return values, singular
    return values


def potential_field(measure: Measure, grid: Grid2, params: HelmholtzParams, R: float | None = None,
                    sentinel: float = 1e300) -> ScalarField:
    """Potential as a :class:`ScalarField`; point-mass nodes hold ``sentinel``."""
    vals = potential(measure, grid, params, R)
    return ScalarField(grid, np.where(np.isinf(vals), sentinel, vals))


# ------------------------------------------------------------------ mollifier


def mollify(measure: Measure, params: HelmholtzParams, delta: float, grid: Grid2) -> Measure:
    """Density mu(B_delta(x)) / c^{MVT}_{n,k,delta} sampled at the nodes of ``grid``."""
    dens = mollifier_density(params, delta)
    X, Y = grid.coords()
    ball_mass = np.zeros(grid.shape)
    for p, w in measure.diracs:
        ball_mass += np.where(np.hypot(X - p[0], Y - p[1]) < delta, w, 0.0)
    if measure.density is not None and np.any(measure.density.values):
        dgrid = measure.density.grid
        if dgrid != grid:
            raise ValueError("density must live on the target grid")
        h = grid.h
        m = int(math.ceil(delta / h))
        off = np.arange(-m, m + 1) * h
        OX, OY = np.meshgrid(off, off)
        disk = (np.hypot(OX, OY) < delta).astype(float)
        ball_mass += signal.convolve(measure.density.values, disk, mode="same", method="direct") * grid.cell_area
    return Measure(density=ScalarField(grid, ball_mass * dens))


# ------------------------------------------------------------- nodal sources


def node_source(measure: Measure, grid: Grid2) -> np.ndarray:
    """Measure as a nodal density: grid density plus point masses spread bilinearly."""
    src = np.zeros(grid.shape)
    if measure.density is not None:
        if measure.density.grid != grid:
            raise ValueError("density must live on the solver grid")
        src += measure.density.values
    h = grid.h
    x0 = grid.center[0] - grid.half_extent
    y0 = grid.center[1] - grid.half_extent
    ny, nx = grid.shape
    for (px, py), w in measure.diracs:
        fx = (px - x0) / h
        fy = (py - y0) / h
        i = min(max(int(math.floor(fx)), 0), nx - 2)
        j = min(max(int(math.floor(fy)), 0), ny - 2)
        tx, ty = fx - i, fy - j
        if not (-1e-9 <= tx <= 1 + 1e-9 and -1e-9 <= ty <= 1 + 1e-9):
            raise SupportError(f"point mass at {(px, py)} lies outside the grid")
        share = w / (h * h)
        src[j, i] += share * (1 - tx) * (1 - ty)
        src[j, i + 1] += share * tx * (1 - ty)
        src[j + 1, i] += share * (1 - tx) * ty
        src[j + 1, i + 1] += share * tx * ty
    return src


# ------------------------------------------------------------------------- IO


def write_f64(path, values: np.ndarray, grid: Grid2 | None = None, **meta) -> None:
    """Raw little-endian float64, row-major (y-major), plus a JSON sidecar."""
    path = Path(path)
    np.ascontiguousarray(values, dtype="<f8").tofile(path)
    if grid is not None:
        sidecar = {"grid": grid.to_dict(), "dtype": "<f8", "order": "row-major (j, i)"}
        sidecar.update(meta)
        Path(str(path) + ".json").write_text(json.dumps(sidecar, indent=2))


def read_f64(path, grid: Grid2) -> np.ndarray:
    vals = np.fromfile(path, dtype="<f8")
    if vals.size != grid.nx * grid.ny:
        raise ValueError(f"{path}: expected {grid.nx * grid.ny} values, found {vals.size}")
    return vals.reshape(grid.shape)


def load_measure(path) -> tuple[Measure, HelmholtzParams | None]:
    """Read the measure JSON format; returns the measure and its (optional) params."""
    path = Path(path)
    data = json.loads(path.read_text())
    return measure_from_dict(data, base=path.parent)


def measure_from_dict(data: dict, base: os.PathLike | str = ".") -> tuple[Measure, HelmholtzParams | None]:
    params = None
    if "k" in data:
        params = HelmholtzParams(n=int(data.get("n", 2)), k=float(data["k"]))
    diracs = []
    for d in data.get("diracs", []):
        diracs.append((tuple(d["point"]), d["weight"]))
    density = None
    if data.get("density"):
        dd = data["density"]
        grid = Grid2.from_dict(dd["grid"])
        if "values_file" in dd:
            vals = read_f64(Path(base) / dd["values_file"], grid)
        else:
            vals = np.asarray(dd["values"], dtype=float).reshape(grid.shape)
        density = ScalarField(grid, vals)
    return Measure(diracs=tuple(diracs), density=density), params


def save_measure(path, measure: Measure, params: HelmholtzParams | None = None,
                 values_file: str = "rho.f64") -> None:
    path = Path(path)
    data: dict = {}
    if params is not None:
        data.update({"k": params.k, "n": params.n})
    data["diracs"] = [{"point": list(p), "weight": w} for p, w in measure.diracs]
    if measure.density is not None:
        write_f64(path.parent / values_file, measure.density.values)
        data["density"] = {"grid": measure.density.grid.to_dict(), "values_file": values_file}
    path.write_text(json.dumps(data, indent=2))


def measure_from_points(points: Sequence, weights: Sequence) -> Measure:
    return Measure(diracs=tuple(zip(points, weights)))
