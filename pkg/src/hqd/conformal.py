"""Boundary geometry of polynomial conformal images of the unit disk.

For D = phi(unit disk) the boundary is phi(e^{i theta}).  Singular boundary
points are critical points of phi on the circle (inward cusps) and pairs of
distinct parameters with the same image (double points).  A cusp at z0 is
ordinary when ``phi'''(z0) z0 / phi''(z0) + 3`` is not purely imaginary.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

__all__ = [
    "PolyMap",
    "CriticalPoint",
    "DoublePoint",
    "BoundaryReport",
    "DegenerateMapError",
    "eval_map",
    "boundary_curve",
    "classify_boundary",
    "injectivity_check",
    "winding_number",
    "export_svg",
    "parse_coeffs",
]

log = logging.getLogger(__name__)

_REL_TOL = 1e-9


class DegenerateMapError(ValueError):
    """phi' vanishes identically."""


@dataclass(frozen=True)
class PolyMap:
    """phi(z) = sum_j coeffs[j] z^j."""

    coeffs: tuple

    def __post_init__(self):
        c = tuple(complex(a) for a in self.coeffs)
        while len(c) > 1 and c[-1] == 0:
            c = c[:-1]
        if len(c) < 2:
            raise DegenerateMapError("map must have degree >= 1")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z):
        return eval_map(self, z)[0]

    def derivative_coeffs(self) -> np.ndarray:
        c = np.asarray(self.coeffs)
        return c[1:] * np.arange(1, len(c))


def parse_coeffs(text: str) -> PolyMap:
    """Parse ``"0,1,0.5"`` or ``"0,1,-1+0.5i"`` into a map (lowest degree first)."""
    out = []
    for tok in text.split(","):
        tok = tok.strip().replace(" ", "")
        if not tok:
            raise ValueError(f"empty coefficient in {text!r}")
        out.append(complex(tok.replace("i", "j")))
    return PolyMap(tuple(out))


def eval_map(pmap: PolyMap, z):
    """Horner evaluation of phi and its first three derivatives.

    Works on scalars or arrays; returns ``(phi, dphi, d2phi, d3phi)``.
    """
    if isinstance(z, (complex, float, int)):
        return _horner_scalar(pmap.coeffs, complex(z))
    z = np.asarray(z, dtype=complex)
    p0 = np.zeros_like(z)
    p1 = np.zeros_like(z)
    p2 = np.zeros_like(z)
    p3 = np.zeros_like(z)
    for a in reversed(pmap.coeffs):
        # p3..p1 hold Taylor coefficients d^j phi / j!
        p3 = p3 * z + p2
        p2 = p2 * z + p1
        p1 = p1 * z + p0
        p0 = p0 * z + a
    out = (p0, p1, 2.0 * p2, 6.0 * p3)
    if z.ndim == 0:
        return tuple(complex(v) for v in out)
    return out


def _horner_scalar(coeffs, z: complex):
    p0 = p1 = p2 = p3 = 0j
    for a in reversed(coeffs):
        p3 = p3 * z + p2
        p2 = p2 * z + p1
        p1 = p1 * z + p0
        p0 = p0 * z + a
    return p0, p1, 2.0 * p2, 6.0 * p3


def boundary_curve(pmap: PolyMap, m_samples: int = 512) -> np.ndarray:
    """Samples phi(e^{2 pi i j / m}), j = 0..m-1 (closed implicitly)."""
    if m_samples < 4:
        raise ValueError("need at least 4 samples")
    theta = 2.0 * math.pi * np.arange(m_samples) / m_samples
    return eval_map(pmap, np.exp(1j * theta))[0]


def _scale(pmap: PolyMap, m: int = 2048) -> float:
    return float(np.abs(boundary_curve(pmap, m)).max())


@dataclass(frozen=True)
class CriticalPoint:
    z: complex
    image: complex
    cusp_value: complex
    ordinary: bool
    second_derivative: complex

    @property
    def theta(self) -> float:
        return math.atan2(self.z.imag, self.z.real)

    def to_dict(self) -> dict:
        return {
            "z": [self.z.real, self.z.imag],
            "image": [self.image.real, self.image.imag],
            "cusp_value": [self.cusp_value.real, self.cusp_value.imag],
            "ordinary": self.ordinary,
        }


@dataclass(frozen=True)
class DoublePoint:
    z1: complex
    z2: complex
    image: complex
    defect: float

    def to_dict(self) -> dict:
        return {
            "z1": [self.z1.real, self.z1.imag],
            "z2": [self.z2.real, self.z2.imag],
            "image": [self.image.real, self.image.imag],
            "defect": self.defect,
        }


@dataclass
class BoundaryReport:
    samples: np.ndarray = field(repr=False)
    critical_points: list
    double_points: list
    injective: bool
    scale: float

    @property
    def cusps(self) -> list:
        return self.critical_points

    def to_dict(self) -> dict:
        return {
            "scale": self.scale,
            "injective": self.injective,
            "critical_points": [c.to_dict() for c in self.critical_points],
            "double_points": [d.to_dict() for d in self.double_points],
        }


# ----------------------------------------------------------- critical points


def _critical_points(pmap: PolyMap, samples: int, scale: float) -> list[CriticalPoint]:
    theta = 2.0 * math.pi * np.arange(samples) / samples
    zs = np.exp(1j * theta)
    d1 = np.abs(eval_map(pmap, zs)[1])
    # local minima of |phi'| on the circle, including wrap-around
    cand = np.nonzero((d1 <= np.roll(d1, 1)) & (d1 <= np.roll(d1, -1)))[0]
    found: list[CriticalPoint] = []
    for idx in cand:
        z = complex(zs[idx])
        # complex Newton on phi'; the roots we want lie on the circle
        for _ in range(60):
            _, f1, f2, _ = eval_map(pmap, z)
            if f2 == 0:
                break
            step = f1 / f2
            z -= step
            if abs(step) < 1e-16 * max(1.0, abs(z)):
                break
        f0, f1, f2, f3 = eval_map(pmap, z)
        if abs(abs(z) - 1.0) > _REL_TOL or abs(f1) > _REL_TOL * scale:
            continue
        if abs(f2) <= _REL_TOL * scale:
            log.warning("higher-order critical point at %s is not classified", z)
            continue
        if any(abs(z - c.z) < 1e-7 for c in found):
            continue
        value = f3 * z / f2 + 3.0
        ordinary = abs(value.real) > _REL_TOL * max(1.0, abs(value))
        found.append(CriticalPoint(z=z, image=f0, cusp_value=value, ordinary=ordinary,
                                   second_derivative=f2))
    found.sort(key=lambda c: c.theta)
    return found


# ------------------------------------------------------------- double points


def _seg_intersections(P: np.ndarray) -> list[tuple[int, int]]:
    """Index pairs (i, j) of non-adjacent closed-polyline segments that cross."""
    A = P
    B = np.roll(P, -1)
    m = len(P)
    mid = 0.5 * (A + B)
    reach = float(np.abs(B - A).max())
    tree = cKDTree(np.column_stack([mid.real, mid.imag]))
    pairs = tree.query_pairs(reach * 1.01)
    out = []

    def cross(u, v):
        return u.real * v.imag - u.imag * v.real

    for i, j in pairs:
        if abs(i - j) <= 1 or abs(i - j) == m - 1:
            continue
        r = B[i] - A[i]
        s = B[j] - A[j]
        den = cross(r, s)
        if den == 0:
            continue
        q = A[j] - A[i]
        t = cross(q, s) / den
        u = cross(q, r) / den
        if 0 <= t <= 1 and 0 <= u <= 1:
            out.append((min(i, j), max(i, j)))
    return out


def _near_pairs(P: np.ndarray, theta: np.ndarray, min_sep: float) -> list[tuple[int, int]]:
    """Pairs of samples whose images nearly touch but whose parameters are far apart.

    Catches tangential self-contact, which a crossing scan can miss.  Only
    pairs that locally minimise the image distance are kept.
    """
    m = len(P)
    h = float(np.abs(np.roll(P, -1) - P).max())
    tree = cKDTree(np.column_stack([P.real, P.imag]))
    pairs = tree.query_pairs(h, output_type="ndarray")
    if len(pairs) == 0:
        return []
    i, j = pairs[:, 0], pairs[:, 1]
    dt = np.abs(theta[i] - theta[j])
    dt = np.minimum(dt, 2.0 * math.pi - dt)
    keep = dt > min_sep
    i, j = i[keep], j[keep]
    d = np.abs(P[i] - P[j])
    ok = np.ones(len(i), dtype=bool)
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        ok &= d <= np.abs(P[(i + di) % m] - P[(j + dj) % m])
    return [(int(a), int(b)) for a, b in zip(np.minimum(i[ok], j[ok]), np.maximum(i[ok], j[ok]))]


def _refine_double(pmap: PolyMap, t1: float, t2: float, scale: float):
    """Gauss-Newton on (t1, t2) -> phi(e^{i t1}) - phi(e^{i t2}) in R^2."""
    x = np.array([t1, t2], dtype=float)
    for _ in range(200):
        z1, z2 = complex(np.exp(1j * x[0])), complex(np.exp(1j * x[1]))
        f1, d1 = eval_map(pmap, z1)[:2]
        f2, d2 = eval_map(pmap, z2)[:2]
        F = f1 - f2
        if abs(F) < 1e-15 * scale:
            break
        g1 = 1j * z1 * d1
        g2 = -1j * z2 * d2
        J = np.array([[g1.real, g2.real], [g1.imag, g2.imag]])
        # least squares handles the rank drop near cusps
        step = np.linalg.lstsq(J, np.array([F.real, F.imag]), rcond=None)[0]
        x -= step
        if np.abs(step).max() < 1e-16:
            break
    x = _refine_tangency(pmap, x, scale)
    z1, z2 = complex(np.exp(1j * x[0])), complex(np.exp(1j * x[1]))
    f1 = eval_map(pmap, z1)[0]
    f2 = eval_map(pmap, z2)[0]
    return complex(z1), complex(z2), complex(0.5 * (f1 + f2)), float(abs(f1 - f2))


def _refine_tangency(pmap: PolyMap, x: np.ndarray, scale: float) -> np.ndarray:
    """Sharpen a tangential contact, where the plain system only fixes (t1, t2) to ~sqrt(eps).

    Adds the residual sin(angle between tangents); its gradient does not vanish
    at a touching point, so Gauss-Newton on the three residuals converges fully.
    """

    def parts(t):
        z = complex(np.exp(1j * t))
        f, d1, d2 = eval_map(pmap, z)[:3]
        return f, 1j * z * d1, -z * d1 - z * z * d2

    f1, a1, b1 = parts(x[0])
    f2, a2, b2 = parts(x[1])
    norm = abs(a1) * abs(a2)
    if norm == 0.0 or abs((np.conj(a1) * a2).imag) > 1e-3 * norm:
        return x
    y = x.copy()
    for _ in range(50):
        f1, a1, b1 = parts(y[0])
        f2, a2, b2 = parts(y[1])
        norm = abs(a1) * abs(a2)
        if not norm > 1e-12 * scale * scale:
            return x  # drifted onto a cusp
        F = f1 - f2
        S = (np.conj(a1) * a2).imag / norm
        r = np.array([F.real, F.imag, scale * S])
        J = np.array([
            [a1.real, -a2.real],
            [a1.imag, -a2.imag],
            [scale * (np.conj(b1) * a2).imag / norm, scale * (np.conj(a1) * b2).imag / norm],
        ])
        step = np.linalg.lstsq(J, r, rcond=None)[0]
        y -= step
        if not np.all(np.isfinite(y)):
            return x
        if np.abs(step).max() < 1e-15:
            break
    # keep the sharpened pair only if it is still a contact
    f1 = eval_map(pmap, complex(np.exp(1j * y[0])))[0]
    f2 = eval_map(pmap, complex(np.exp(1j * y[1])))[0]
    return y if abs(f1 - f2) <= _REL_TOL * scale else x


def _double_points(pmap: PolyMap, samples: int, scale: float, cusps: list,
                   limit: int = 64) -> list[DoublePoint]:
    theta = 2.0 * math.pi * np.arange(samples) / samples
    P = eval_map(pmap, np.exp(1j * theta))[0]
    guard = 8
    min_sep = guard * 2.0 * math.pi / samples
    cand = set(_seg_intersections(P)) | set(_near_pairs(P, theta, min_sep))
    # a cusp folds the curve back onto itself; pairs straddling it are no double point
    window = max(min_sep, 0.05)
    cusp_t = [c.theta % (2.0 * math.pi) for c in cusps]

    def near_cusp(t):
        return any(min(abs(t - c), 2.0 * math.pi - abs(t - c)) < window for c in cusp_t)

    cand = [(i, j) for i, j in sorted(cand) if not (near_cusp(theta[i]) and near_cusp(theta[j]))]
    buckets: set = set()
    found: list[DoublePoint] = []
    for i, j in cand:
        key = (i // guard, j // guard)
        if key in buckets:
            continue
        buckets.add(key)
        z1, z2, img, defect = _refine_double(pmap, theta[i], theta[j], scale)
        if defect > _REL_TOL * scale:
            continue
        if abs(z1 - z2) < min_sep:
            continue
        if any(abs(img - d.image) < 1e-7 * scale for d in found):
            continue
        a1, a2 = sorted([z1, z2], key=lambda z: math.atan2(z.imag, z.real))
        found.append(DoublePoint(z1=a1, z2=a2, image=img, defect=defect))
        if len(found) >= limit:
            log.warning("stopped after %d double points; the boundary overlaps itself", limit)
            break
    return found


# --------------------------------------------------------------- injectivity


def winding_number(curve: np.ndarray, w: complex) -> int:
    """Winding number of the closed polyline ``curve`` around ``w``."""
    d = np.asarray(curve) - w
    ang = np.angle(np.roll(d, -1) / d)
    return int(round(ang.sum() / (2.0 * math.pi)))


def injectivity_check(pmap: PolyMap, probes: int = 64, samples: int = 4096, seed: int = 0) -> bool:
    """True when the boundary winds exactly once around phi(zeta) for random |zeta| <= 0.95."""
    rng = np.random.default_rng(seed)
    curve = boundary_curve(pmap, samples)
    rad = 0.95 * np.sqrt(rng.random(probes))
    ang = 2.0 * math.pi * rng.random(probes)
    pts = eval_map(pmap, rad * np.exp(1j * ang))[0]
    scale = float(np.abs(curve).max())
    for w in np.atleast_1d(pts):
        # a probe on the sampled curve has no well-defined winding number
        if np.abs(curve - w).min() < 1e-9 * scale:
            continue
        if winding_number(curve, complex(w)) != 1:
            return False
    return True


def classify_boundary(pmap: PolyMap, samples: int = 4096) -> BoundaryReport:
    """Critical points (cusps), double points and injectivity of phi on the unit circle."""
    if np.all(pmap.derivative_coeffs() == 0):
        raise DegenerateMapError("phi' vanishes identically")
    scale = _scale(pmap)
    cusps = _critical_points(pmap, samples, scale)
    doubles = _double_points(pmap, samples, scale, cusps)
    injective = injectivity_check(pmap)
    if not injective:
        log.warning("map is not injective on the disk; classification may be meaningless")
    return BoundaryReport(
        samples=boundary_curve(pmap, samples),
        critical_points=cusps,
        double_points=doubles,
        injective=injective,
        scale=scale,
    )


# ----------------------------------------------------------------------- SVG


def export_svg(report: BoundaryReport, path, stroke: float | None = None) -> None:
    """Write the boundary path with cusps as circles and double points as crosses.

    SVG y runs downwards, so imaginary parts are negated.
    """
    P = np.asarray(report.samples)
    xs, ys = P.real, -P.imag
    x0, x1, y0, y1 = xs.min(), xs.max(), ys.min(), ys.max()
    span = max(x1 - x0, y1 - y0, 1e-12)
    pad = 0.05 * span
    vb = (x0 - pad, y0 - pad, (x1 - x0) + 2 * pad, (y1 - y0) + 2 * pad)
    sw = stroke if stroke is not None else span / 400
    r = span / 80
    d = "M " + " L ".join(f"{x:.9g},{y:.9g}" for x, y in zip(xs, ys)) + " Z"
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{vb[0]:.9g} {vb[1]:.9g} {vb[2]:.9g} {vb[3]:.9g}">',
        f'  <path class="boundary" d="{d}" fill="none" stroke="black" stroke-width="{sw:.6g}"/>',
    ]
    for c in report.critical_points:
        colour = "red" if c.ordinary else "orange"
        lines.append(
            f'  <circle class="cusp" cx="{c.image.real:.12g}" cy="{-c.image.imag:.12g}" r="{r:.6g}" '
            f'fill="none" stroke="{colour}" stroke-width="{sw:.6g}"/>'
        )
    for p in report.double_points:
        x, y = p.image.real, -p.image.imag
        lines.append(
            f'  <path class="double" d="M {x - r:.9g},{y - r:.9g} L {x + r:.9g},{y + r:.9g} '
            f'M {x - r:.9g},{y + r:.9g} L {x + r:.9g},{y - r:.9g}" stroke="blue" stroke-width="{sw:.6g}"/>'
        )
    lines.append("</svg>")
    Path(path).write_text("\n".join(lines) + "\n")
