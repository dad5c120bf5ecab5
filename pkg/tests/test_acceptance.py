"""Acceptance criteria 1-11, each printing a single PASS/FAIL line."""

import math
import time

import numpy as np
import pytest
from numpy.polynomial import polynomial as P
from scipy import special

from conftest import K1, KAPPA, SOLVED, grid_for, iterated, disk_sweep, pipeline_dirac, record
from hqd.balayage import SolverConfig, quadrature_domain_pipeline, solve_obstacle
from hqd.conformal import PolyMap, classify_boundary, injectivity_check
from hqd.kernel import HelmholtzParams, ball_dirac_example, fundamental_solution, mvt_constant
from hqd.measures import Grid2, Measure, total_mass
from hqd.specialfn import bessel_derivative, besselj, bessely, first_zero
from hqd.verify import Disk, DiskMeasure, TestFunctionSet, far_field, mvt_numeric_check, pde_residual, \
    quadrature_identity_error

TestFunctionSet.__test__ = False


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return emit


def _symdiff_rel(mask, grid, radius):
    return float((mask ^ (grid.radius() < radius)).sum()) * grid.cell_area / (math.pi * radius**2)


def test_criterion_01_bessel_wronskian(report):
    t0 = time.perf_counter()
    x = np.linspace(0.1, 50, 200)
    target = 2 / (np.pi * x)
    worst = 0.0
    for nu in (0, 1, 0.5, 1.5):
        W = besselj(nu, x) * bessel_derivative("Y", nu, x) - bessel_derivative("J", nu, x) * bessely(nu, x)
        worst = max(worst, float(np.max(np.abs(W - target) / (1 + target))))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-9 and dt < 1.0
    assert report(1, ok, f"max scaled Wronskian defect {worst:.2e}, {dt:.3f}s")


def _bisect(f, a, b):
    fa = f(a)
    for _ in range(200):
        m = 0.5 * (a + b)
        fm = f(m)
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def test_criterion_02_first_zeros(report):
    e_half = abs(first_zero(0.5) - math.pi)
    oracle = _bisect(special.j0, 2.0, 3.0)
    e0 = abs(first_zero(0) - 2.404825557695773)
    e0_oracle = abs(first_zero(0) - oracle)
    ok = e_half <= 1e-12 and e0 <= 1e-10 and e0_oracle <= 1e-10
    assert report(2, ok, f"|j_1/2 - pi| {e_half:.1e}, |j_0 - ref| {e0:.1e}, vs bisection {e0_oracle:.1e}")


def test_criterion_03_fundamental_solution_three_dim(report):
    p = HelmholtzParams(3, 1.0)
    R = math.pi / 2
    r = np.linspace(R / 1000, R, 1000, endpoint=False)
    val = fundamental_solution(p, R, r)[0]
    ref = np.sin(R - r) / (4 * np.pi * r * np.sin(R))
    rel = float(np.max(np.abs(val - ref) / np.abs(ref)))
    at_R = abs(fundamental_solution(p, R, R)[0])
    ok = rel <= 1e-10 and at_R <= 1e-12 and bool(np.all(val > 0))
    assert report(3, ok, f"max rel {rel:.1e}, |Phi(R)| {at_R:.1e}, positive {bool(np.all(val > 0))}")


def test_criterion_04_mvt_numeric(report):
    rep = mvt_numeric_check(K1, 0.9, TestFunctionSet("plane_waves", 1.0, 8), n_radial=512, n_angular=512)
    ok = rep["max_rel_error"] <= 1e-6 and rep["min_increment"] >= -1e-9
    assert report(4, ok, f"rel error {rep['max_rel_error']:.1e}, min increment {rep['min_increment']:.2e}")


def test_criterion_05_disk_sweep(report):
    # kappa from scipy's J1, independent of the package's Bessel code
    kappa_ref = 0.6 * special.j1(0.6) / (0.3 * special.j1(0.3))
    assert KAPPA == pytest.approx(kappa_ref, rel=1e-13)
    g1, _, r1 = disk_sweep(256)
    g2, _, r2 = disk_sweep(512)
    s1 = _symdiff_rel(r1.omega_mask, g1, 0.6)
    s2 = _symdiff_rel(r2.omega_mask, g2, 0.6)
    sweeps = max(r1.iterations, r2.iterations)
    ok = s1 <= 0.05 and s2 <= 0.03 and sweeps <= 200000 and r2.elapsed <= 60
    assert report(5, ok, f"symdiff {s1:.4f} @256, {s2:.4f} @512; sweeps {sweeps}; {r2.elapsed:.1f}s @512")


def test_criterion_06_pipeline_quadrature(report):
    tests = TestFunctionSet("plane_waves", 1.0, 16)
    g1, mu, p1 = pipeline_dirac(256)
    g2, _, p2 = pipeline_dirac(512)
    e1 = quadrature_identity_error(p1.domain_mask, mu, tests, g1)
    e2 = quadrature_identity_error(p2.domain_mask, mu, tests, g2)
    dr = abs(p1.radius_estimate - 0.8)
    ok = e1 <= 0.05 and e2 < e1 and dr <= 2 * g1.h
    assert report(6, ok, f"defect {e1:.4f} @256, {e2:.4f} @512; |r - 0.8| {dr:.1e} (2h = {2 * g1.h:.1e})")


def test_criterion_07_iterated(report):
    _, _, _, rep = iterated(256)
    ok = rep["sup_norm"] <= 1e-3 * rep["max_abs_potential"] and rep["symdiff_area"] <= rep["symdiff_bound"]
    assert report(7, ok, f"sup {rep['sup_norm']:.2e} vs {1e-3 * rep['max_abs_potential']:.2e}; "
                         f"symdiff {rep['symdiff_area']:.2e} vs {rep['symdiff_bound']:.2e}")


def _ball_dirac(cells):
    g = grid_for(cells)
    w, _, _, prof = ball_dirac_example(K1, 0.8)
    rr = g.radius()
    u = np.where(rr > 0, prof(np.where(rr > 0, rr, 1.0)), np.inf)
    return pde_residual(u, np.zeros(g.shape), rr < 0.8, Measure.point(w), g, K1, exclude_radius=0.2)


def test_criterion_08_pde_residual_order(report):
    a, b = _ball_dirac(128), _ball_dirac(256)
    order = math.log2(a[0] / b[0])
    ok = order >= 1.8 and b[1] <= 1e-12
    assert report(8, ok, f"interior order {order:.3f}; exterior value {b[1]:.1e}")


def test_criterion_09_far_field(report):
    good = far_field(Disk((0, 0), 0.6), DiskMeasure(Disk((0, 0), 0.3), KAPPA), K1, 64).max_abs
    g = Grid2((0, 0), 1.0, 401, 401)
    X, Y = g.coords()
    square = (np.abs(X) < 0.5) & (np.abs(Y) < 0.5)
    bad = far_field(square, Measure.point(square.sum() * g.cell_area), K1, 64, grid=g).max_abs
    ok = good <= 1e-8 and bad >= 0.01
    assert report(9, ok, f"disk sweep max|F| {good:.1e}; square control {bad:.3f}")


def test_criterion_10_conformal(report):
    card = PolyMap((0, 1, 0.5))
    two_cusp = PolyMap((0, 1, -2 * math.sqrt(2) / 3, 1 / 3))
    curved = PolyMap(tuple(P.polysub(P.polypow([-1, 1], 2), (1 - 0.5j) * P.polypow([-1, 1], 3))))
    times = []

    def timed(pm):
        t0 = time.perf_counter()
        rep = classify_boundary(pm)
        times.append(time.perf_counter() - t0)
        return rep

    a, b, c = timed(card), timed(two_cusp), timed(curved)
    ok_a = (len(a.critical_points) == 1 and a.critical_points[0].ordinary
            and abs(a.critical_points[0].image + 0.5) <= 1e-9 and not a.double_points)
    ok_b = (len(b.critical_points) == 2 and len(b.double_points) == 1
            and abs(b.double_points[0].image - math.sqrt(2) / 3) <= 1e-6)
    ok_c = (len(c.critical_points) == 1 and not c.critical_points[0].ordinary
            and abs(c.critical_points[0].cusp_value - 1.5j) <= 1e-9)
    verdicts = (injectivity_check(card), injectivity_check(PolyMap((0, 0, 1))), injectivity_check(two_cusp))
    ok = ok_a and ok_b and ok_c and verdicts == (True, False, True) and max(times) < 1.0
    assert report(10, ok, f"cardioid {ok_a}, two-cusp {ok_b}, curved cusp {ok_c}, injectivity {verdicts}, "
                          f"slowest {max(times):.2f}s")


def test_criterion_11_structure_and_mass(report):
    # make sure the canonical cases exist even when this file runs alone
    disk_sweep(256)
    pipeline_dirac(256)
    iterated(256)
    g = grid_for(256)
    m = mvt_constant(K1, 0.8)
    two = Measure(diracs=(((-0.1, 0.0), m / 2), ((0.1, 0.0), m / 2)))
    pr = quadrature_domain_pipeline(two, K1, 0.15, g, SolverConfig())
    record("pipeline-two-diracs", pr.mollified, pr.result)
    p2 = HelmholtzParams(2, 1.5)
    g2 = grid_for(128, p2)
    mu = Measure.disk_density(g2, 0.25, 2.0)
    record("density-k1.5", mu, solve_obstacle(mu, g2, p2, SolverConfig()))

    bad = []
    for label, measure, res in SOLVED:
        keep = ~res.collar
        nu = res.nu.values
        if nu[keep].max() > 1 + 1e-6:
            bad.append(f"{label}: nu > 1")
        if measure.density is not None:
            lower = np.minimum(measure.density.values, 1.0)
            if np.any(lower[keep] > nu[keep] + 1e-6):
                bad.append(f"{label}: min(mu,1) > nu")
        area = res.omega_mask.sum() * res.grid.cell_area
        if area < 0.98 * total_mass(measure):
            bad.append(f"{label}: area {area:.4f} < 0.98 mass {total_mass(measure):.4f}")
    assert report(11, not bad, f"{len(SOLVED)} solved cases" + ("; " + "; ".join(bad) if bad else ""))
