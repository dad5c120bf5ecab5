import cmath
import math
import time
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import polynomial as P

from hqd.conformal import (
    DegenerateMapError,
    PolyMap,
    boundary_curve,
    classify_boundary,
    eval_map,
    export_svg,
    injectivity_check,
    parse_coeffs,
    winding_number,
)

CARDIOID = PolyMap((0, 1, 0.5))
TWO_CUSP = PolyMap((0, 1, -2 * math.sqrt(2) / 3, 1 / 3))
# (z - 1)^2 - (1 - i/2)(z - 1)^3 expanded with numpy as an independent check
CURVED_CUSP = PolyMap(tuple(P.polysub(P.polypow([-1, 1], 2), (1 - 0.5j) * P.polypow([-1, 1], 3))))
SQUARE = PolyMap((0, 0, 1))


def _svg_items(path):
    root = ET.parse(path).getroot()
    ns = "{http://www.w3.org/2000/svg}"
    circles = root.findall(f"{ns}circle")
    crosses = [p for p in root.findall(f"{ns}path") if p.get("class") == "double"]
    paths = [p for p in root.findall(f"{ns}path") if p.get("class") == "boundary"]
    return root, circles, crosses, paths


# ------------------------------------------------------------------ eval_map


def test_eval_cardioid_at_minus_one():
    assert eval_map(CARDIOID, -1) == pytest.approx((-0.5, 0, 1, 0), abs=1e-15)


@pytest.mark.parametrize("z", [0, 1, -2.5, 0.3 + 0.7j, 1e3j])
def test_eval_identity(z):
    assert eval_map(PolyMap((0, 1)), z) == (z, 1, 0, 0)


def test_eval_curved_cusp_at_one():
    v = eval_map(CURVED_CUSP, 1.0)
    assert v == pytest.approx((0, 0, 2, -6 + 3j), abs=1e-13)


def test_eval_array_matches_scalar():
    z = np.array([0.1, -0.5j, 0.7 + 0.2j])
    arr = eval_map(TWO_CUSP, z)
    for i, zz in enumerate(z):
        assert np.allclose([a[i] for a in arr], eval_map(TWO_CUSP, complex(zz)), rtol=0, atol=1e-15)


@settings(max_examples=60, deadline=None)
@given(
    coeffs=st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=2, max_size=8),
    z=st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
)
def test_eval_against_numpy_polyval(coeffs, z):
    coeffs[-1] = coeffs[-1] + 1.0  # keep the leading coefficient away from zero
    pm = PolyMap(tuple(coeffs))
    c = np.asarray(pm.coeffs)
    got = eval_map(pm, z)
    bound = np.sum(np.abs(c)) * max(1.0, abs(z)) ** len(c) * 50
    for d in range(4):
        ref = P.polyval(z, P.polyder(c, d)) if d < len(c) else 0
        assert abs(got[d] - ref) <= 1e-13 * bound


def test_trailing_zero_coefficients_are_dropped():
    assert PolyMap((0, 1, 0.5, 0, 0)).degree == 2


@pytest.mark.parametrize("coeffs", [(3.0,), (2.0, 0.0, 0.0), ()])
def test_degenerate_map(coeffs):
    with pytest.raises(DegenerateMapError):
        PolyMap(coeffs)


def test_parse_coeffs():
    pm = parse_coeffs("0, 1, -1+0.5i, 2i")
    assert pm.coeffs == (0, 1, -1 + 0.5j, 2j)
    with pytest.raises(ValueError):
        parse_coeffs("1,,2")
    with pytest.raises(ValueError):
        parse_coeffs("1,abc")


# ------------------------------------------------------------ boundary curve


def test_identity_four_samples():
    c = boundary_curve(PolyMap((0, 1)), 4)
    assert np.allclose(c, [1, 1j, -1, -1j], atol=1e-15)


@pytest.mark.parametrize("m", [64, 100, 513])
def test_cardioid_curve_passes_through_three_halves(m):
    assert boundary_curve(CARDIOID, m)[0] == pytest.approx(1.5)


@pytest.mark.parametrize("pm", [CARDIOID, TWO_CUSP, SQUARE])
def test_real_maps_conjugation_symmetric(pm):
    m = 256
    c = boundary_curve(pm, m)
    # theta -> -theta reverses the index j -> m - j
    assert np.allclose(c[1:][::-1], np.conj(c[1:]), atol=1e-14)


# ------------------------------------------------------------ classification


def test_cardioid_classification():
    rep = classify_boundary(CARDIOID)
    assert len(rep.critical_points) == 1
    cp = rep.critical_points[0]
    assert abs(cp.z + 1) <= 1e-9
    assert abs(cp.image + 0.5) <= 1e-9
    assert cp.ordinary
    assert cp.cusp_value == pytest.approx(3.0)
    assert rep.double_points == []
    assert rep.injective


def test_two_cusp_classification():
    rep = classify_boundary(TWO_CUSP)
    zs = sorted((c.z for c in rep.critical_points), key=lambda z: z.imag)
    expected = [2 * math.sqrt(2) / 3 - 1j / 3, 2 * math.sqrt(2) / 3 + 1j / 3]
    assert len(zs) == 2
    for a, b in zip(zs, expected):
        assert abs(a - b) <= 1e-9
    assert len(rep.double_points) == 1
    dp = rep.double_points[0]
    assert abs(dp.image - math.sqrt(2) / 3) <= 1e-6
    pair = sorted((dp.z1, dp.z2), key=lambda z: z.imag)
    assert abs(pair[0] - cmath.exp(-1j * math.pi / 4)) <= 1e-8
    assert abs(pair[1] - cmath.exp(1j * math.pi / 4)) <= 1e-8


def test_curved_cusp_not_ordinary():
    rep = classify_boundary(CURVED_CUSP)
    assert len(rep.critical_points) == 1
    cp = rep.critical_points[0]
    assert abs(cp.z - 1) <= 1e-9
    assert not cp.ordinary
    assert abs(cp.cusp_value - 1.5j) <= 1e-9


@pytest.mark.parametrize("pm", [CARDIOID, TWO_CUSP, CURVED_CUSP])
def test_report_invariants(pm):
    rep = classify_boundary(pm)
    for c in rep.critical_points:
        _, d1, d2, _ = eval_map(pm, c.z)
        assert abs(d1) <= 1e-9 * rep.scale
        assert abs(d2) > 1e-9 * rep.scale
        assert abs(abs(c.z) - 1) <= 1e-12
    for d in rep.double_points:
        assert abs(d.z1 - d.z2) > 1e-6
        assert abs(pm(d.z1) - pm(d.z2)) <= 1e-9 * rep.scale


@pytest.mark.parametrize(
    "pm",
    [CARDIOID, TWO_CUSP, CURVED_CUSP, PolyMap((0, 1, 0.3)), PolyMap((0, 1, 0, 1 / 3)), PolyMap((1, 2, 0, 0, 0.5))],
)
def test_critical_count_matches_companion_roots(pm):
    roots = np.roots(pm.derivative_coeffs()[::-1])
    on_circle = [r for r in roots if abs(abs(r) - 1) <= 1e-9]
    rep = classify_boundary(pm)
    assert len(rep.critical_points) == len(on_circle)


@pytest.mark.parametrize("pm", [CARDIOID, TWO_CUSP, PolyMap((0, 1, 0, 1 / 3))])
def test_real_maps_conjugate_pairs(pm):
    rep = classify_boundary(pm)
    zs = [c.z for c in rep.critical_points]
    for z in zs:
        assert min(abs(np.conj(z) - w) for w in zs) <= 1e-9
    for d in rep.double_points:
        assert abs(d.image.imag) <= 1e-9 or any(abs(np.conj(d.image) - e.image) <= 1e-9 for e in rep.double_points)


def test_double_point_stable_under_refinement():
    a = classify_boundary(TWO_CUSP, samples=2048).double_points
    b = classify_boundary(TWO_CUSP, samples=4096).double_points
    assert len(a) == len(b) == 1
    assert abs(a[0].image - b[0].image) <= 1e-9


# ---------------------------------------------------------------- injectivity


@pytest.mark.parametrize("pm, expected", [(CARDIOID, True), (SQUARE, False), (TWO_CUSP, True)])
def test_injectivity(pm, expected):
    assert injectivity_check(pm) is expected


def test_winding_of_square_map_around_quarter():
    assert winding_number(boundary_curve(SQUARE, 512), SQUARE(0.5)) == 2


def test_classification_runtime():
    for pm in (CARDIOID, TWO_CUSP, CURVED_CUSP):
        t0 = time.perf_counter()
        classify_boundary(pm)
        assert time.perf_counter() - t0 < 1.0


# ------------------------------------------------------------------------ SVG


def test_svg_cardioid(tmp_path):
    rep = classify_boundary(CARDIOID)
    export_svg(rep, tmp_path / "c.svg")
    root, circles, crosses, paths = _svg_items(tmp_path / "c.svg")
    assert len(circles) == 1 and not crosses and len(paths) == 1
    assert float(circles[0].get("cx")) == pytest.approx(-0.5, abs=1e-9)
    assert float(circles[0].get("cy")) == pytest.approx(0.0, abs=1e-9)
    # viewBox covers the curve with a 5% margin
    x0, y0, w, h = map(float, root.get("viewBox").split())
    pts = rep.samples
    span = max(np.ptp(pts.real), np.ptp(pts.imag))
    assert x0 == pytest.approx(pts.real.min() - 0.05 * span)
    assert w == pytest.approx(np.ptp(pts.real) + 0.1 * span)


def test_svg_two_cusp(tmp_path):
    export_svg(classify_boundary(TWO_CUSP), tmp_path / "e.svg")
    _, circles, crosses, _ = _svg_items(tmp_path / "e.svg")
    assert len(circles) == 2 and len(crosses) == 1


def test_svg_empty_report(tmp_path):
    rep = classify_boundary(PolyMap((0, 1)))
    assert not rep.critical_points and not rep.double_points
    export_svg(rep, tmp_path / "i.svg")
    _, circles, crosses, paths = _svg_items(tmp_path / "i.svg")
    assert not circles and not crosses and len(paths) == 1


def test_report_to_dict_is_json_ready():
    import json

    d = classify_boundary(TWO_CUSP).to_dict()
    json.dumps(d)
    assert d["injective"] is True
