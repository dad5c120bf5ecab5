"""Command-line entry point.

Every command writes ``diag.json`` into its output directory holding the
fully resolved configuration, so ``hqd <cmd> --config out/diag.json``
reproduces a run.  Exit status: 0 on success, 1 when a validation or
invariant check fails (named in ``diag.json``), 2 on malformed input.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import _backend
from .balayage import (
    AdmissibilityError,
    ConvergenceError,
    SolverConfig,
    mask_perimeter,
    quadrature_domain_pipeline,
    solve_obstacle,
)
from .conformal import classify_boundary, boundary_curve, export_svg, parse_coeffs
from .kernel import (
    HelmholtzParams,
    SingularConfigurationError,
    fundamental_solution,
    mvt_constant,
    pompeiu_profile,
    r_max,
)
from .measures import (
    Grid2,
    Measure,
    SupportError,
    load_measure,
    measure_from_dict,
    potential,
    total_mass,
    write_f64,
    read_f64,
)
from .specialfn import SUPPORTED_ORDERS, BesselDomainError, bessel, first_zero
from .verify import (
    Disk,
    TestFunctionSet,
    far_field,
    mvt_numeric_check,
    pde_residual,
    quadrature_identity_report,
    subsolution_inequality,
)

log = logging.getLogger("hqd")

EXIT_OK, EXIT_CHECK, EXIT_INPUT = 0, 1, 2

# invariant tolerances checked after every solve
NU_TOL = 1e-6
MASS_FRACTION = 0.02


class InputError(ValueError):
    """Malformed command-line or configuration input."""


# ----------------------------------------------------------------- file IO


def write_pgm(path, mask: np.ndarray, grid: Grid2 | None = None) -> None:
    """Binary PGM (P5), 255 inside.  First row is the top of the domain (largest y)."""
    img = np.flipud(np.where(mask, 255, 0).astype(np.uint8))
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())
    if grid is not None:
        Path(str(path) + ".json").write_text(json.dumps({"grid": grid.to_dict(), "orientation": "top row = max y"}, indent=2))


def read_pgm(path) -> np.ndarray:
    """Inverse of :func:`write_pgm`: boolean mask indexed [j, i] with j increasing in y."""
    data = Path(path).read_bytes()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        start = pos
        while not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos].decode("ascii"))
    if tokens[0] != "P5":
        raise InputError(f"{path}: not a binary PGM")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval > 255:
        raise InputError(f"{path}: 16-bit PGM not supported")
    pix = np.frombuffer(data[pos + 1:pos + 1 + w * h], dtype=np.uint8)
    if pix.size != w * h:
        raise InputError(f"{path}: truncated pixel data")
    return np.flipud(pix.reshape(h, w) > maxval // 2)


def _grid_sidecar(path) -> Grid2:
    side = Path(str(path) + ".json")
    if not side.exists():
        raise InputError(f"missing grid sidecar {side}")
    return Grid2.from_dict(json.loads(side.read_text())["grid"])


def _write_json(path, data) -> None:
    Path(path).write_text(json.dumps(data, indent=2, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not serialisable: {type(o)}")


def _csv_out(rows, header, path=None):
    fh = open(path, "w", newline="") if path else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in r])
    finally:
        if path:
            fh.close()


# ------------------------------------------------------------ configuration


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError(f"config {path} must be a JSON object")
    # a diag.json is accepted as a config: its resolved block is the config
    return dict(data.get("config", data))


def _params(cfg: dict, args) -> HelmholtzParams:
    k = args.k if getattr(args, "k", None) is not None else cfg.get("k", 1.0)
    n = args.n if getattr(args, "n", None) is not None else cfg.get("n", 2)
    try:
        return HelmholtzParams(n=int(n), k=float(k))
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from exc


def _resolve_measure(spec, base: Path, grid: Grid2 | None, params: HelmholtzParams) -> Measure:
    """Measure from a path, an inline measure dict, or a ``{"disk": ...}`` shorthand."""
    if isinstance(spec, str):
        m, _ = load_measure(base / spec)
        return m
    if not isinstance(spec, dict):
        raise InputError("measure must be a path or an object")
    if "disk" in spec:
        d = spec["disk"]
        radius = float(d["radius"])
        if "value" in d:
            value = float(d["value"])
        elif "match_radius" in d:
            # density whose mass cancels the mean-value constant of the outer disk
            value = mvt_constant(params, float(d["match_radius"])) / mvt_constant(params, radius)
        else:
            raise InputError("disk measure needs 'value' or 'match_radius'")
        extra = Measure(diracs=tuple((tuple(p["point"]), p["weight"]) for p in spec.get("diracs", [])))
        return Measure.disk_density(grid, radius, value, tuple(d.get("center", (0.0, 0.0)))) + extra
    m, _ = measure_from_dict(spec, base=base)
    return m


def _solver_grid(cfg: dict, args, params: HelmholtzParams, base: Path) -> Grid2:
    spec = cfg.get("measure")
    # a file-backed density fixes the grid
    if isinstance(spec, (str, dict)) and not (isinstance(spec, dict) and "disk" in spec):
        data = json.loads((base / spec).read_text()) if isinstance(spec, str) else spec
        if data.get("density"):
            return Grid2.from_dict(data["density"]["grid"])
    g = cfg.get("grid", {})
    if "nx" in g:
        return Grid2.from_dict(g)
    cells = args.cells if getattr(args, "cells", None) else int(g.get("cells", 256))
    return Grid2.covering(r_max(params), cells)


def _resolve_solver_inputs(args):
    cfg = _load_config(args.config)
    base = Path(args.config).parent if args.config else Path(".")
    if args.measure:
        cfg["measure"] = str(Path(args.measure).resolve())
        base = Path(".")
    if "measure" not in cfg:
        raise InputError("no measure given (use --measure or a config 'measure' entry)")
    spec = cfg["measure"]
    # k and n stored with the measure apply unless the config overrides them
    try:
        data = json.loads((base / spec).read_text()) if isinstance(spec, str) else spec
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read measure {spec}: {exc}") from exc
    for key in ("k", "n"):
        if key in data and key not in cfg:
            cfg[key] = data[key]
    params = _params(cfg, args)
    try:
        grid = _solver_grid(cfg, args, params, base)
        measure = _resolve_measure(cfg["measure"], base, grid, params)
    except (OSError, KeyError, json.JSONDecodeError, TypeError) as exc:
        raise InputError(f"bad measure: {exc}") from exc
    solver = SolverConfig.from_dict(cfg.get("solver"))
    if getattr(args, "backend", None):
        solver = SolverConfig.from_dict({**solver.to_dict(), "backend": args.backend})
    measure_spec = cfg["measure"]
    if isinstance(measure_spec, str):
        measure_spec = str((base / measure_spec).resolve())
    resolved = {
        "n": params.n,
        "k": params.k,
        "grid": grid.to_dict(),
        "measure": measure_spec,
        "solver": solver.to_dict(),
    }
    return cfg, params, grid, measure, solver, resolved


def _out_dir(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------- commands


def cmd_bessel(args) -> int:
    orders = args.nu if args.nu else [0.0, 1.0]
    if args.zeros:
        _csv_out([(nu, first_zero(nu)) for nu in orders], ["nu", "first_zero"], args.csv)
        return EXIT_OK
    xs = args.x if args.x else list(np.linspace(args.xmin, args.xmax, args.count))
    rows = []
    for nu in orders:
        for x in xs:
            rows.append((float(nu), float(x), bessel("J", nu, x), bessel("Y", nu, x) if x > 0 else float("nan")))
    _csv_out(rows, ["nu", "x", "J", "Y"], args.csv)
    return EXIT_OK


def _radial_table(args, fn, rmin, rmax):
    r = np.linspace(rmin, rmax, args.count)
    return [(float(a), float(v), float(d)) for a, (v, d) in zip(r, (fn(x) for x in r))]


def cmd_fundsol(args) -> int:
    params = HelmholtzParams(args.n, args.k)
    R = args.R if args.R is not None else r_max(params)
    rows = _radial_table(args, lambda x: fundamental_solution(params, R, x), R / args.count, R)
    _csv_out(rows, ["r", "value", "derivative"], args.csv)
    return EXIT_OK


def cmd_mvt(args) -> int:
    params = HelmholtzParams(args.n, args.k)
    n, k = params.n, params.k
    R = args.R if args.R is not None else r_max(params)

    def fn(r):
        # d/dr r^{n/2} J_{n/2}(kr) = k r^{n/2} J_{n/2-1}(kr)
        d = (2 * math.pi) ** (n / 2) * r ** (n / 2) * bessel("J", n / 2 - 1, k * r) / k ** (n / 2 - 1)
        return mvt_constant(params, r), d

    _csv_out(_radial_table(args, fn, R / args.count, R), ["r", "value", "derivative"], args.csv)
    if args.check:
        out = _out_dir(args)
        rep = mvt_numeric_check(params, R, TestFunctionSet("plane_waves", k, args.waves))
        ok = rep["max_rel_error"] <= 1e-6 and rep["monotone"]
        _write_json(out / "diag.json", {
            "command": "mvt",
            "config": {"n": n, "k": k, "R": R, "waves": args.waves},
            "report": rep,
            "failed": [] if ok else ["mvt_identity_or_monotonicity"],
        })
        return EXIT_OK if ok else EXIT_CHECK
    return EXIT_OK


def cmd_pompeiu(args) -> int:
    params = HelmholtzParams(args.n, args.k)
    R_star, offset, prof = pompeiu_profile(params)
    r = np.linspace(0.0, R_star, args.count)
    rows = [(float(a), float(prof(a)), float(prof.radial_derivative(a))) for a in r]
    _csv_out(rows, ["r", "value", "derivative"], args.csv)
    if args.out:
        _write_json(_out_dir(args) / "diag.json", {
            "command": "pompeiu",
            "config": {"n": params.n, "k": params.k, "count": args.count},
            "R_star": R_star,
            "offset": offset,
        })
    return EXIT_OK


def _invariant_checks(result, measure: Measure) -> dict:
    """Structure and mass inequalities of a solved balayage; each is a named boolean."""
    grid = result.grid
    keep = ~result.collar
    nu = result.nu.values
    checks = {"nu_le_one": float(nu[keep].max(initial=-np.inf)) <= 1.0 + NU_TOL}
    if measure.density is not None and not measure.diracs:
        lower = np.minimum(measure.density.values, 1.0)
        checks["nu_ge_min_mu_one"] = bool(np.all(lower[keep] <= nu[keep] + NU_TOL))
    mass = total_mass(measure)
    area = float(result.omega_mask.sum()) * grid.cell_area
    checks["mass_bound"] = area >= (1.0 - MASS_FRACTION) * mass
    return checks


def _emit_solution(out: Path, result, grid: Grid2) -> None:
    write_f64(out / "V.f64", result.V.values, grid, field="V")
    write_f64(out / "nu.f64", result.nu.values, grid, field="nu")
    write_pgm(out / "omega.pgm", result.omega_mask, grid)
    write_pgm(out / "saturated.pgm", result.saturated_mask, grid)


def cmd_balayage(args) -> int:
    out = _out_dir(args)
    _, params, grid, measure, solver, resolved = _resolve_solver_inputs(args)
    diag = {"command": "balayage", "config": resolved, "backend": solver.backend or _backend.BACKEND,
            "threads": _backend.thread_count()}
    try:
        result = solve_obstacle(measure, grid, params, solver)
    except (SupportError, ConvergenceError) as exc:
        diag["failed"] = ["k_range" if isinstance(exc, SupportError) else "convergence"]
        diag["error"] = str(exc)
        _write_json(out / "diag.json", diag)
        return EXIT_CHECK
    _emit_solution(out, result, grid)
    checks = _invariant_checks(result, measure)
    h = grid.h
    mass = total_mass(measure)
    diag.update(result.diagnostics())
    diag.update({
        "mass": mass,
        "omega_area": float(result.omega_mask.sum()) * h * h,
        "saturated_area": float(result.saturated_mask.sum()) * h * h,
        "perimeter": mask_perimeter(result.omega_mask, h),
        "checks": checks,
        "failed": [k for k, v in checks.items() if not v],
    })
    _write_json(out / "diag.json", diag)
    return EXIT_OK if not diag["failed"] else EXIT_CHECK


def cmd_pipeline(args) -> int:
    out = _out_dir(args)
    cfg, params, grid, measure, solver, resolved = _resolve_solver_inputs(args)
    eps = args.epsilon if args.epsilon is not None else cfg.get("epsilon")
    if eps is None or not float(eps) > 0:
        raise InputError("pipeline needs a positive epsilon")
    resolved["epsilon"] = float(eps)
    diag = {"command": "pipeline", "config": resolved, "backend": solver.backend or _backend.BACKEND}
    try:
        pr = quadrature_domain_pipeline(measure, params, float(eps), grid, solver)
    except AdmissibilityError as exc:
        diag.update({"failed": list(exc.failed), "checks": exc.checks, "error": str(exc)})
        _write_json(out / "diag.json", diag)
        return EXIT_CHECK
    except ConvergenceError as exc:
        diag.update({"failed": ["convergence"], "error": str(exc)})
        _write_json(out / "diag.json", diag)
        return EXIT_CHECK
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    _emit_solution(out, pr.result, grid)
    write_pgm(out / "domain.pgm", pr.domain_mask, grid)
    diag.update(pr.result.diagnostics())
    diag.update({"checks": pr.checks, "area": pr.area, "radius_estimate": pr.radius_estimate, "failed": []})
    _write_json(out / "diag.json", diag)
    return EXIT_OK


def _verify_inputs(args):
    if not args.measure:
        raise InputError("--measure is required")
    try:
        measure, mparams = load_measure(args.measure)
    except (OSError, KeyError, json.JSONDecodeError, TypeError) as exc:
        raise InputError(f"bad measure: {exc}") from exc
    k = args.k if args.k is not None else (mparams.k if mparams else 1.0)
    params = HelmholtzParams(2, k)
    mask = grid = None
    if args.domain:
        mask = read_pgm(args.domain)
        grid = _grid_sidecar(args.domain)
        if mask.shape != grid.shape:
            raise InputError("domain mask does not match its grid sidecar")
    return measure, params, mask, grid


def cmd_verify(args) -> int:
    report_path = Path(args.out or "report.json")
    report_path.parent.mkdir(parents=True, exist_ok=True)
    config = {"check": args.check, "k": args.k, "waves": args.waves,
              "domain": args.domain and str(Path(args.domain).resolve()),
              "measure": args.measure and str(Path(args.measure).resolve()),
              "tol": args.tol}
    report: dict = {"command": "verify", "check": args.check}
    failed: list[str] = []
    if args.check == "mvt":
        params = HelmholtzParams(2, args.k if args.k is not None else 1.0)
        R = args.R if args.R is not None else 0.9
        config.update({"k": params.k, "R": R})
        rep = mvt_numeric_check(params, R, TestFunctionSet("plane_waves", params.k, args.waves))
        report.update(rep)
        if rep["max_rel_error"] > (args.tol or 1e-6) or not rep["monotone"]:
            failed.append("mvt_identity_or_monotonicity")
    else:
        measure, params, mask, grid = _verify_inputs(args)
        config["k"] = params.k
        if mask is None:
            raise InputError("--domain is required")
        if args.check == "quadrature":
            rows = quadrature_identity_report(mask, measure, TestFunctionSet("plane_waves", params.k, args.waves), grid)
            report["tests"] = rows
            report["max_relative_error"] = max(r["relative_error"] for r in rows)
            if args.tol is not None and report["max_relative_error"] > args.tol:
                failed.append("quadrature_identity")
        elif args.check == "subsolution":
            rep = subsolution_inequality(mask, measure, grid, params)
            report.update(rep)
            mass = total_mass(measure)
            if rep["constant"]["slack"] < -MASS_FRACTION * mass:
                failed.append("subsolution_constant")
            if any(p["slack"] < -(args.tol or 0.0) for p in rep["probes"]):
                failed.append("subsolution_probe")
        elif args.check == "pde":
            if not args.V:
                raise InputError("pde check needs --V")
            V = read_f64(args.V, grid)
            U = potential(measure, grid, params)
            res = pde_residual(U, V, mask, measure, grid, params, exclude_radius=args.exclude)
            report.update({"interior_residual": res[0], "exterior_value": res[1], "exterior_gradient": res[2]})
            if args.tol is not None and res[0] > args.tol:
                failed.append("pde_interior")
        elif args.check == "farfield":
            ff = far_field(mask, measure, params, args.directions, grid=grid)
            report.update(ff.to_dict())
            if args.tol is not None and ff.max_abs > args.tol:
                failed.append("far_field")
    report["failed"] = failed
    report["config"] = config
    _write_json(report_path, report)
    _write_json(report_path.parent / "diag.json", {"command": "verify", "config": config, "failed": failed})
    return EXIT_CHECK if failed else EXIT_OK


def _parse_disk(text: str) -> Disk:
    try:
        cx, cy, r = (float(t) for t in text.split(","))
    except ValueError as exc:
        raise InputError(f"disk must be 'cx,cy,r', got {text!r}") from exc
    return Disk((cx, cy), r)


def cmd_farfield(args) -> int:
    out = _out_dir(args)
    if args.disk:
        from .verify import DiskMeasure

        params = HelmholtzParams(2, args.k if args.k is not None else 1.0)
        domain = [_parse_disk(t) for t in args.disk]
        measures = []
        for t in args.density_disk or []:
            *geo, value = t.split(",")
            measures.append(DiskMeasure(_parse_disk(",".join(geo)), float(value)))
        if args.measure:
            measures.append(load_measure(args.measure)[0])
        ff = far_field(domain, measures, params, args.directions)
    else:
        measure, params, mask, grid = _verify_inputs(args)
        if mask is None:
            raise InputError("give --domain or --disk")
        ff = far_field(mask, measure, params, args.directions, grid=grid)
    d = ff.to_dict()
    _csv_out([(p["angle"], p["re"], p["im"]) for p in d["pattern"]], ["angle", "re", "im"], out / "farfield.csv")
    failed = ["far_field"] if args.tol is not None and ff.max_abs > args.tol else []
    config = {"k": params.k, "directions": args.directions, "disk": args.disk, "density_disk": args.density_disk,
              "domain": args.domain, "measure": args.measure, "tol": args.tol}
    _write_json(out / "diag.json", {"command": "farfield", "config": config, "max_abs": ff.max_abs, "failed": failed})
    print(f"max|F| = {ff.max_abs:.6e}")
    return EXIT_CHECK if failed else EXIT_OK


def cmd_conformal(args) -> int:
    try:
        pmap = parse_coeffs(args.coeffs)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    out = _out_dir(args)
    diag = {"command": "conformal", "config": {"coeffs": args.coeffs, "samples": args.samples}, "failed": []}
    if args.csv:
        P = boundary_curve(pmap, args.samples)
        theta = 2 * math.pi * np.arange(args.samples) / args.samples
        _csv_out([(float(t), float(p.real), float(p.imag)) for t, p in zip(theta, P)], ["theta", "x", "y"], out / args.csv)
    if args.classify or args.svg:
        report = classify_boundary(pmap, args.samples)
        diag["report"] = report.to_dict()
        if args.svg:
            export_svg(report, out / args.svg)
        if not report.injective:
            diag["failed"].append("injectivity")
        print(json.dumps(report.to_dict(), indent=2))
    _write_json(out / "diag.json", diag)
    return EXIT_CHECK if diag["failed"] else EXIT_OK


# ------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hqd", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bessel", help="Bessel J/Y values or first zeros as CSV")
    b.add_argument("--nu", type=float, nargs="+", help=f"orders, from {SUPPORTED_ORDERS}")
    b.add_argument("--x", type=float, nargs="+", help="explicit arguments")
    b.add_argument("--xmin", type=float, default=0.5)
    b.add_argument("--xmax", type=float, default=10.0)
    b.add_argument("--count", type=int, default=20)
    b.add_argument("--zeros", action="store_true", help="print first positive zeros instead")
    b.add_argument("--csv", help="write CSV here instead of stdout")

    for name, helptext in (("fundsol", "fundamental solution vanishing at R"),
                           ("mvt", "mean-value constant as a function of radius"),
                           ("pompeiu", "Pompeiu profile")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--n", type=int, default=2, choices=(2, 3))
        s.add_argument("--k", type=float, default=1.0)
        s.add_argument("--count", type=int, default=50)
        s.add_argument("--csv", help="write CSV here instead of stdout")
        s.add_argument("--out", help="output directory for diag.json")
        if name != "pompeiu":
            s.add_argument("--R", type=float, help="radius (default: working radius)")
        if name == "mvt":
            s.add_argument("--check", action="store_true", help="run the polar quadrature check")
            s.add_argument("--waves", type=int, default=8)

    for name in ("balayage", "pipeline"):
        s = sub.add_parser(name, help="solve the obstacle problem" if name == "balayage"
                           else "mollify, sweep and validate a quadrature domain")
        s.add_argument("--config", help="JSON config (or a previous diag.json)")
        s.add_argument("--measure", help="measure JSON file (overrides the config)")
        s.add_argument("--k", type=float)
        s.add_argument("--n", type=int)
        s.add_argument("--cells", type=int, help="grid cells per side (default 256)")
        s.add_argument("--backend", choices=("cython", "python"))
        s.add_argument("--out", default=".", help="output directory")
        if name == "pipeline":
            s.add_argument("--epsilon", type=float, help="support radius bound of the measure")

    v = sub.add_parser("verify", help="check quadrature-domain properties")
    v.add_argument("check", choices=("quadrature", "subsolution", "pde", "farfield", "mvt"))
    v.add_argument("--domain", help="domain mask (PGM P5 with .json grid sidecar)")
    v.add_argument("--measure", help="measure JSON file")
    v.add_argument("--V", help="V.f64 from a balayage run (pde check)")
    v.add_argument("--k", type=float)
    v.add_argument("--R", type=float, help="ball radius for the mvt check")
    v.add_argument("--waves", type=int, default=8, help="plane-wave directions")
    v.add_argument("--directions", type=int, default=64)
    v.add_argument("--exclude", type=float, help="exclusion radius around point masses (pde)")
    v.add_argument("--tol", type=float, help="fail (exit 1) above this defect")
    v.add_argument("--out", default="report.json", help="report path")

    f = sub.add_parser("farfield", help="far-field source defect")
    f.add_argument("--domain", help="domain mask (PGM P5 with sidecar)")
    f.add_argument("--disk", action="append", help="analytic domain disk 'cx,cy,r' (repeatable)")
    f.add_argument("--density-disk", action="append", help="uniform density disk 'cx,cy,r,value'")
    f.add_argument("--measure", help="measure JSON file")
    f.add_argument("--k", type=float)
    f.add_argument("--directions", type=int, default=64)
    f.add_argument("--tol", type=float, help="fail (exit 1) when max|F| exceeds this")
    f.add_argument("--out", default=".", help="output directory")

    c = sub.add_parser("conformal", help="boundary of a polynomial conformal image of the disk")
    c.add_argument("--coeffs", required=True, help="comma-separated a0,a1,... ('re' or 're+imi')")
    c.add_argument("--samples", type=int, default=4096)
    c.add_argument("--classify", action="store_true")
    c.add_argument("--svg", help="SVG file name (relative to --out)")
    c.add_argument("--csv", help="boundary CSV file name (relative to --out)")
    c.add_argument("--out", default=".", help="output directory")
    return p


COMMANDS = {
    "bessel": cmd_bessel,
    "fundsol": cmd_fundsol,
    "mvt": cmd_mvt,
    "pompeiu": cmd_pompeiu,
    "balayage": cmd_balayage,
    "pipeline": cmd_pipeline,
    "verify": cmd_verify,
    "farfield": cmd_farfield,
    "conformal": cmd_conformal,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (InputError, BesselDomainError, SingularConfigurationError) as exc:
        print(f"hqd: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        # validation of user-supplied data (negative weights, bad grids, missing files)
        print(f"hqd: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
