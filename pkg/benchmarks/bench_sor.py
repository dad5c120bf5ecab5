"""Compare the compiled and numpy projected-SOR kernels on the disk test case.

    python benchmarks/bench_sor.py --cells 256 512

Both backends solve the same uniform-disk obstacle problem; the script
reports wall time, sweep count and the max difference in V between them.
"""

import argparse
import time

import numpy as np

from hqd import _backend
from hqd.balayage import SolverConfig, solve_obstacle
from hqd.kernel import HelmholtzParams, mvt_constant, r_max
from hqd.measures import Grid2, Measure


def run(cells: int, backend: str, repeats: int):
    params = HelmholtzParams(2, 1.0)
    grid = Grid2.covering(r_max(params), cells)
    kappa = mvt_constant(params, 0.6) / mvt_constant(params, 0.3)
    mu = Measure.disk_density(grid, 0.3, kappa)
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        res = solve_obstacle(mu, grid, params, SolverConfig(backend=backend))
        best = min(best, time.perf_counter() - t0)
    return best, res


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cells", type=int, nargs="+", default=[256, 512])
    ap.add_argument("--repeats", type=int, default=1)
    args = ap.parse_args()
    backends = ["python"]
    if _backend.BACKEND == "cython":
        backends.insert(0, "cython")
    print(f"threads={_backend.thread_count()}")
    print(f"{'cells':>6} {'backend':>8} {'seconds':>9} {'sweeps':>7} {'max|dV|':>10}")
    for cells in args.cells:
        ref = None
        for b in backends:
            t, res = run(cells, b, args.repeats)
            dv = 0.0 if ref is None else float(np.abs(res.V.values - ref.V.values).max())
            ref = ref or res
            print(f"{cells:>6} {b:>8} {t:>9.3f} {res.iterations:>7} {dv:>10.2e}")


if __name__ == "__main__":
    main()
