"""Compare the numba and numpy backends on the hot kernels.

    python benchmarks/bench_kernels.py [--repeat 5] [--sizes 640 5120]

Each timing is the best of ``repeat`` runs after one warm-up call (which
also triggers numba compilation).
"""

import argparse
import timeit

import numpy as np

from semimplicit._accel import HAVE_NUMBA
from semimplicit.core import build_grid
from semimplicit.harness import get_case
from semimplicit.harness.study import RunConfig, run_case
from semimplicit.linalg import factor_shifted, solve
from semimplicit.rosenbrock import builtin_tableau
from semimplicit.spatial import WENO53, WenoConfig, biharmonic_matrix, weno_convection
from semimplicit.stability import max_modulus


def best(fn, repeat):
    fn()
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def kernels(n, backend):
    grid = build_grid(-np.pi, np.pi, n)
    u = np.sin(grid.x)
    b = -biharmonic_matrix(grid, u, lambda v: v * v + 2.0, "of_u", 4)
    rhs = np.cos(grid.x)
    weno = WenoConfig(WENO53)
    return {
        "banded LU factor+solve": lambda: solve(factor_shifted(b, grid.dx, backend=backend), rhs),
        "WENO5 convection": lambda: weno_convection(grid, u, lambda v: 0.5 * v * v, weno, lambda v: v, backend),
    }


def stability_kernel(backend):
    tab = builtin_tableau("3/4")
    zt = (np.linspace(-6, 2, 20)[:, None] + 1j * np.linspace(-4, 4, 20)[None, :]).ravel()
    return lambda: max_modulus(tab, zt, 300, backend=backend)


def _line(name, n, ts):
    speed = f"{ts[0] / ts[1]:8.1f}x" if len(ts) > 1 else ""
    print(f"{name:28s} {n:>6} " + " ".join(f"{t * 1e3:9.3f}ms" for t in ts) + f"  {speed}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--sizes", type=int, nargs="+", default=[640, 5120])
    args = ap.parse_args()
    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    print(f"{'kernel':28s} {'N':>6s} " + " ".join(f"{b:>11s}" for b in backends) + "   speedup")
    for n in args.sizes:
        rows = {}
        for backend in backends:
            for name, fn in kernels(n, backend).items():
                rows.setdefault(name, []).append(best(fn, args.repeat))
        for name, ts in rows.items():
            _line(name, n, ts)
    _line("stability field (400 pts)", "-", [best(stability_kernel(b), args.repeat) for b in backends])
    case = get_case("R1")
    for backend in backends:
        cfg = RunConfig(gamma="3/4", backend=backend)
        t = best(lambda: run_case(case, cfg, 640), 1)
        print(f"R1 end-to-end N=640 [{backend}]: {t:.2f} s")


if __name__ == "__main__":
    main()
