"""Numba kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--solve]

Kernel timings run both backends in one process. ``--solve`` also times a
short inpainting solve in two subprocesses, one with TVDD_DISABLE_NUMBA=1,
so the switch itself is exercised.
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from tvdd import kernels

SOLVE = """
import time
from tvdd import _accel
from tvdd.experiments import inpainting_mask
from tvdd.operators import MaskOperator, normalize_problem
from tvdd.phantom import phantom
from tvdd.decomposition import split_overlapping
from tvdd.solver import SolverConfig, solve_sequential_overlapping
img = phantom(32, 0)
obs = inpainting_mask(img.shape, 0.3, 2, 0)
T, g, a = normalize_problem(MaskOperator(img.shape, obs), img[obs], 0.01)
dec = split_overlapping(img.shape, 0, 4, 8)
solve_sequential_overlapping(T, g, a, dec, SolverConfig(outer_iters=2))
t = time.perf_counter()
st = solve_sequential_overlapping(T, g, a, dec, SolverConfig(outer_iters=30, outer_tol=0))
print(_accel.backend(), time.perf_counter() - t, st.energies[-1])
"""


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def bench_kernel(shape, iters, repeat):
    rng = np.random.default_rng(0)
    f = rng.standard_normal(shape)
    free = rng.random(shape) > 0.1
    tau = 1.0 / (4 * len(shape))

    def run(use_numba):
        p = np.zeros((len(shape),) + shape)
        return kernels.dual_tv(f, free, 0.3, tau, iters, 0.0, p, use_numba=use_numba)

    run(True)  # compile
    t_nb, (w_nb, _, _) = best_of(lambda: run(True), repeat)
    t_np, (w_np, _, _) = best_of(lambda: run(False), repeat)
    return t_nb, t_np, float(np.max(np.abs(w_nb - w_np)))


def bench_solve():
    rows = []
    for disable in ("0", "1"):
        env = dict(os.environ, TVDD_DISABLE_NUMBA=disable)
        out = subprocess.run([sys.executable, "-c", SOLVE], env=env, capture_output=True, text=True, check=True)
        name, secs, e = out.stdout.split()
        rows.append((name, float(secs), float(e)))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--solve", action="store_true", help="also time an end-to-end solve per backend")
    args = ap.parse_args()

    print(f"{'shape':>12} {'sweeps':>7} {'numba [ms]':>11} {'numpy [ms]':>11} {'speedup':>8} {'max diff':>9}")
    for shape, iters in [((1000,), 2000), ((64, 64), 500), ((256, 256), 100)]:
        t_nb, t_np, diff = bench_kernel(shape, iters, args.repeat)
        print(
            f"{'x'.join(map(str, shape)):>12} {iters:>7} {1e3 * t_nb:>11.2f} {1e3 * t_np:>11.2f}"
            f" {t_np / t_nb:>8.1f} {diff:>9.1e}"
        )
    if args.solve:
        print()
        for name, secs, e in bench_solve():
            print(f"solve 32x32, 30 sweeps, {name:>5}: {secs:7.2f} s  final energy {e:.12g}")


if __name__ == "__main__":
    main()
