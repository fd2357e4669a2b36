"""Compiled vs numpy kernels: per-kernel timings and one end-to-end run.

    python3 benchmarks/bench_kernels.py [--sizes 512 4096 32768] [--repeat 7]

The end-to-end part runs the same simulation in two subprocesses, one with
``EULERLAB_PURE_PYTHON=1``, because the backend is chosen at import.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from eulerlab import kernels

RUN = """
import time
from eulerlab import fields as fl, gas as gt, kernels
from eulerlab.evolution import SolverConfig, run
gas = gt.GasModel(5 / 3)
grid = fl.Grid1D(0.0, 6.283185307179586, {n})
snap, _ = fl.sample_initial(gas, grid, fl.constant(1.0), fl.sine(-1.0))
t0 = time.perf_counter()
res = run(snap, SolverConfig(T=1.0))
print(kernels.BACKEND, res.steps, time.perf_counter() - t0)
"""


def kernel_cases(n, rng):
    x = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    f = np.sin(x) + 0.1 * rng.standard_normal(n)
    dx = x[1] - x[0]
    pts = x + 0.37 * dx
    d = kernels.backends()["python"].node_slopes(f, dx, True)
    return {
        "derivative": lambda m: m.derivative(f, dx, True),
        "node_slopes": lambda m: m.node_slopes(f, dx, True),
        "hermite_eval": lambda m: m.hermite_eval(f, d, 0.0, dx, pts, True),
        "linear_eval": lambda m: m.linear_eval(f, 0.0, dx, pts, True),
    }


def bench_kernels(sizes, repeat):
    mods = kernels.backends()
    rng = np.random.default_rng(0)
    names = sorted(mods)
    print(f"{'kernel':<14}{'n':>8}" + "".join(f"{b + ' [us]':>16}" for b in names) + f"{'speedup':>10}")
    for n in sizes:
        for kname, fn in kernel_cases(n, rng).items():
            times = {}
            for b in names:
                timer = timeit.Timer(lambda: fn(mods[b]))
                loops, _ = timer.autorange()
                times[b] = min(timer.repeat(repeat, loops)) / loops * 1e6
            speed = times["python"] / times["cython"] if "cython" in times else float("nan")
            print(f"{kname:<14}{n:>8}" + "".join(f"{times[b]:>16.1f}" for b in names) + f"{speed:>10.2f}")


def bench_run(n):
    print(f"\nend-to-end: sine data, n={n}, T=1")
    for pure in ("0", "1"):
        env = dict(os.environ, EULERLAB_PURE_PYTHON=pure)
        out = subprocess.run([sys.executable, "-c", RUN.format(n=n)], env=env, capture_output=True,
                             text=True, check=True).stdout.split()
        backend, steps, secs = out[0], int(out[1]), float(out[2])
        print(f"  {backend:<8}{steps:>6} steps {secs:8.3f} s  ({secs / steps * 1e3:.3f} ms/step)")


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[512, 4096, 32768])
    p.add_argument("--repeat", type=int, default=7)
    p.add_argument("--run-n", type=int, default=4096, help="grid size of the end-to-end run")
    args = p.parse_args(argv)
    if "cython" not in kernels.backends():
        print("compiled extension not built; only the numpy backend is available")
    bench_kernels(args.sizes, args.repeat)
    bench_run(args.run_n)


if __name__ == "__main__":
    main()
