"""Compiled vs numpy wake kernels.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Times park_speeds and park_speeds_jacobian on farms of several sizes, and the
grid-search pair kernel at the acceptance resolution (200 per axis).
"""

import argparse
import timeit

import numpy as np

from seqfo import kernels
from seqfo.bench import aligned_layout, grid_search_optimum

ARGS = dict(diameter=90.0, v_inf=8.0, k_w=0.05, k_d=3.0)


def farm_args(n, seed=0):
    rng = np.random.default_rng(seed)
    x = np.sort(rng.uniform(0, 50 * 90.0, n))
    y = rng.uniform(-300, 300, n)
    return x, y, rng.uniform(0.1, 0.45, n), rng.uniform(-0.5, 0.5, n)


def best_time(fn, repeat):
    number = max(1, int(0.2 / max(timeit.timeit(fn, number=1), 1e-7)))
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = kernels.backends()
    if "compiled" not in backends:
        print("compiled extension not built; only the numpy backend is available")
    print(f"{'kernel':<28}{'N':>5}" + "".join(f"{name:>14}" for name in sorted(backends)) + f"{'speed-up':>10}")
    for n in (3, 9, 36, 100):
        fargs = farm_args(n)
        for kernel in ("park_speeds", "park_speeds_jacobian"):
            times = {name: best_time(lambda m=mod: getattr(m, kernel)(*fargs, **ARGS), args.repeat)
                     for name, mod in backends.items()}
            line = f"{kernel:<28}{n:>5}" + "".join(f"{times[k] * 1e6:>12.1f}us" for k in sorted(times))
            if "compiled" in times:
                line += f"{times['python'] / times['compiled']:>9.1f}x"
            print(line)

    rng = np.random.default_rng(1)
    size = 200 * 200
    grid = (rng.uniform(0, 2e6, size), rng.uniform(100, 512, size), rng.uniform(0, 0.01, size),
            rng.uniform(0, 3000, size), rng.uniform(0, 0.01, size), 2e6)
    times = {name: best_time(lambda m=mod: m.grid_pair_min(*grid), 1) for name, mod in backends.items()}
    line = f"{'grid_pair_min (200/axis)':<28}{2:>5}" + "".join(f"{times[k]:>13.2f}s" for k in sorted(times))
    if "compiled" in times:
        line += f"{times['python'] / times['compiled']:>9.1f}x"
    print(line)

    start = timeit.default_timer()
    grid_search_optimum(aligned_layout(2), resolution=200)
    print(f"grid_search_optimum(N=2, 200/axis) with the active backend ({kernels.BACKEND}): "
          f"{timeit.default_timer() - start:.2f}s")


if __name__ == "__main__":
    main()
