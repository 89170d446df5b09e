"""Time the numpy and numba versions of each hot kernel on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat 7] [--scale 1]

The first numba call includes JIT compilation (or a cache load); it is shown
separately and excluded from the per-call timings.
"""

import argparse
import timeit

import numpy as np

from ipwmc import _kernels


def make_inputs(scale: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    n = 100_000 * scale
    edges = np.linspace(0.01, 0.99, 6)
    px = rng.uniform(0.01, 0.99, n)
    idx = rng.integers(0, 5, n)
    u = np.sort(np.concatenate(([0.0], rng.random(n), [1.0])))
    L = rng.uniform(0.0, 2.0, (20_000 * scale, 8)) + 1e-3
    counts = np.bincount(rng.integers(0, 8, L.shape[0]), minlength=8).astype(float)
    psi = rng.uniform(0.5, 2.0, 8)
    return {
        "bin_stats": (px, edges),
        "binned_sums": (idx, rng.random(n), 5),
        "left_riemann": (u, u**2),
        "trapezoid": (u, u**2),
        "ips_sweep": (L, counts, psi),
    }


def best_time(fn, args, repeat: int) -> float:
    timer = timeit.Timer(lambda: fn(*args))
    number, _ = timer.autorange()
    return min(timer.repeat(repeat=repeat, number=number)) / number


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=7)
    parser.add_argument("--scale", type=int, default=1, help="multiply input sizes")
    args = parser.parse_args(argv)

    inputs = make_inputs(args.scale)
    impls = _kernels.IMPLEMENTATIONS
    print(f"active backend: {_kernels.BACKEND}")
    if "numba" not in impls:
        print("numba is not installed: timing numpy only")

    print(f"{'kernel':<14}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}{'first call [s]':>16}")
    for name, kargs in inputs.items():
        t_np = best_time(impls["numpy"][name], kargs, args.repeat)
        if "numba" in impls:
            start = timeit.default_timer()
            impls["numba"][name](*kargs)
            first = timeit.default_timer() - start
            t_nb = best_time(impls["numba"][name], kargs, args.repeat)
            print(f"{name:<14}{1e3 * t_np:12.3f}{1e3 * t_nb:12.3f}{t_np / t_nb:10.2f}{first:16.3f}")
        else:
            print(f"{name:<14}{1e3 * t_np:12.3f}{'-':>12}{'-':>10}{'-':>16}")


if __name__ == "__main__":
    main()
