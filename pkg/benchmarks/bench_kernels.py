"""Compare the compiled and numpy kernel backends.

    python benchmarks/bench_kernels.py [--n 1000000] [--repeat 5]

Reports the best-of-``repeat`` wall time per kernel and the speedup of the
compiled core. Both backends consume identical counters, so the workloads
are the same draw for draw.
"""

import argparse
import math
import timeit

import numpy as np

from weakcomm._kernels import available_backends

KEY = 0x5DEECE66D


def workloads(n):
    up = np.full(n, math.sqrt(0.5) + 0j)
    down = up.copy()
    a_axis = (math.sqrt(0.5), math.sqrt(0.5), 0.0)
    gen = np.random.default_rng(0)
    axes = np.where((gen.random(n) < 0.5)[:, None], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0])
    return {
        "uniform_block": lambda k: k.uniform_block(KEY, 0, n),
        "normal_block": lambda k: k.normal_block(KEY, 0, n),
        "weak_measure": lambda k: k.weak_measure(up, down, a_axis, 5.0, KEY, 0),
        "strong_measure (one axis)": lambda k: k.strong_measure(up, down, np.array([0.0, 1.0, 0.0]),
                                                                KEY, 0),
        "strong_measure (per-spin axes)": lambda k: k.strong_measure(up, down, axes, KEY, 0),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=1_000_000)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    backends = available_backends()
    print(f"n = {args.n}, best of {args.repeat}; backends: {', '.join(sorted(backends))}")
    header = f"{'kernel':32s}" + "".join(f"{name:>12s}" for name in sorted(backends))
    if "cython" in backends:
        header += f"{'speedup':>10s}"
    print(header)
    for name, fn in workloads(args.n).items():
        times = {b: min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
                 for b, mod in backends.items()}
        row = f"{name:32s}" + "".join(f"{times[b] * 1e3:10.1f}ms" for b in sorted(backends))
        if "cython" in times:
            row += f"{times['python'] / times['cython']:9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
