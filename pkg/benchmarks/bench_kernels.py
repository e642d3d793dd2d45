"""Compiled versus pure-Python kernel timings.

    python benchmarks/bench_kernels.py [--repeat 5] [--sizes 64 256 1024]

Prints one row per kernel and problem size with the best-of-repeat time of
each backend and the speedup. Outputs of the two backends are checked for
exact agreement before timing.
"""
import argparse
import timeit

import numpy as np

from rifields import _kernels_py as pure

try:
    from rifields import _ckernels as compiled
except ImportError:  # extension not built
    compiled = None


def _metric(n, rng):
    x = np.sort(rng.random(n))
    return np.abs(x[:, None] - x[None, :])


def cases(n, rng):
    d = _metric(n, rng)
    w = np.full(n, 1.0 / n)
    eps = 2.0 / n
    y = np.linspace(-3.0, 3.0, 16 * n)
    f = y ** 2 + 0.1 * np.sin(7 * y) ** 2
    u = np.linspace(-5.0, 5.0, 16 * n)
    net = np.arange(0, n, 7, dtype=np.int64)
    return {
        "lower_hull": (lambda k: k.lower_hull(y, f)),
        "legendre_max": (lambda k: k.legendre_max(y, f, u)),
        "greedy_cover": (lambda k: k.greedy_cover(d, eps, 0)),
        "greedy_packing": (lambda k: k.greedy_packing(d, 2 * eps)),
        "ball_max": (lambda k: k.ball_max(d, w, eps)),
        "nearest": (lambda k: k.nearest(d, net)),
    }


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 256, 1024])
    args = ap.parse_args(argv)
    if compiled is None:
        print("compiled extension not available; build with `pip install -e .`")
        return 1
    rng = np.random.default_rng(0)
    print(f"{'kernel':<16}{'n':>6}{'compiled [s]':>15}{'python [s]':>15}{'speedup':>10}")
    for n in args.sizes:
        for name, call in cases(n, rng).items():
            if not _same(call(compiled), call(pure)):
                raise SystemExit(f"backends disagree on {name} at n={n}")
            tc = min(timeit.repeat(lambda: call(compiled), number=1, repeat=args.repeat))
            tp = min(timeit.repeat(lambda: call(pure), number=1, repeat=args.repeat))
            print(f"{name:<16}{n:>6}{tc:>15.3e}{tp:>15.3e}{tp / tc:>10.1f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
