"""Compare the compiled and NumPy sweep kernels.

Times one objective+gradient evaluation and one short stagewise solve per
size and backend, then fits the log-log slope of evaluation time against n.

    python benchmarks/bench_backends.py --sizes 25 50 100 200 --repeat 5
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from causalcomp import _kernels
from causalcomp.gaussian_info import OUTGOING, CovarianceModel


def random_correlation(n: int, seed: int = 0) -> CovarianceModel:
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((2 * n, 4 * n))
    c = a @ a.T
    s = np.sqrt(np.diag(c))
    return CovarianceModel(c / np.outer(s, s))


def best_time(fn, repeat: int) -> float:
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(sizes, repeat: int, steps: int):
    rows = []
    for n in sizes:
        cov = random_correlation(n, seed=n)
        d = np.full(n, 0.1)
        for name, mod in sorted(_kernels.BACKENDS.items()):
            prob = _kernels.Problem(cov, OUTGOING)
            mod.evaluate(prob, d)  # warm caches and buffers
            t_eval = best_time(lambda: mod.evaluate(prob, d), repeat)
            t_path = best_time(lambda: mod.stagewise(prob, 0.01, steps, steps, 1e-12), max(1, repeat // 2))
            rows.append((name, n, t_eval, t_path))
    return rows


def slope(ns, ts) -> float:
    return float(np.polyfit(np.log(ns), np.log(ts), 1)[0])


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[25, 50, 100, 200])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--steps", type=int, default=20, help="stagewise steps per solve")
    args = p.parse_args(argv)

    rows = bench(args.sizes, args.repeat, args.steps)
    print(f"{'backend':<8} {'n':>5} {'eval [ms]':>12} {'solve [ms]':>12}")
    for name, n, te, tp in rows:
        print(f"{name:<8} {n:>5} {1e3 * te:>12.3f} {1e3 * tp:>12.3f}")
    print()
    by = {}
    for name, n, te, _ in rows:
        by.setdefault(name, []).append((n, te))
    for name, pts in sorted(by.items()):
        ns, ts = zip(*pts)
        print(f"{name:<8} log-log slope of eval time: {slope(ns, ts):.2f}")
    if {"cython", "python"} <= set(by):
        for (n, tc), (_, tp) in zip(by["cython"], by["python"]):
            print(f"n={n:<4} speed-up cython/python: {tp / tc:6.1f}x")


if __name__ == "__main__":
    main()
