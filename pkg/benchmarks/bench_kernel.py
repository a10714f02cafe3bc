"""Compare the compiled and pure-Python scenario kernels.

    python benchmarks/bench_kernel.py [--dim 8] [--evals 200] [--iters 300]

Reports time per objective evaluation and per Nelder-Mead run for each
available backend, and checks that both return identical results.
"""

import argparse
import time

import numpy as np

from qsimpson import kernel
from qsimpson.optimizer import default_ranks


def per_call(fn, repeat):
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t0) / repeat


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dim", type=int, default=8)
    ap.add_argument("--evals", type=int, default=200)
    ap.add_argument("--iters", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    n = args.dim
    ranks = default_ranks(n)
    x = np.random.default_rng(args.seed).uniform(0, 2 * np.pi, kernel.n_params(n, ranks))
    print(f"dim {n}, ranks {ranks}, {len(x)} parameters")

    results = {}
    timings = {}
    for name, k in sorted(kernel.BACKENDS.items()):
        t_obj = per_call(lambda: k.objective(x, n, ranks), args.evals)
        t0 = time.perf_counter()
        out = k.search(x, n, ranks, args.iters)
        t_nm = time.perf_counter() - t0
        results[name] = out
        timings[name] = (t_obj, t_nm)
        print(f"{name:>9}: objective {t_obj * 1e6:9.1f} us   search({args.iters} iters) {t_nm:8.3f} s   "
              f"|S| {abs(out[1]):.12f}  evals {out[2]}")

    if len(results) == 2:
        py, c = results["python"], results["compiled"]
        same = np.array_equal(py[0], c[0]) and py[1:] == c[1:]
        print(f"speedup: objective {timings['python'][0] / timings['compiled'][0]:.1f}x, "
              f"search {timings['python'][1] / timings['compiled'][1]:.1f}x")
        print("identical results:", same)
    else:
        print("compiled backend not built; only the Python kernel was timed")


if __name__ == "__main__":
    main()
