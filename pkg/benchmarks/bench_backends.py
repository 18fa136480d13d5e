"""Throughput comparison of the numba kernels against the numpy fallback.

Times each hot kernel on one synthetic workload per model and prints a
table with the speedup. Usage:

    python benchmarks/bench_backends.py [--n 200000] [--repeats 7]
"""

import argparse
import time

import numpy as np
from scipy.special import gammaln

from scorematch._kernels import numpy_impl

try:
    from scorematch._kernels import numba_impl
except ImportError:
    numba_impl = None


def best_of(fn, args, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def workloads(n, rng):
    d, p = 2, 2
    y = rng.uniform(0.05, 3.0, size=(n, d))
    x = np.column_stack([np.ones(n), rng.normal(size=n)])
    b = rng.normal(size=(d, p))
    a = rng.normal(size=(d, d))
    lam = a @ a.T + d * np.eye(d)
    xb = x @ b.T

    yc = rng.poisson(2.0, size=n).astype(np.float64)
    eta = rng.normal(0.2, 0.5, size=n)
    nu = 0.7
    kmax = 128
    lgam = gammaln(np.arange(kmax + 2.0))

    return [
        ("tg_rho_rows", (y, xb, lam)),
        ("tg_grad_rows", (y, x, xb, lam)),
        ("gsm_rho_rows", (yc, eta, nu)),
        ("gsm_grad_rows", (yc, x, eta, nu)),
        ("cmp_logz_trunc_rows", (eta, nu, kmax, lgam)),
        ("cmp_logz_asym_rows", (eta, nu)),
        ("cmp_logz_asym_floored_rows", (eta, nu, lgam, 30)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200_000,
                    help="rows per kernel call")
    ap.add_argument("--repeats", type=int, default=7,
                    help="timed calls per kernel; best is reported")
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    cases = workloads(args.n, rng)

    if numba_impl is None:
        print("numba not installed; nothing to compare against")
        return

    # first call pays the JIT compile, keep it out of the timings
    for name, a in cases:
        getattr(numba_impl, name)(*a)

    header = f"{'kernel':<28} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}"
    print(f"rows = {args.n}, best of {args.repeats}")
    print(header)
    print("-" * len(header))
    for name, a in cases:
        t_np = best_of(getattr(numpy_impl, name), a, args.repeats)
        t_nb = best_of(getattr(numba_impl, name), a, args.repeats)
        print(f"{name:<28} {t_np * 1e3:>10.2f} {t_nb * 1e3:>10.2f} "
              f"{t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
