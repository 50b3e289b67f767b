"""Benchmark the compiled modal-sweep kernel against the NumPy fallback.

Runs the same per-frequency implicit sweep through both backends on a
production-sized grid, reports per-solve wall time and the speedup, and
checks that the two surfaces agree to near machine precision.

Usage: python bench/benchmark_backends.py [--n-lambda 600] [--n-t 150]
       [--repeats 5]
"""

import argparse
import time

import numpy as np

from accumark import _kernel_py
from accumark.marks import GammaMixture, ModelParams, esscher_tilt
from accumark.pide import SolverGrid, build_implicit_matrix, gather_tables
from accumark.quadrature import rules_for_mixture

try:
    from accumark import _kernel
except ImportError:
    _kernel = None


def sweep_args(grid, model, tilted, rules, eta, mode, boundary):
    tri = build_implicit_matrix(grid, model)
    offsets, fracs, coeffs = gather_tables(tilted, rules, eta, model.beta,
                                           grid.h)
    lam = grid.lambda_values
    return (grid.N_t, lam, grid.h, grid.dt, tri.sub, tri.diag, tri.sup,
            offsets, fracs, coeffs, mode, boundary)


def time_backend(impl, args, repeats):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = impl.modal_sweep(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-lambda", type=int, default=600)
    ap.add_argument("--n-t", type=int, default=150)
    ap.add_argument("--repeats", type=int, default=5)
    opts = ap.parse_args()

    model = ModelParams(kappa=8.0, lambda_bar=2.0, beta=1.0, r=0.02,
                        T=opts.n_t / 365.0, lambda0=2.5, u0=0.0)
    mix = GammaMixture((0.6, 0.4), (2.0, 6.0), (4.0, 2.5))
    tilted = esscher_tilt(mix, 0.0)
    rules = rules_for_mixture(tilted, 24)
    grid = SolverGrid(0.0, 450.0, opts.n_lambda, 1.0 / 365.0, opts.n_t)

    print(f"grid: N_lambda={opts.n_lambda} N_t={opts.n_t} Q=24, "
          f"best of {opts.repeats}")
    header = f"{'eta':>12} {'mode':>6} {'numpy ms':>10} {'cython ms':>10} " \
             f"{'speedup':>8} {'rel diff':>10}"
    print(header)
    print("-" * len(header))
    for eta in (0.3 + 0.0j, 0.3 + 2.0j, 0.3 + 35.0j):
        for mode, name in ((0, "lin"), (1, "pchip")):
            args = sweep_args(grid, model, tilted, rules, eta, mode, 0)
            t_py, out_py = time_backend(_kernel_py, args, opts.repeats)
            if _kernel is None:
                print(f"{eta!s:>12} {name:>6} {t_py * 1e3:>10.2f} "
                      f"{'n/a':>10} {'n/a':>8} {'n/a':>10}")
                continue
            t_cy, out_cy = time_backend(_kernel, args, opts.repeats)
            # real eta is an undamped growth mode whose top rows are
            # astronomically scaled; compare on the surface's own scale
            diff = float(np.max(np.abs(out_cy - out_py))
                         / np.max(np.abs(out_py)))
            print(f"{eta!s:>12} {name:>6} {t_py * 1e3:>10.2f} "
                  f"{t_cy * 1e3:>10.2f} {t_py / t_cy:>8.1f} {diff:>10.2e}")
    if _kernel is None:
        print("\ncompiled kernel not available; only the fallback timed")


if __name__ == "__main__":
    main()
