"""Micro-benchmarks: jitted kernels against the pure-NumPy fallbacks.

Run as ``python -m kgstab.benchmarks``.  Each kernel is timed on a
representative workload (field stepping on a soliton-sized grid, Sturm
counts and tridiagonal solves at eigensolver sizes) and the two backends
are checked for agreement before the timings are reported.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from . import _kernels
from .model import ModelParams
from .soliton import closed_form_profile


def _best_of(fn, repeats: int = 3) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def _leapfrog_workload(n_points: int, n_steps: int):
    p = ModelParams(1.0, 1.0, 1.0)
    omega = 0.9
    x = np.linspace(-80.0, 80.0, n_points)
    phi = closed_form_profile(p, omega, np.abs(x)).astype(complex)
    phi_prev = phi * np.exp(1j * omega * 0.01)
    args = (0.02, 0.01, p.m * p.m, p.a, p.b, 1e6)

    def call(fn):
        a, b = phi.copy(), phi_prev.copy()
        fn(a, b, n_steps, *args)
        return a

    return call


def _matrix_workload(n: int):
    rng = np.random.default_rng(7)
    diag = 2.0 + rng.random(n)
    off = -1.0 + 0.1 * rng.random(n - 1)
    rhs = rng.standard_normal(n)
    shifts = np.linspace(0.0, 4.0, 200)
    return diag, off, rhs, shifts


def run_benchmarks(n_points: int = 8001, n_steps: int = 400,
                   matrix_n: int = 9001) -> list[tuple[str, float, float]]:
    """Returns rows (name, numpy_seconds, numba_seconds or nan)."""
    rows = []
    call = _leapfrog_workload(n_points, n_steps)
    baseline = call(_kernels._leapfrog_steps_numpy)
    t_np = _best_of(lambda: call(_kernels._leapfrog_steps_numpy))
    if _kernels.JIT_ENABLED:
        jitted = call(_kernels._leapfrog_steps_numba)  # warm the compiler
        gap = float(np.abs(jitted - baseline).max())
        if not gap < 1e-12:
            raise AssertionError(f"leapfrog backends disagree by {gap!r}")
        t_nb = _best_of(lambda: call(_kernels._leapfrog_steps_numba))
    else:
        t_nb = float("nan")
    rows.append((f"leapfrog {n_points}x{n_steps}", t_np, t_nb))

    diag, off, rhs, shifts = _matrix_workload(matrix_n)

    def count_all(fn):
        return [fn(diag, off, s) for s in shifts]

    base_counts = count_all(_kernels._sturm_count_py)
    t_np = _best_of(lambda: count_all(_kernels._sturm_count_py))
    if _kernels.JIT_ENABLED:
        if count_all(_kernels._sturm_count_jit) != base_counts:
            raise AssertionError("sturm-count backends disagree")
        t_nb = _best_of(lambda: count_all(_kernels._sturm_count_jit))
    else:
        t_nb = float("nan")
    rows.append((f"sturm-count {matrix_n}x{len(shifts)}", t_np, t_nb))

    def solve_all(fn):
        out = rhs
        for _ in range(200):
            out = fn(diag, off, out / np.linalg.norm(out))
        return out

    base_solve = solve_all(_kernels._tridiag_solve_py)
    t_np = _best_of(lambda: solve_all(_kernels._tridiag_solve_py))
    if _kernels.JIT_ENABLED:
        gap = float(np.abs(solve_all(_kernels._tridiag_solve_jit)
                           - base_solve).max())
        if not gap < 1e-9:
            raise AssertionError(f"tridiag backends disagree by {gap!r}")
        t_nb = _best_of(lambda: solve_all(_kernels._tridiag_solve_jit))
    else:
        t_nb = float("nan")
    rows.append((f"tridiag-solve {matrix_n}x200", t_np, t_nb))
    return rows


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="kernel benchmarks: numba backend vs pure NumPy")
    parser.add_argument("--points", type=int, default=8001)
    parser.add_argument("--steps", type=int, default=400)
    parser.add_argument("--matrix-n", type=int, default=9001)
    args = parser.parse_args(argv)

    backend = "numba" if _kernels.USING_NUMBA else "numpy (fallback)"
    print(f"selected backend: {backend}")
    rows = run_benchmarks(args.points, args.steps, args.matrix_n)
    print(f"{'workload':<28} {'numpy [s]':>10} {'numba [s]':>10} {'speedup':>8}")
    for name, t_np, t_nb in rows:
        if t_nb == t_nb:  # not NaN
            print(f"{name:<28} {t_np:>10.4f} {t_nb:>10.4f} {t_np / t_nb:>7.1f}x")
        else:
            print(f"{name:<28} {t_np:>10.4f} {'-':>10} {'-':>8}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
