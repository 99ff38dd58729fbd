"""Hot numerical kernels: numba-jitted with a pure-NumPy fallback.

The backend is fixed at import time.  Set ``KGSTAB_JIT=0`` (or ``false``,
``no``, ``off``) to force the pure-NumPy/Python implementations; anything else
uses numba when it is importable.  Both families stay importable regardless of
the selected backend so they can be cross-checked and benchmarked:

    leapfrog_steps / sturm_count / tridiag_solve      selected backend
    _leapfrog_steps_numpy / _sturm_count_py / ...     always pure
    _leapfrog_steps_numba / _sturm_count_jit / ...    None when jit is off
"""

from __future__ import annotations

import os

import numpy as np

# Safe floor for Sturm/Thomas pivots: e2/_PIVMIN(e2) stays finite in IEEE
# doubles for any off-diagonal magnitude.
_SAFE_MIN = 2.2250738585072014e-308

JIT_ENABLED = os.environ.get("KGSTAB_JIT", "1").strip().lower() not in (
    "0", "false", "no", "off",
)

if JIT_ENABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - exercised via KGSTAB_JIT builds
        JIT_ENABLED = False

USING_NUMBA = JIT_ENABLED


def _leapfrog_steps_numpy(phi, phi_prev, n_steps, step_x, step_t, m2, a, b, guard):
    """Advance the leapfrog scheme ``n_steps`` times in place (vectorized).

    phi/phi_prev are complex arrays over the full grid including the two
    Dirichlet endpoints, which are never touched.  Returns the number of steps
    actually taken; fewer than ``n_steps`` means the amplitude guard tripped.
    """
    inv_h2 = 1.0 / (step_x * step_x)
    dt2 = step_t * step_t
    for k in range(n_steps):
        inner = phi[1:-1]
        mag = np.abs(inner)
        rhs = (phi[2:] - 2.0 * inner + phi[:-2]) * inv_h2
        rhs += (-m2 + 3.0 * a * mag - 4.0 * b * mag * mag) * inner
        new_inner = 2.0 * inner - phi_prev[1:-1] + dt2 * rhs
        phi_prev[1:-1] = inner
        phi[1:-1] = new_inner
        sup = np.abs(new_inner).max()
        if not sup <= guard:  # catches NaN as well as overshoot
            return k + 1
    return n_steps


def _sturm_count_py(diag, off, shift):
    """Number of eigenvalues of the symmetric tridiagonal matrix below shift.

    Sturm sequence via the LDL^T pivot recurrence with a LAPACK-style pivot
    floor so near-singular shifts cannot divide by zero.
    """
    n = diag.shape[0]
    e2max = 0.0
    for i in range(n - 1):
        e2 = off[i] * off[i]
        if e2 > e2max:
            e2max = e2
    pivmin = _SAFE_MIN * max(1.0, e2max)
    count = 0
    q = diag[0] - shift
    for i in range(n):
        if i > 0:
            q = diag[i] - shift - off[i - 1] * off[i - 1] / q
        if abs(q) <= pivmin:
            q = -pivmin
        if q < 0.0:
            count += 1
    return count


def _tridiag_solve_py(diag, off, rhs):
    """Solve the symmetric tridiagonal system (Thomas algorithm).

    Pivots are floored in magnitude so shifted near-singular systems (the
    inverse-iteration workload) return a huge but finite solution instead of
    dividing by zero.  Returns a new array.
    """
    n = diag.shape[0]
    c = np.empty(n - 1)
    x = np.empty(n)
    e2max = 0.0
    for i in range(n - 1):
        e2 = off[i] * off[i]
        if e2 > e2max:
            e2max = e2
    pivmin = _SAFE_MIN * max(1.0, e2max)

    piv = diag[0]
    if abs(piv) <= pivmin:
        piv = -pivmin
    x[0] = rhs[0] / piv
    for i in range(1, n):
        c[i - 1] = off[i - 1] / piv
        piv = diag[i] - off[i - 1] * c[i - 1]
        if abs(piv) <= pivmin:
            piv = -pivmin
        x[i] = (rhs[i] - off[i - 1] * x[i - 1]) / piv
    for i in range(n - 2, -1, -1):
        x[i] -= c[i] * x[i + 1]
    return x


if JIT_ENABLED:

    @njit(cache=True)
    def _leapfrog_steps_numba(phi, phi_prev, n_steps, step_x, step_t, m2, a, b, guard):
        n = phi.shape[0]
        inv_h2 = 1.0 / (step_x * step_x)
        dt2 = step_t * step_t
        for k in range(n_steps):
            sup = 0.0
            left = phi[0]
            for i in range(1, n - 1):
                cur = phi[i]
                mag = abs(cur)
                rhs = (phi[i + 1] - 2.0 * cur + left) * inv_h2
                rhs += (-m2 + 3.0 * a * mag - 4.0 * b * mag * mag) * cur
                new = 2.0 * cur - phi_prev[i] + dt2 * rhs
                phi_prev[i] = cur
                phi[i] = new
                left = cur
                amp = abs(new)
                if amp > sup or amp != amp:
                    sup = amp
            if not sup <= guard:  # catches NaN as well as overshoot
                return k + 1
        return n_steps

    _sturm_count_jit = njit(cache=True)(_sturm_count_py)
    _tridiag_solve_jit = njit(cache=True)(_tridiag_solve_py)

    leapfrog_steps = _leapfrog_steps_numba
    sturm_count = _sturm_count_jit
    tridiag_solve = _tridiag_solve_jit
else:
    _leapfrog_steps_numba = None
    _sturm_count_jit = None
    _tridiag_solve_jit = None

    leapfrog_steps = _leapfrog_steps_numpy
    sturm_count = _sturm_count_py
    tridiag_solve = _tridiag_solve_py
