"""Standing-wave profiles and their integral observables.

The profile R solves R'' = G'(R) + (m^2 - omega^2) R with R'(0) = 0 and
R -> 0 at infinity.  A closed form exists:

    R(x) = (c/a) / (1 + sqrt(1 - alpha^2) cosh(sqrt(c) x)),   c = m^2 - omega^2

and is used as the primary constructor; its correctness is pinned down by the
ODE residual recorded on every built profile (and by integration tests against
a Runge-Kutta solution).  Observables (charge, energy, d'') are computed by
composite Simpson quadrature on the half-line and doubled by evenness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import DomainError, ModelParams, alpha_of_omega, g_derivatives

# cosh argument cap: cosh(700) is near the top of double range, and once the
# argument is this large the profile value underflows to 0 anyway.
_COSH_ARG_MAX = 700.0


class GridError(ValueError):
    """A spatial grid cannot support the requested construction."""


@dataclass(frozen=True, eq=False)
class SolitonProfile:
    """Half-line samples of a standing-wave profile (even extension implied).

    ``values[i]`` is R(i*step) for i = 0 .. half_length/step; the maximum
    ODE residual measured on the build grid is carried as metadata.
    """

    omega: float
    params: ModelParams
    half_length: float
    step: float
    values: np.ndarray
    max_ode_residual: float

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.values.size) * self.step


def closed_form_profile(p: ModelParams, omega: float, x):
    """Evaluate the exact profile R(x); scalar or array x."""
    p.window.require(omega)
    c = p.m * p.m - omega * omega
    alpha = alpha_of_omega(p, omega)
    beta = math.sqrt(1.0 - alpha * alpha)
    arg = np.clip(math.sqrt(c) * np.asarray(x, dtype=float), -_COSH_ARG_MAX,
                  _COSH_ARG_MAX)
    r = (c / p.a) / (1.0 + beta * np.cosh(arg))
    return float(r) if r.ndim == 0 else r


def closed_form_slope(p: ModelParams, omega: float, x):
    """Exact spatial derivative R'(x) of the closed-form profile.

    Written as R' = -R * k * (beta sinh)/(1 + beta cosh) so the hyperbolic
    ratio stays bounded for large |x| instead of overflowing.
    """
    p.window.require(omega)
    c = p.m * p.m - omega * omega
    alpha = alpha_of_omega(p, omega)
    beta = math.sqrt(1.0 - alpha * alpha)
    k = math.sqrt(c)
    arg = np.clip(k * np.asarray(x, dtype=float), -_COSH_ARG_MAX, _COSH_ARG_MAX)
    denom = 1.0 + beta * np.cosh(arg)
    slope = -(c / p.a) / denom * k * beta * np.sinh(arg) / denom
    return float(slope) if slope.ndim == 0 else slope


def build_profile(p: ModelParams, omega: float, step: float,
                  half_length: float | None = None,
                  tail_tol: float = 1e-12) -> SolitonProfile:
    """Sample the closed form on a uniform half-line grid.

    The number of grid intervals is forced even so Simpson quadrature applies
    directly to the stored values.  When ``half_length`` is omitted it follows
    the decay-rate rule L = 40/sqrt(c) (stretched if ``tail_tol`` demands
    more).  Raises GridError if the tail at L is not below ``tail_tol``
    relative to R(0), or if the measured ODE residual is out of bounds.
    """
    p.window.require(omega)
    if not step > 0.0:
        raise GridError(f"step must be positive, got {step!r}")
    if not 0.0 < tail_tol < 1.0:
        raise GridError(f"tail_tol must lie in (0, 1), got {tail_tol!r}")
    c = p.m * p.m - omega * omega
    if half_length is None:
        half_length = max(40.0, -math.log(tail_tol) + 5.0) / math.sqrt(c)
    elif not half_length > 0.0:
        raise GridError(f"half_length must be positive, got {half_length!r}")

    n_int = int(math.ceil(half_length / step - 1e-9))
    n_int += n_int % 2  # Simpson wants an even interval count
    if n_int < 4:
        raise GridError("grid too coarse: fewer than 4 intervals to x = L")
    half_length = n_int * step

    grid = np.arange(n_int + 1) * step
    values = closed_form_profile(p, omega, grid)

    if not values[-1] < tail_tol * values[0]:
        raise GridError(
            f"half_length={half_length!r} too small: tail {values[-1]!r} "
            f"exceeds {tail_tol!r} relative to R(0)={values[0]!r}"
        )

    # Centered second-order residual of R'' = G'(R) + cR.  Evenness gives the
    # mirrored stencil at x = 0; the last point has no right neighbour and is
    # deep in the tail anyway.
    h2 = step * step
    second = np.empty(values.size - 1)
    second[0] = 2.0 * (values[1] - values[0]) / h2
    second[1:] = (values[2:] - 2.0 * values[1:-1] + values[:-2]) / h2
    _, g1, _ = g_derivatives(p, values[:-1])
    residual = float(np.abs(second - g1 - c * values[:-1]).max())
    sup = float(values[0])
    if residual >= max(1e-8, 10.0 * h2 * sup):
        raise GridError(
            f"ODE residual {residual!r} out of bounds for h={step!r}; "
            "profile construction is inconsistent"
        )

    values.setflags(write=False)
    return SolitonProfile(omega=float(omega), params=p,
                          half_length=float(half_length), step=float(step),
                          values=values, max_ode_residual=residual)


def composite_simpson(values: np.ndarray, step: float) -> float:
    """Composite Simpson rule; needs an odd number of points."""
    n = values.shape[-1]
    if n < 3 or n % 2 == 0:
        raise GridError(f"Simpson rule needs an odd point count, got {n}")
    acc = values[0] + values[-1] + 4.0 * values[1:-1:2].sum() \
        + 2.0 * values[2:-1:2].sum()
    return float(acc) * step / 3.0


def _derivative(y: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order first derivative on a uniform grid (one-sided at edges)."""
    n = y.size
    if n < 5:
        raise GridError("derivative stencil needs at least 5 points")
    d = np.empty_like(y)
    d[2:-2] = (y[:-4] - 8.0 * y[1:-3] + 8.0 * y[3:-1] - y[4:]) / (12.0 * h)
    d[0] = (-25.0 * y[0] + 48.0 * y[1] - 36.0 * y[2] + 16.0 * y[3]
            - 3.0 * y[4]) / (12.0 * h)
    d[1] = (-3.0 * y[0] - 10.0 * y[1] + 18.0 * y[2] - 6.0 * y[3]
            + y[4]) / (12.0 * h)
    d[-2] = -(-3.0 * y[-1] - 10.0 * y[-2] + 18.0 * y[-3] - 6.0 * y[-4]
              + y[-5]) / (12.0 * h)
    d[-1] = -(-25.0 * y[-1] + 48.0 * y[-2] - 36.0 * y[-3] + 16.0 * y[-4]
              - 3.0 * y[-5]) / (12.0 * h)
    return d


def charge(profile: SolitonProfile) -> float:
    """Conserved charge of the standing wave: omega * ||R||_2^2."""
    norm2 = 2.0 * composite_simpson(profile.values**2, profile.step)
    return profile.omega * norm2


def energy(profile: SolitonProfile) -> float:
    """Standing-wave energy.

    E = 1/2 omega^2 ||R||^2 + 1/2 ||R'||^2 + 1/2 m^2 ||R||^2 + int G(R),
    with R' from finite differences and all integrals by Simpson quadrature
    doubled over the even extension.
    """
    p = profile.params
    r = profile.values
    h = profile.step
    norm2 = 2.0 * composite_simpson(r**2, h)
    slope = _derivative(r, h)
    grad2 = 2.0 * composite_simpson(slope**2, h)
    g, _, _ = g_derivatives(p, r)
    g_int = 2.0 * composite_simpson(g, h)
    w = profile.omega
    return 0.5 * w * w * norm2 + 0.5 * grad2 + 0.5 * p.m * p.m * norm2 + g_int


def d_second_numeric(p: ModelParams, omega: float,
                     h_omega: float | None = None,
                     step: float = 0.005) -> float:
    """Finite-difference d''(omega) with d = E - omega Q from quadrature.

    Centered second difference over ``h_omega`` (default 1e-3 of the window
    width).  This is the independent check on the closed-form sign machinery,
    so it deliberately goes through profile quadrature and nothing else.
    """
    window = p.window
    window.require(omega)
    if h_omega is None:
        h_omega = 1e-3 * window.width
    if not 0.0 < h_omega:
        raise DomainError(f"h_omega must be positive, got {h_omega!r}")
    if omega - h_omega <= window.omega_star or omega + h_omega >= window.m:
        raise DomainError(
            f"stencil [omega-h, omega+h] leaves the window for "
            f"omega={omega!r}, h_omega={h_omega!r}"
        )

    def d_of(w: float) -> float:
        prof = build_profile(p, w, step)
        return energy(prof) - w * charge(prof)

    return (d_of(omega + h_omega) - 2.0 * d_of(omega)
            + d_of(omega - h_omega)) / (h_omega * h_omega)
