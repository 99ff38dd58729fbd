"""Orbital-stability classification of standing waves.

The scalar d(omega) = E - omega Q decides stability through the sign of its
second derivative.  For this nonlinearity everything reduces to closed-form
functions of the shape parameter alpha:

    sigma(omega) = omega ||R||^2 = (a^2 / 4b^2) k1(tau, alpha)
    sign d''(omega) = sign(tau - k2(alpha))

with k1(tau, alpha) = sqrt(tau - alpha^2) (ln((1+alpha)/(1-alpha)) - 2 alpha)
and k2(alpha) = ((1-alpha^2)/(2 alpha)) ln((1+alpha)/(1-alpha)) + alpha^2.
The critical coupling tau_star = sup k2 separates the all-stable regime from
the mixed one.  Every closed-form sign here can be cross-checked against the
quadrature oracle soliton.d_second_numeric; ``classify`` does so on request
and refuses to emit a report the oracle contradicts.
"""

from __future__ import annotations

import math
from collections import namedtuple
from dataclasses import dataclass
from functools import lru_cache

from .model import (DomainError, FrequencyWindow, ModelParams,
                    alpha_of_omega, omega_of_alpha)
from .soliton import d_second_numeric

# Below this alpha the log/artanh differences are evaluated by series; the
# direct expressions lose digits to cancellation.
_SERIES_CUTOFF = 1e-2
# artanh-series evaluation of the log ratio itself for very small alpha.
_LOG_SERIES_CUTOFF = 1e-4

TauStarResult = namedtuple("TauStarResult", "tau_star alpha_d")


class OracleDisagreementError(RuntimeError):
    """Closed-form stability sign contradicts the quadrature oracle."""

    def __init__(self, omega: float, closed_sign: int, oracle_value: float):
        self.omega = omega
        self.closed_sign = closed_sign
        self.oracle_value = oracle_value
        super().__init__(
            f"closed-form d'' sign {closed_sign:+d} at omega={omega!r} "
            f"contradicts finite-difference d''={oracle_value!r}"
        )


def _require_open_unit(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha={alpha!r} outside (0, 1)")


def _log_ratio(alpha: float) -> float:
    """ln((1+alpha)/(1-alpha)) = 2 artanh(alpha), series-stabilized near 0."""
    if alpha < _LOG_SERIES_CUTOFF:
        a2 = alpha * alpha
        return 2.0 * alpha * (1.0 + a2 * (1.0 / 3.0 + a2 * (0.2 + a2 / 7.0)))
    return math.log((1.0 + alpha) / (1.0 - alpha))


def _log_ratio_minus_2alpha(alpha: float) -> float:
    """ln((1+alpha)/(1-alpha)) - 2 alpha without small-alpha cancellation."""
    if alpha < _SERIES_CUTOFF:
        a2 = alpha * alpha
        return 2.0 * alpha * a2 * (
            1.0 / 3.0 + a2 * (0.2 + a2 * (1.0 / 7.0 + a2 / 9.0))
        )
    return _log_ratio(alpha) - 2.0 * alpha


def k1(tau: float, alpha: float) -> float:
    """sqrt(tau - alpha^2) (ln((1+alpha)/(1-alpha)) - 2 alpha); sigma's core."""
    _require_open_unit(alpha)
    if alpha * alpha >= tau:
        raise DomainError(f"alpha={alpha!r} inadmissible: alpha^2 >= tau={tau!r}")
    return math.sqrt(tau - alpha * alpha) * _log_ratio_minus_2alpha(alpha)


def sigma_closed(p: ModelParams, omega: float) -> float:
    """Closed-form sigma(omega) = omega ||R_omega||_2^2.

    Integrating R^2 via the substitution used for the first integral gives
    sigma = (a^2 / 4 b^2) k1(tau, alpha(omega)); soliton.charge is the
    quadrature route to the same number.
    """
    alpha = alpha_of_omega(p, omega)
    return (p.a * p.a / (4.0 * p.b * p.b)) * k1(p.tau, alpha)


def k2(alpha: float) -> float:
    """((1-alpha^2)/(2 alpha)) ln((1+alpha)/(1-alpha)) + alpha^2.

    tau - k2(alpha(omega)) carries the sign of d''(omega).  Tends to 1 at
    both endpoints, rises above it in between.
    """
    _require_open_unit(alpha)
    if alpha < _SERIES_CUTOFF:
        a2 = alpha * alpha
        return 1.0 + a2 * (1.0 / 3.0 - a2 * (2.0 / 15.0 + a2 * 2.0 / 35.0))
    return ((1.0 - alpha * alpha) / (2.0 * alpha)) * _log_ratio(alpha) \
        + alpha * alpha


def k2_prime(alpha: float) -> float:
    """Derivative of k2; single sign change on (0, 1) locates the argmax."""
    _require_open_unit(alpha)
    if alpha < _SERIES_CUTOFF:
        a2 = alpha * alpha
        return alpha * (2.0 / 3.0 - a2 * (8.0 / 15.0 + a2 * 12.0 / 35.0))
    inv = 1.0 / alpha
    return -0.5 * (1.0 + inv * inv) * _log_ratio(alpha) + inv + 2.0 * alpha


@lru_cache(maxsize=None)
def tau_star(tol_alpha: float = 1e-12) -> TauStarResult:
    """Critical coupling tau_star = sup k2 and its argmax alpha_d.

    k2_prime changes sign exactly once on (0, 1): bracket the change on a
    coarse grid, then bisect to ``tol_alpha``.
    """
    if not 0.0 < tol_alpha < 0.1:
        raise DomainError(f"tol_alpha={tol_alpha!r} out of range")
    grid = [0.05 * i for i in range(1, 20)]
    lo = hi = None
    prev_a, prev_s = grid[0], k2_prime(grid[0])
    for a in grid[1:]:
        s = k2_prime(a)
        if prev_s > 0.0 and s <= 0.0:
            lo, hi = prev_a, a
            break
        prev_a, prev_s = a, s
    if lo is None:
        raise RuntimeError("no sign change of k2_prime found on (0, 1)")
    while hi - lo > tol_alpha:
        mid = 0.5 * (lo + hi)
        if k2_prime(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    alpha_d = 0.5 * (lo + hi)
    return TauStarResult(tau_star=k2(alpha_d), alpha_d=alpha_d)


def d_second_sign(p: ModelParams, omega: float, tol: float = 1e-10) -> int:
    """Sign of d''(omega) from the closed form: sign(tau - k2(alpha)).

    Returns +1 (stable side), -1 (unstable side), or 0 when |tau - k2| < tol.
    """
    alpha = alpha_of_omega(p, omega)
    diff = p.tau - k2(alpha)
    if abs(diff) < tol:
        return 0
    return 1 if diff > 0.0 else -1


@dataclass(frozen=True)
class StabilityReport:
    """Partition of the frequency window into stable/unstable intervals."""

    params: ModelParams
    tau: float
    tau_star: float
    omega_window: FrequencyWindow
    roots_alpha: tuple          # k2(alpha) = tau solutions, descending
    roots_omega: tuple          # their frequencies, ascending
    intervals: tuple            # (lo, hi, "stable"|"unstable")

    def to_dict(self) -> dict:
        return {
            "params": {"a": self.params.a, "b": self.params.b,
                       "m": self.params.m},
            "tau": self.tau,
            "tau_star": self.tau_star,
            "omega_window": {"omega_star": self.omega_window.omega_star,
                             "m": self.omega_window.m},
            "roots_alpha": list(self.roots_alpha),
            "roots_omega": list(self.roots_omega),
            "intervals": [
                {"lo": lo, "hi": hi, "verdict": verdict}
                for (lo, hi, verdict) in self.intervals
            ],
        }


def _bisect_k2_root(tau: float, lo: float, hi: float, tol: float) -> float:
    """Root of k2(alpha) = tau on a monotone bracket with a sign change."""
    f_lo = k2(lo) - tau
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if (k2(mid) - tau) * f_lo > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# Tolerance below which tau is treated as exactly critical (touching root).
_TOUCH_TOL = 1e-10


def classify(p: ModelParams, alpha_tol: float = 1e-12,
             check_oracle: bool = False) -> StabilityReport:
    """Partition the frequency window by the sign of d''.

    Roots of k2(alpha) = tau are found by bisection on the two monotone
    branches of k2 (split at its argmax); each subinterval of the window is
    then labeled by d_second_sign at its midpoint — no case table.  With
    ``check_oracle`` the verdicts are re-derived from finite-difference d''
    at the midpoints (and a few extra window samples); any sign contradiction
    raises OracleDisagreementError instead of returning a report.
    """
    tau = p.tau
    crit = tau_star()
    window = p.window
    alpha_hi = min(1.0, math.sqrt(tau))  # admissible alpha range is open

    roots_alpha: list[float] = []
    if abs(tau - crit.tau_star) < _TOUCH_TOL:
        # Touching case: k2 reaches tau only at its argmax; d'' > 0 on both
        # sides, so the single root separates two stable intervals.
        roots_alpha.append(crit.alpha_d)
    else:
        eps = 1e-12
        if crit.alpha_d < alpha_hi:
            branches = [(eps, crit.alpha_d), (crit.alpha_d, alpha_hi - 1e-15)]
        else:
            branches = [(eps, alpha_hi - 1e-15)]
        for lo, hi in branches:
            if lo >= hi:
                continue
            if (k2(lo) - tau) * (k2(hi) - tau) < 0.0:
                roots_alpha.append(_bisect_k2_root(tau, lo, hi, alpha_tol))

    roots_alpha.sort(reverse=True)  # alpha decreasing <=> omega increasing
    roots_omega = [omega_of_alpha(p, a) for a in roots_alpha]

    bounds = [window.omega_star, *roots_omega, window.m]
    intervals = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        sign = d_second_sign(p, 0.5 * (lo + hi))
        intervals.append((lo, hi, "stable" if sign >= 0 else "unstable"))

    report = StabilityReport(
        params=p, tau=tau, tau_star=crit.tau_star, omega_window=window,
        roots_alpha=tuple(roots_alpha), roots_omega=tuple(roots_omega),
        intervals=tuple(intervals),
    )
    if check_oracle:
        _check_against_oracle(p, report)
    return report


def _check_against_oracle(p: ModelParams, report: StabilityReport) -> None:
    """Re-derive interval verdicts from finite-difference d''; raise on clash.

    Test points: every interval midpoint plus five equispaced window samples,
    skipping anything within 1e-2 window-widths of a root (where the sign
    genuinely passes through zero).
    """
    window = report.omega_window
    points = [0.5 * (lo + hi) for (lo, hi, _) in report.intervals]
    points += [window.omega_star + k * window.width / 6.0 for k in range(1, 6)]
    guard = 1e-2 * window.width
    for omega in sorted(set(points)):
        if any(abs(omega - root) < guard for root in report.roots_omega):
            continue
        closed = d_second_sign(p, omega)
        if closed == 0:
            continue
        oracle = d_second_numeric(p, omega)
        if closed * oracle < 0.0:
            raise OracleDisagreementError(omega, closed, oracle)
