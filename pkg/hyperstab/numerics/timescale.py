"""Gain schedules psi, the time map phi and the exponential-kernel lemma.

All functions are pure; schedules and maps are immutable pydantic models.
"""

import math
from functools import lru_cache

import numpy as np

from hyperstab.config.constants import (
    LEMMA_CONSTANT_REL_TOL, LEMMA_SLACK, PHI_INVERSE_MAX_ITER, PHI_INVERSE_TOL,
    PHI_REL_TOL, QUAD_REL_TOL,
)
from hyperstab.errors import DomainError, PreconditionError
from hyperstab.models.certificate import LemmaPoint, LemmaReport
from hyperstab.models.schedule import PsiKind, PsiSchedule, TimeMap
from hyperstab.numerics.quadrature import adaptive_simpson
from hyperstab.utils.logger import get_logger

logger = get_logger(__name__)

_MODULE = "timescale"


def _check_time(t: float, operation: str, name: str = "t") -> None:
    if not math.isfinite(t) or t < 0:
        raise DomainError(f"{name} must be finite and >= 0, got {t}", module=_MODULE, operation=operation)


def psi_values(schedule: PsiSchedule, t: np.ndarray) -> np.ndarray:
    """Vectorized psi(t) (exponent not applied)."""
    t = np.asarray(t, dtype=float)
    if schedule.kind == PsiKind.AFFINE:
        return 1.0 + t
    if schedule.kind == PsiKind.EXPONENTIAL:
        return schedule.a * np.exp(schedule.alpha * t)
    if schedule.kind == PsiKind.POWER_TOWER:
        # 0**0 == 1, so psi(0) = b by continuity of t**t
        return schedule.b * np.power(t, t)
    return np.full_like(t, schedule.a)


def psi_eval(schedule: PsiSchedule, t: float) -> float:
    """psi(t)."""
    _check_time(t, "psi_eval")
    return float(psi_values(schedule, np.float64(t)))


def gain_profile(schedule: PsiSchedule, t: float) -> float:
    """psi(t)^n."""
    return psi_eval(schedule, t) ** schedule.n


def _primitive_closed_form(schedule: PsiSchedule, t: np.ndarray) -> np.ndarray:
    """integral_0^t psi(s) ds for the kinds that have one."""
    if schedule.kind == PsiKind.AFFINE:
        return t * (t + 2.0) / 2.0
    if schedule.kind == PsiKind.EXPONENTIAL:
        return schedule.a * np.expm1(schedule.alpha * t) / schedule.alpha
    return schedule.a * t


def _primitive_increment(schedule: PsiSchedule, t0: float, t1: float) -> float:
    """integral_t0^t1 psi(s) ds by adaptive quadrature."""
    q = adaptive_simpson(
        lambda s: psi_values(schedule, s), t0, t1,
        rel_tol=PHI_REL_TOL, panels=max(1, math.ceil(t1 - t0)),
    )
    return q.value


def phi(time_map: TimeMap, t: float) -> float:
    """tau = phi(t) = eta * integral_0^t psi(s) ds."""
    _check_time(t, "phi")
    schedule = time_map.schedule
    if schedule.has_closed_form:
        return float(time_map.eta * _primitive_closed_form(schedule, np.float64(t)))
    return time_map.eta * _primitive_increment(schedule, 0.0, t)


def phi_grid(time_map: TimeMap, times: np.ndarray) -> np.ndarray:
    """phi on an increasing grid (cumulative quadrature for PowerTower)."""
    times = np.asarray(times, dtype=float)
    schedule = time_map.schedule
    if schedule.has_closed_form:
        return time_map.eta * _primitive_closed_form(schedule, times)
    values = np.empty_like(times)
    acc, prev = 0.0, 0.0
    for k, t in enumerate(times):
        acc += _primitive_increment(schedule, prev, float(t))
        values[k] = time_map.eta * acc
        prev = float(t)
    return values


def phi_inverse(time_map: TimeMap, tau: float) -> float:
    """t = phi^{-1}(tau)."""
    _check_time(tau, "phi_inverse", "tau")
    if tau == 0.0:
        return 0.0
    eta = time_map.eta
    schedule = time_map.schedule
    if schedule.kind == PsiKind.AFFINE:
        return math.sqrt(2.0 * tau / eta + 1.0) - 1.0
    if schedule.kind == PsiKind.EXPONENTIAL:
        return math.log1p(schedule.alpha * tau / (eta * schedule.a)) / schedule.alpha
    if schedule.kind == PsiKind.CONSTANT:
        return tau / (eta * schedule.a)
    return _bisect_phi(time_map, tau)


def _bisect_phi(time_map: TimeMap, tau: float) -> float:
    """Monotone bisection with incremental quadrature of phi."""
    eta = time_map.eta
    schedule = time_map.schedule
    tol = PHI_INVERSE_TOL * max(1.0, tau)

    lo, phi_lo = 0.0, 0.0
    hi = 1.0
    phi_hi = eta * _primitive_increment(schedule, lo, hi)
    while phi_hi < tau:
        lo, phi_lo = hi, phi_hi
        hi = 2.0 * hi
        phi_hi = phi_lo + eta * _primitive_increment(schedule, lo, hi)

    mid = 0.5 * (lo + hi)
    for _ in range(PHI_INVERSE_MAX_ITER):
        mid = 0.5 * (lo + hi)
        phi_mid = phi_lo + eta * _primitive_increment(schedule, lo, mid)
        if abs(phi_mid - tau) <= tol or hi - lo <= 4.0 * np.finfo(float).eps * hi:
            return mid
        if phi_mid < tau:
            lo, phi_lo = mid, phi_mid
        else:
            hi = mid
    logger.warning("phi_inverse_iteration_budget", tau=tau, bracket=(lo, hi))
    return mid


@lru_cache(maxsize=256)
def lemma1_constant(a: float, alpha: float) -> float:
    """r_{a,alpha} of the exponential-kernel integral inequality (requires alpha*a > 1)."""
    if a <= 0 or alpha <= 0:
        raise PreconditionError(
            f"a and alpha must be positive, got a={a}, alpha={alpha}",
            module=_MODULE, operation="lemma1_constant",
        )
    a_alpha = a * alpha
    if a_alpha <= 1.0:
        raise PreconditionError(
            f"requires alpha*a > 1, got alpha*a={a_alpha}",
            module=_MODULE, operation="lemma1_constant",
        )
    upper = (a_alpha - 1.0) / a
    q = adaptive_simpson(
        lambda s: np.exp(s - upper) * (a * s + 1.0) ** (-alpha), 0.0, upper,
        rel_tol=LEMMA_CONSTANT_REL_TOL, panels=max(1, math.ceil(upper)),
    )
    first = a_alpha ** alpha * q.value
    second = a_alpha + 1.0
    third = ((a_alpha + 1.0) / a_alpha) ** alpha * (-math.expm1(-1.0 / a))
    return first + second + third


def lemma_left_side(a: float, alpha: float, tau: float) -> float:
    """integral_0^tau e^{s - tau} (a s + 1)^{-alpha} ds."""
    if tau == 0.0:
        return 0.0
    q = adaptive_simpson(
        lambda s: np.exp(s - tau) * (a * s + 1.0) ** (-alpha), 0.0, tau,
        rel_tol=QUAD_REL_TOL, panels=max(1, math.ceil(tau)),
    )
    return q.value


def lemma1_check(a: float, alpha: float, tau_grid: list[float]) -> LemmaReport:
    """Check integral_0^tau e^{s-tau}(as+1)^{-alpha} ds <= r (a tau + 1)^{-alpha} on a grid."""
    r = lemma1_constant(a, alpha)
    for tau in tau_grid:
        _check_time(float(tau), "lemma1_check", "tau")

    points: list[LemmaPoint] = []
    for tau in tau_grid:
        tau = float(tau)
        left = lemma_left_side(a, alpha, tau)
        right = r * (a * tau + 1.0) ** (-alpha)
        passed = left <= right * (1.0 + LEMMA_SLACK)
        if not passed:
            logger.warning("lemma_violation", a=a, alpha=alpha, tau=tau, margin=right - left)
        points.append(LemmaPoint(tau=tau, left=left, right=right, margin=right - left, passed=passed))

    logger.info("lemma_checked", a=a, alpha=alpha, r=r, points=len(points),
                violations=sum(not p.passed for p in points))
    return LemmaReport(a=a, alpha=alpha, r=r, points=points)


def log_tau_grid(tau_min: float, tau_max: float, points: int) -> list[float]:
    """Log-spaced grid (tau_min > 0), or [0] + log grid when tau_min == 0."""
    if tau_min <= 0:
        return [0.0] + np.logspace(-2, math.log10(tau_max), points - 1).tolist()
    return np.logspace(math.log10(tau_min), math.log10(tau_max), points).tolist()
