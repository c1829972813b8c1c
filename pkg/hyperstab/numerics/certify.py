"""Decay and ISS certificates for computed trajectories.

The bound audited is

  V(t) <= exp(-phi(t)) V(0) + C ||d||_inf^2 / psi(t)^2,   phi(t) = eta int_0^t psi,

with eta = 2 K beta - 1. C comes from the exponential-kernel lemma when
eta < 2 and from a numerical supremum otherwise.
"""

import math
from functools import lru_cache

import numpy as np

from hyperstab.config.constants import (
    BOUND_TOL, FIT_WINDOW_START, MIN_FIT_SAMPLES, NORM_FLOOR, SUPREMUM_POINTS_PER_DECADE,
    SUPREMUM_SAFETY, SUPREMUM_STABLE_REL, SUPREMUM_TAU_MAX,
)
from hyperstab.errors import (
    CertificationError, ConvergenceError, InsufficientSamplesError, PreconditionError,
)
from hyperstab.models.certificate import Certificate, CertificateKind, RateFit, Verdict
from hyperstab.models.problem import EvolutionProblem
from hyperstab.models.schedule import PsiKind, TimeMap
from hyperstab.models.trajectory import Trajectory
from hyperstab.numerics.quadrature import adaptive_simpson
from hyperstab.numerics.solver import gain_condition
from hyperstab.numerics.timescale import lemma1_constant, phi_grid, psi_eval, psi_values
from hyperstab.utils.logger import get_logger

logger = get_logger(__name__)

_MODULE = "certify"


def decay_bound(time_map: TimeMap, v0: float, t: float, d_sup: float, c: float) -> float:
    """exp(-phi(t)) V0 + C d_sup^2 / psi(t)^2."""
    if time_map.eta <= 0:
        raise PreconditionError("eta must be > 0", module=_MODULE, operation="decay_bound")
    return float(_bound_values(time_map, v0, np.array([t]), d_sup, c)[0])


def _bound_values(time_map: TimeMap, v0: float, times: np.ndarray, d_sup: float, c: float) -> np.ndarray:
    decay = np.exp(-phi_grid(time_map, times)) * v0
    if d_sup == 0.0 or c == 0.0:
        return decay
    return decay + c * d_sup**2 / psi_values(time_map.schedule, times) ** 2


def theorem2_constant(eta: float) -> float:
    """(4/eta) r_{2/eta,1}; for eta >= 2 the lemma does not apply and the
    supremum-based constant C(eta)/eta is returned instead."""
    if eta <= 0:
        raise PreconditionError("eta must be > 0", module=_MODULE, operation="theorem2_constant")
    if eta >= 2.0:
        logger.warning("theorem2_constant_fallback", eta=eta, reason="a*alpha = 2/eta <= 1")
        return theorem3_constant(eta) / eta
    return 4.0 / eta * lemma1_constant(2.0 / eta, 1.0)


def _supremum_profile(eta: float, tau: float) -> float:
    """(2 tau/eta + 1) int_0^tau e^{-(tau - s)} / (2 s/eta + 1) ds."""
    q = adaptive_simpson(
        lambda s: np.exp(s - tau) / (2.0 * s / eta + 1.0), 0.0, tau,
        panels=max(1, math.ceil(tau)),
    )
    return (2.0 * tau / eta + 1.0) * q.value


@lru_cache(maxsize=128)
def theorem3_constant(eta: float, tau_max: float = SUPREMUM_TAU_MAX) -> float:
    """Numerical upper estimate of C(eta) = sup_tau (2 tau/eta + 1) int_0^tau e^{-(tau-s)}/(2s/eta + 1) ds.

    Supremum over a log-spaced grid up to tau_max, times a safety factor. The
    running maximum must have settled over the last two decades of the grid.
    """
    if eta <= 0:
        raise PreconditionError("eta must be > 0", module=_MODULE, operation="theorem3_constant")
    decades = math.log10(tau_max) + 3.0
    grid = np.logspace(-3.0, math.log10(tau_max), max(2, int(decades * SUPREMUM_POINTS_PER_DECADE)))
    values = np.array([_supremum_profile(eta, float(tau)) for tau in grid])
    running = np.maximum.accumulate(values)

    settled_index = int(np.searchsorted(grid, tau_max / 100.0))
    reference = running[max(settled_index - 1, 0)]
    growth = (running[-1] - reference) / max(reference, np.finfo(float).tiny)
    if growth >= SUPREMUM_STABLE_REL:
        raise ConvergenceError(
            f"running supremum still growing at tau_max={tau_max} (+{growth:.2%} over two decades)",
            module=_MODULE, operation="theorem3_constant",
        )
    return SUPREMUM_SAFETY * float(running[-1])


def iss_constant(eta: float) -> tuple[float, str]:
    """Bound constant and its source for the audit."""
    if eta < 2.0:
        return theorem2_constant(eta), "lemma:(4/eta)*r(2/eta,1)"
    return theorem3_constant(eta) / eta, "supremum:C(eta)/eta"


def audit_trajectory(traj: Trajectory, problem: EvolutionProblem, tol_bound: float = BOUND_TOL) -> Certificate:
    """Evaluate bound(t_k) - V(t_k) at every sample."""
    condition = gain_condition(problem)
    if not condition.satisfied or not traj.certified:
        raise CertificationError(
            f"refusing to certify: K*beta = {problem.gain * condition.beta:.6g} <= 1/2",
            module=_MODULE, operation="audit_trajectory",
        )
    schedule = problem.schedule
    if schedule.is_baseline:
        raise CertificationError("constant-gain baseline runs carry no hyperexponential certificate",
                                 module=_MODULE, operation="audit_trajectory")
    if schedule.n > 1 and psi_eval(schedule, 0.0) < 1.0:
        raise CertificationError("psi^n does not dominate psi when psi(0) < 1",
                                 module=_MODULE, operation="audit_trajectory")

    eta = condition.eta
    d_sup = problem.disturbance_sup_norm()
    if d_sup > 0 and schedule.kind != PsiKind.AFFINE:
        raise CertificationError("ISS certificates are available for the affine schedule only",
                                 module=_MODULE, operation="audit_trajectory")

    kind = CertificateKind.ISS if d_sup > 0 else CertificateKind.DECAY_ONLY
    if schedule.kind == PsiKind.AFFINE:
        constant, source = iss_constant(eta)
    else:
        constant, source = 0.0, "none"

    # The n = 1 envelope: psi^n >= psi on the horizon
    time_map = TimeMap(eta=eta, schedule=schedule.with_exponent(1))
    bounds = _bound_values(time_map, float(traj.lyapunov[0]), traj.times, d_sup, constant)
    residuals = bounds - traj.lyapunov

    passed = bool(np.all(residuals >= -tol_bound * bounds))
    with np.errstate(divide="ignore", invalid="ignore"):
        relative = np.where(bounds > 0, residuals / bounds, np.where(residuals >= 0, 0.0, -np.inf))
    worst = float(np.min(relative))

    logger.info("trajectory_audited", kind=kind.value, eta=eta, constant=constant,
                verdict="pass" if passed else "fail", worst_margin=worst)
    return Certificate(
        kind=kind,
        eta=eta,
        d_sup_norm=d_sup,
        constant_c=constant,
        constant_source=source,
        tol_bound=tol_bound,
        times=traj.times.tolist(),
        bounds=bounds.tolist(),
        residuals=residuals.tolist(),
        verdict=Verdict.PASS if passed else Verdict.FAIL,
        worst_margin=worst,
    )


def fit_rate(traj: Trajectory, window: tuple[float, float] | None = None) -> RateFit:
    """Least squares log||X(t)||_w ~ -(a t^2 + b t) + c over the window."""
    horizon = float(traj.times[-1])
    if window is None:
        window = (FIT_WINDOW_START * horizon, horizon)
    t_start, t_end = window
    norms = traj.norms
    mask = (traj.times >= t_start) & (traj.times <= t_end) & (norms > NORM_FLOOR)
    count = int(np.count_nonzero(mask))
    if count < MIN_FIT_SAMPLES:
        raise InsufficientSamplesError(
            f"{count} samples above the {NORM_FLOOR:g} floor in [{t_start:g}, {t_end:g}], "
            f"need {MIN_FIT_SAMPLES}",
            module=_MODULE, operation="fit_rate",
        )
    t = traj.times[mask]
    y = np.log(norms[mask])
    design = np.column_stack([-t**2, -t, np.ones_like(t)])
    coeffs, *_ = np.linalg.lstsq(design, y, rcond=None)
    residual = y - design @ coeffs
    return RateFit(
        quad_coeff=float(coeffs[0]),
        lin_coeff=float(coeffs[1]),
        offset=float(coeffs[2]),
        window=(float(t_start), float(t_end)),
        residual_rms=float(np.sqrt(np.mean(residual**2))),
        samples=count,
    )
