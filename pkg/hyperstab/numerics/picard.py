"""Picard iteration on the Duhamel formula (mild-solution oracle).

  (F v)(t) = S(t - t0) X(t0) + int_{t0}^t S(t - s) (-K psi(s)^n B v(s) + d(s)) ds,
  S(t) = exp(-t A).

The horizon is cut into short intervals on which (length) * sup ||f|| stays
below the contraction target; on each interval F is iterated to its fixed
point on a uniform node grid. Between nodes the forcing is interpolated
linearly and integrated exactly against the semigroup (block matrix
exponential), so the only quadrature error is the interpolation error.
"""

import math

import numpy as np
import scipy.linalg

from hyperstab.config.constants import (
    PICARD_CONTRACTION_TARGET, PICARD_GRID_POINTS, PICARD_MAX_DIM, PICARD_MAX_ITER, PICARD_TOL,
)
from hyperstab.errors import ConvergenceError, DimensionError, PreconditionError
from hyperstab.models.problem import EvolutionProblem
from hyperstab.models.trajectory import PicardResult, PicardSubinterval
from hyperstab.numerics.operators import operator_norm
from hyperstab.numerics.timescale import gain_profile
from hyperstab.utils.logger import get_logger

logger = get_logger(__name__)

_MODULE = "solver"
_OPERATION = "picard_mild_solution"


def propagators(a: np.ndarray, step: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """exp(-step A) and the first/second moments of the semigroup over one step.

    Returns (Phi, G1, G2) with
      Phi = S(step),
      G1  = int_0^step S(step - s) ds,
      G2  = int_0^step S(step - s) (s / step) ds,
    read off the exponential of the block matrix [[-A, I, 0], [0, 0, I], [0, 0, 0]].
    """
    m = a.shape[0]
    block = np.zeros((3 * m, 3 * m))
    block[:m, :m] = -a
    block[:m, m:2 * m] = np.eye(m)
    block[m:2 * m, 2 * m:] = np.eye(m)
    expo = scipy.linalg.expm(block * step)
    return expo[:m, :m], expo[:m, m:2 * m], expo[:m, 2 * m:] / step


def _duhamel(state: np.ndarray, forcing: np.ndarray, phi: np.ndarray,
            g1: np.ndarray, g2: np.ndarray) -> np.ndarray:
    """Mild solution on the nodes with forcing linear between them."""
    out = np.empty_like(forcing)
    out[0] = state
    for j in range(forcing.shape[0] - 1):
        out[j + 1] = phi @ out[j] + g1 @ forcing[j] + g2 @ (forcing[j + 1] - forcing[j])
    return out


def _sup_gain(problem: EvolutionProblem, start: float, end: float) -> float:
    # psi^n is increasing or convex on every supported schedule: sup at an endpoint
    return problem.gain * max(gain_profile(problem.schedule, start), gain_profile(problem.schedule, end))


def _subinterval_end(problem: EvolutionProblem, start: float, t_final: float, b_norm: float) -> float:
    """Longest end <= t_final with (end - start) * sup ||f|| <= contraction target."""
    end = t_final
    while (end - start) * _sup_gain(problem, start, end) * b_norm > PICARD_CONTRACTION_TARGET:
        end = start + 0.5 * (end - start)
    return end


def picard_mild_solution(
    problem: EvolutionProblem,
    t: float,
    iterations: int = PICARD_MAX_ITER,
    grid_points: int = PICARD_GRID_POINTS,
    tol: float = PICARD_TOL,
) -> PicardResult:
    """Fixed point of the Duhamel map at time t (oracle for dimension <= 64)."""
    issues = problem.dimension_issues()
    if issues:
        raise DimensionError("; ".join(issues), module=_MODULE, operation=_OPERATION)
    if problem.dim > PICARD_MAX_DIM:
        raise PreconditionError(
            f"state dimension {problem.dim} exceeds the oracle limit {PICARD_MAX_DIM}",
            module=_MODULE, operation=_OPERATION,
        )
    if t < 0:
        raise PreconditionError(f"t must be >= 0, got {t}", module=_MODULE, operation=_OPERATION)

    inner = problem.inner_product
    state = problem.initial_state.copy()
    if t == 0:
        return PicardResult(state=state, t=0.0)

    a = problem.a_op.matrix
    b = problem.b_op.matrix
    b_norm = operator_norm(problem.b_op)
    node_spacing = t / grid_points
    subintervals: list[PicardSubinterval] = []

    start = 0.0
    while start < t:
        end = _subinterval_end(problem, start, t, b_norm)
        if t - end < 1e-12 * t:
            end = t
        count = max(1, math.ceil((end - start) / node_spacing - 1e-9))
        nodes = np.linspace(start, end, count + 1)
        phi, g1, g2 = propagators(a, (end - start) / count)

        gains = problem.gain * np.array([gain_profile(problem.schedule, s) for s in nodes])
        forcing_d = np.vstack([problem.disturbance_vector(s) for s in nodes])

        # open-loop start: exact when K = 0
        current = _duhamel(state, forcing_d, phi, g1, g2)
        ratio, previous_diff = 0.0, None
        for iteration in range(1, iterations + 1):
            forcing = -gains[:, None] * (current @ b.T) + forcing_d
            updated = _duhamel(state, forcing, phi, g1, g2)
            diff = float(np.max(inner.norms(updated - current)))
            if previous_diff:
                ratio = diff / previous_diff
            previous_diff = diff
            current = updated
            if diff <= tol:
                break
        else:
            raise ConvergenceError(
                f"no fixed point on [{start:.6g}, {end:.6g}] after {iterations} iterations "
                f"(last contraction ratio {ratio:.3g})",
                last_ratio=ratio, module=_MODULE, operation=_OPERATION,
            )

        bound = (end - start) * _sup_gain(problem, start, end) * b_norm
        subintervals.append(PicardSubinterval(
            start=start, end=end, iterations=iteration,
            contraction_ratio=ratio, contraction_bound=bound,
        ))
        logger.debug("picard_subinterval", start=start, end=end, iterations=iteration, ratio=ratio)
        state = current[-1]
        start = end

    return PicardResult(state=state, t=t, subintervals=subintervals)
