"""Implicit time integration of X' + A X + K psi(t)^n B X = d(t).

Backward Euler is the default: every step applies the resolvent
(I + dt G(t + dt))^{-1} of the monotone closed-loop operator, which is a
contraction in the weighted norm when d = 0.
"""

import numpy as np
import scipy.linalg

from hyperstab.config.constants import (
    BANDED_MAX_FILL, CONTRACTION_TOL, DT_MAX_FACTOR, MAX_STEP_HALVINGS,
)
from hyperstab.errors import (
    ConvergenceError, DimensionError, HyperstabError, PreconditionError,
)
from hyperstab.models.problem import (
    DtPolicy, EvolutionProblem, GainCondition, Scheme, SimulationOptions,
)
from hyperstab.models.trajectory import Trajectory
from hyperstab.numerics.operators import check_monotone, coercivity_constant
from hyperstab.numerics.timescale import gain_profile
from hyperstab.utils.logger import get_logger

logger = get_logger(__name__)

_MODULE = "solver"


def gain_condition(problem: EvolutionProblem) -> GainCondition:
    """K * beta > 1/2 and eta = 2 K beta - 1, beta the coercivity constant of B."""
    beta = coercivity_constant(problem.b_op)
    product = problem.gain * beta
    return GainCondition(
        satisfied=product > 0.5,
        eta=2.0 * product - 1.0,
        beta=beta,
        gain=problem.gain,
    )


def _bandwidth(pattern: np.ndarray) -> tuple[int, int]:
    rows, cols = np.nonzero(pattern)
    if rows.size == 0:
        return 0, 0
    return int(max(0, np.max(rows - cols))), int(max(0, np.max(cols - rows)))


def _to_banded(matrix: np.ndarray, lower: int, upper: int) -> np.ndarray:
    """LAPACK band storage: ab[upper + i - j, j] = M[i, j]."""
    m = matrix.shape[0]
    ab = np.zeros((lower + upper + 1, m))
    for offset in range(-lower, upper + 1):
        diagonal = np.diagonal(matrix, offset)
        if offset >= 0:
            ab[upper - offset, offset:] = diagonal
        else:
            ab[upper - offset, : m + offset] = diagonal
    return ab


class ClosedLoopSystem:
    """Cached linear algebra for (I + c_a A + c_b B) x = rhs.

    Uses the operators' bandwidth-reducing ordering and a banded solve when
    the permuted system is narrow enough, a dense LU solve otherwise.
    """

    def __init__(self, problem: EvolutionProblem):
        self._a = problem.a_op.matrix
        self._b = problem.b_op.matrix
        m = problem.dim
        ordering = problem.a_op.ordering if problem.a_op.ordering is not None else problem.b_op.ordering
        self._perm = np.arange(m) if ordering is None else np.asarray(ordering)
        self._inverse = np.argsort(self._perm)

        a_perm = self._a[np.ix_(self._perm, self._perm)]
        b_perm = self._b[np.ix_(self._perm, self._perm)]
        pattern = (a_perm != 0) | (b_perm != 0) | np.eye(m, dtype=bool)
        self._lower, self._upper = _bandwidth(pattern)
        self.banded = (self._lower + self._upper + 1) <= BANDED_MAX_FILL * m

        if self.banded:
            self._eye_band = _to_banded(np.eye(m), self._lower, self._upper)
            self._a_band = _to_banded(a_perm, self._lower, self._upper)
            self._b_band = _to_banded(b_perm, self._lower, self._upper)
        else:
            self._a_perm = a_perm
            self._b_perm = b_perm
            self._eye = np.eye(m)

    def apply(self, c_a: float, c_b: float, x: np.ndarray) -> np.ndarray:
        """(c_a A + c_b B) x."""
        return c_a * (self._a @ x) + c_b * (self._b @ x)

    def solve(self, c_a: float, c_b: float, rhs: np.ndarray) -> np.ndarray:
        rhs_perm = rhs[self._perm]
        try:
            if self.banded:
                ab = self._eye_band + c_a * self._a_band + c_b * self._b_band
                x_perm = scipy.linalg.solve_banded((self._lower, self._upper), ab, rhs_perm)
            else:
                matrix = self._eye + c_a * self._a_perm + c_b * self._b_perm
                x_perm = scipy.linalg.solve(matrix, rhs_perm)
        except (scipy.linalg.LinAlgError, ValueError) as e:
            raise HyperstabError(
                f"closed-loop system is singular: {e}", module=_MODULE, operation="step",
            ) from e
        return x_perm[self._inverse]


def _backward_euler(system: ClosedLoopSystem, problem: EvolutionProblem,
                    state: np.ndarray, t: float, dt: float) -> np.ndarray:
    t_next = t + dt
    c_b = dt * problem.gain * gain_profile(problem.schedule, t_next)
    rhs = state + dt * problem.disturbance_vector(t_next)
    return system.solve(dt, c_b, rhs)


def _crank_nicolson(system: ClosedLoopSystem, problem: EvolutionProblem,
                    state: np.ndarray, t: float, dt: float) -> np.ndarray:
    t_next = t + dt
    half = 0.5 * dt
    gain_now = problem.gain * gain_profile(problem.schedule, t)
    gain_next = problem.gain * gain_profile(problem.schedule, t_next)
    rhs = (
        state
        - system.apply(half, half * gain_now, state)
        + half * (problem.disturbance_vector(t) + problem.disturbance_vector(t_next))
    )
    return system.solve(half, half * gain_next, rhs)


def step_backward_euler(problem: EvolutionProblem, state: np.ndarray,
                        t: float, dt: float) -> np.ndarray:
    """X+ solving (I + dt (A + K psi(t+dt)^n B)) X+ = X + dt d(t+dt)."""
    if dt <= 0:
        raise PreconditionError(f"dt must be > 0, got {dt}", module=_MODULE,
                                operation="step_backward_euler")
    return _backward_euler(ClosedLoopSystem(problem), problem, np.asarray(state, dtype=float), t, dt)


def _validate(problem: EvolutionProblem, operation: str) -> None:
    issues = problem.dimension_issues()
    if issues:
        raise DimensionError("; ".join(issues), module=_MODULE, operation=operation)
    if not problem.horizon > 0:
        raise PreconditionError(f"horizon must be > 0, got {problem.horizon}",
                                module=_MODULE, operation=operation)


def default_dt_max(horizon: float) -> float:
    return DT_MAX_FACTOR * max(1.0, horizon)


def simulate(problem: EvolutionProblem, options: SimulationOptions | None = None) -> Trajectory:
    """Integrate the closed loop to the horizon with gain-adaptive steps."""
    options = options or SimulationOptions()
    _validate(problem, "simulate")

    condition = gain_condition(problem)
    if not condition.satisfied and not options.allow_uncertified:
        raise PreconditionError(
            f"gain condition K*beta > 1/2 fails (K={problem.gain}, beta={condition.beta:.6g}); "
            "set allow_uncertified to run anyway",
            module=_MODULE, operation="simulate",
        )

    dt_max = options.dt_max or default_dt_max(problem.horizon)
    horizon = problem.horizon
    scheme = options.scheme
    advance = _backward_euler if scheme == Scheme.BACKWARD_EULER else _crank_nicolson
    system = ClosedLoopSystem(problem)
    inner = problem.inner_product

    contraction = (
        options.check_contraction
        and scheme == Scheme.BACKWARD_EULER
        and problem.disturbance.is_zero
        and check_monotone(problem.a_op).passed
        and check_monotone(problem.b_op).passed
    )

    state = problem.initial_state.copy()
    times = [0.0]
    states = [state]
    t = 0.0
    steps = 0
    rejected = 0
    snap = 1e-12 * max(1.0, horizon)

    while horizon - t > snap:
        if options.dt_policy == DtPolicy.GAIN_ADAPTIVE:
            dt = min(dt_max, options.c_dt / gain_profile(problem.schedule, t))
        else:
            dt = dt_max
        if horizon - (t + dt) <= snap:
            dt = horizon - t

        norm_before = inner.norm(state)
        for _ in range(MAX_STEP_HALVINGS + 1):
            candidate = advance(system, problem, state, t, dt)
            finite = bool(np.all(np.isfinite(candidate)))
            contracted = (
                not contraction
                or inner.norm(candidate) <= norm_before * (1.0 + CONTRACTION_TOL)
            )
            if finite and contracted:
                break
            rejected += 1
            logger.debug("step_rejected", t=t, dt=dt, finite=finite)
            dt *= 0.5
        else:
            raise ConvergenceError(
                f"step at t={t:.6g} rejected {MAX_STEP_HALVINGS} times",
                module=_MODULE, operation="simulate",
            )

        t = horizon if horizon - (t + dt) <= snap else t + dt
        state = candidate
        times.append(t)
        states.append(state)
        steps += 1

    times_arr = np.asarray(times)
    states_arr = np.vstack(states)
    lyapunov = inner.norms(states_arr) ** 2
    gains = problem.gain * np.array([gain_profile(problem.schedule, s) for s in times_arr])
    control = gains * inner.norms(states_arr @ problem.b_op.matrix.T)

    logger.info(
        "simulation_finished",
        label=problem.label, scheme=scheme.value, steps=steps, rejected=rejected,
        dt_max=dt_max, uncertified=not condition.satisfied,
    )
    return Trajectory(
        times=times_arr,
        states=states_arr,
        lyapunov=lyapunov,
        control_magnitudes=control,
        scheme=scheme.value,
        steps=steps,
        rejected_steps=rejected,
        dt_max=dt_max,
        certified=condition.satisfied,
        label=problem.label,
    )
