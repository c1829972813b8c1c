"""Shared fixtures: a scalar closed loop with a known solution and small
heat-memory configurations."""

import math

import pytest

from hyperstab.models.experiment import HeatMemoryExperiment
from hyperstab.models.operator import HeatMemoryGeometry
from hyperstab.models.problem import DisturbanceKind, DisturbanceSpec, EvolutionProblem
from hyperstab.models.schedule import PsiSchedule
from hyperstab.numerics.operators import make_operator


def scalar_problem(
    gain: float = 1.0,
    horizon: float = 2.0,
    schedule: PsiSchedule | None = None,
    disturbance: DisturbanceSpec | None = None,
    x0: float = 1.0,
) -> EvolutionProblem:
    """x' + K psi(t)^n x = d(t) with A = 0 and B = 1 (unit weight)."""
    return EvolutionProblem(
        a_op=make_operator([[0.0]], label="A"),
        b_op=make_operator([[1.0]], label="B"),
        gain=gain,
        schedule=schedule or PsiSchedule(),
        disturbance=disturbance or DisturbanceSpec(),
        initial_state=[x0],
        horizon=horizon,
        label="scalar",
    )


def scalar_exact(t: float, gain: float = 1.0) -> float:
    """Solution of x' = -K (1 + t) x, x(0) = 1."""
    return math.exp(-gain * (t + 0.5 * t * t))


@pytest.fixture
def scalar():
    return scalar_problem()


@pytest.fixture
def scalar_disturbed():
    """K = 2 (eta = 3) with a constant disturbance d = 0.5."""
    return scalar_problem(
        gain=2.0,
        horizon=3.0,
        disturbance=DisturbanceSpec(kind=DisturbanceKind.CONSTANT, value=0.5),
    )


@pytest.fixture
def small_geometry():
    return HeatMemoryGeometry(n_points=15)


@pytest.fixture
def small_experiment(small_geometry):
    return HeatMemoryExperiment(geometry=small_geometry, horizon=1.0)


@pytest.fixture
def oracle_experiment():
    """N = 8 grid: 16 states, within the Picard oracle limit."""
    return HeatMemoryExperiment(geometry=HeatMemoryGeometry(n_points=8), horizon=1.0)
