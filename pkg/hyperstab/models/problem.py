"""Closed-loop problem models: disturbance, evolution problem, solver options."""

import math
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from hyperstab.config.constants import RANDOM_HOLD, STEP_CONSTANT
from hyperstab.models.operator import DiscreteOperator
from hyperstab.models.schedule import PsiSchedule


class DisturbanceKind(str, Enum):
    """Scalar disturbance profiles d(t)."""
    ZERO = "zero"
    CONSTANT = "constant"
    SINUSOID = "sinusoid"
    BOUNDED_RANDOM = "bounded_random"


class SpatialPattern(str, Enum):
    """How the scalar d(t) is spread over the state."""
    UNIFORM = "uniform"  # every state block
    FIRST_COMPONENT = "first_component"  # first state block only (v in X = [v; w])


class DisturbanceSpec(BaseModel):
    """Bounded disturbance d(t) with a spatial pattern."""
    model_config = ConfigDict(frozen=True)

    kind: DisturbanceKind = DisturbanceKind.ZERO
    value: float = 0.0  # Constant(c)
    amplitude: float = Field(default=0.0, ge=0)
    angular_frequency: float = 1.0
    phase: float = 0.0
    seed: int = Field(default=0, ge=0)
    hold: float = Field(default=RANDOM_HOLD, gt=0)
    pattern: SpatialPattern = SpatialPattern.UNIFORM

    @property
    def is_zero(self) -> bool:
        return self.sup_norm() == 0.0

    def sup_norm(self) -> float:
        """||d||_inf of the scalar profile."""
        if self.kind == DisturbanceKind.ZERO:
            return 0.0
        if self.kind == DisturbanceKind.CONSTANT:
            return abs(self.value)
        return self.amplitude

    def value_at(self, t: float) -> float:
        if self.kind == DisturbanceKind.ZERO:
            return 0.0
        if self.kind == DisturbanceKind.CONSTANT:
            return self.value
        if self.kind == DisturbanceKind.SINUSOID:
            return self.amplitude * math.sin(self.angular_frequency * t + self.phase)
        # Piecewise constant on cells of width `hold`; each cell seeds its own generator
        cell = int(math.floor(t / self.hold))
        rng = np.random.default_rng([self.seed, max(cell, 0)])
        draw = self.amplitude * rng.uniform(-1.0, 1.0)
        return float(np.clip(draw, -self.amplitude, self.amplitude))


class EvolutionProblem(BaseModel):
    """X' + A X + K psi(t)^n B X = d(t), X(0) = X0 on [0, T]."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    a_op: DiscreteOperator
    b_op: DiscreteOperator
    gain: float = Field(ge=0)
    schedule: PsiSchedule = Field(default_factory=PsiSchedule)
    disturbance: DisturbanceSpec = Field(default_factory=DisturbanceSpec)
    initial_state: np.ndarray
    horizon: float
    block_size: int | None = None
    label: str = ""

    @field_validator("initial_state", mode="before")
    @classmethod
    def _as_vector(cls, value) -> np.ndarray:
        state = np.array(value, dtype=float).reshape(-1)
        state.setflags(write=False)
        return state

    @property
    def dim(self) -> int:
        return int(self.initial_state.size)

    @property
    def inner_product(self):
        return self.a_op.inner_product

    @property
    def disturbance_mask(self) -> np.ndarray:
        mask = np.ones(self.dim)
        if self.disturbance.pattern == SpatialPattern.FIRST_COMPONENT:
            mask[:] = 0.0
            mask[: self.block_size or 1] = 1.0
        return mask

    def disturbance_vector(self, t: float) -> np.ndarray:
        return self.disturbance.value_at(t) * self.disturbance_mask

    def disturbance_sup_norm(self) -> float:
        """||d||_inf measured in the weighted state norm."""
        return self.disturbance.sup_norm() * self.inner_product.norm(self.disturbance_mask)

    def dimension_issues(self) -> list[str]:
        issues = []
        if self.a_op.dim != self.dim:
            issues.append(f"A is {self.a_op.dim}x{self.a_op.dim} but the state has {self.dim} entries")
        if self.b_op.dim != self.dim:
            issues.append(f"B is {self.b_op.dim}x{self.b_op.dim} but the state has {self.dim} entries")
        if self.a_op.dim == self.b_op.dim and not np.allclose(
            self.a_op.inner_product.full_weights, self.b_op.inner_product.full_weights
        ):
            issues.append("A and B are measured against different inner products")
        return issues


class Scheme(str, Enum):
    """Time-stepping schemes."""
    BACKWARD_EULER = "be"
    CRANK_NICOLSON = "cn"


class DtPolicy(str, Enum):
    GAIN_ADAPTIVE = "gain_adaptive"  # dt = min(dt_max, c_dt / psi(t)^n)
    FIXED = "fixed"


class SimulationOptions(BaseModel):
    """Integrator options."""
    scheme: Scheme = Scheme.BACKWARD_EULER
    dt_max: float | None = Field(default=None, gt=0)
    dt_policy: DtPolicy = DtPolicy.GAIN_ADAPTIVE
    c_dt: float = Field(default=STEP_CONSTANT, gt=0)
    allow_uncertified: bool = False
    check_contraction: bool = True


class GainCondition(BaseModel):
    """K * beta > 1/2 with beta the weighted coercivity constant of B."""
    satisfied: bool
    eta: float
    beta: float
    gain: float
