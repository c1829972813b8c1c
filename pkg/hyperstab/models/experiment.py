"""Heat-equation-with-memory experiment models."""

import numpy as np
from pydantic import BaseModel, Field, computed_field, model_validator

from hyperstab.config.constants import DEFAULT_GAIN, DEFAULT_HORIZON
from hyperstab.models.operator import HeatMemoryGeometry
from hyperstab.models.problem import DisturbanceSpec


class HeatMemoryExperiment(BaseModel):
    """v_t = v_xx - w + U + d, w_t = -beta w + eta v + eps U_2 on (0, 1)."""

    geometry: HeatMemoryGeometry = Field(default_factory=HeatMemoryGeometry)
    gain: float = Field(default=DEFAULT_GAIN, gt=0)
    n: int = Field(default=1, ge=1)
    disturbance: DisturbanceSpec = Field(default_factory=DisturbanceSpec)
    v0: list[float] | None = None  # default sin(pi x)
    w0: list[float] | None = None  # default 0
    horizon: float = Field(default=DEFAULT_HORIZON, gt=0)
    output_dir: str = ""

    @model_validator(mode="after")
    def _check_profiles(self) -> "HeatMemoryExperiment":
        n_points = self.geometry.n_points
        for name, profile in (("v0", self.v0), ("w0", self.w0)):
            if profile is not None and len(profile) != n_points:
                raise ValueError(f"{name} has {len(profile)} values, expected N={n_points}")
        return self

    @computed_field
    @property
    def certified(self) -> bool:
        return self.gain * min(1.0, self.geometry.epsilon) > 0.5

    def initial_v(self) -> np.ndarray:
        if self.v0 is None:
            return np.sin(np.pi * self.geometry.x)
        return np.asarray(self.v0, dtype=float)

    def initial_w(self) -> np.ndarray:
        if self.w0 is None:
            return np.zeros(self.geometry.n_points)
        return np.asarray(self.w0, dtype=float)


class ReformulationPoint(BaseModel):
    t_requested: float
    t_snapshot: float
    discrepancy: float


class ReformulationReport(BaseModel):
    """Integrated w against its exponential-kernel reconstruction from v."""
    points: list[ReformulationPoint] = Field(default_factory=list)
    tolerance: float

    @computed_field
    @property
    def max_discrepancy(self) -> float:
        return max((p.discrepancy for p in self.points), default=0.0)

    @computed_field
    @property
    def passed(self) -> bool:
        return self.max_discrepancy <= self.tolerance


class SweepCurve(BaseModel):
    n: int
    times: list[float]
    log10_norms: list[float]


class OrderingViolation(BaseModel):
    t: float
    n_low: int
    n_high: int
    excess: float  # log10 norm of n_high above n_low


class SweepReport(BaseModel):
    """Per-n log-norm curves and the ordering check on a comparison grid."""
    n_values: list[int]
    comparison_times: list[float]
    curves: list[SweepCurve] = Field(default_factory=list)
    comparison: list[list[float]] = Field(default_factory=list)  # [time][n]
    violations: list[OrderingViolation] = Field(default_factory=list)

    @property
    def ordered(self) -> bool:
        return not self.violations
