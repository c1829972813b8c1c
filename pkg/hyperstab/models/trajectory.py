"""Simulation output models."""

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field


class Trajectory(BaseModel):
    """Time grid, state snapshots and derived Lyapunov/control series."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    times: np.ndarray
    states: np.ndarray  # (samples, dim)
    lyapunov: np.ndarray  # V(t_k) = <X_k, X_k>_w
    control_magnitudes: np.ndarray  # ||K psi(t_k)^n B X_k||_w
    scheme: str = "be"
    steps: int = 0
    rejected_steps: int = 0
    dt_max: float = 0.0
    certified: bool = True
    label: str = ""

    @property
    def norms(self) -> np.ndarray:
        return np.sqrt(self.lyapunov)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def state_at(self, t: float) -> np.ndarray:
        """Linear interpolation of the stored snapshots at time t."""
        k = int(np.searchsorted(self.times, t))
        if k <= 0:
            return self.states[0]
        if k >= len(self.times):
            return self.states[-1]
        t0, t1 = self.times[k - 1], self.times[k]
        theta = (t - t0) / (t1 - t0)
        return (1.0 - theta) * self.states[k - 1] + theta * self.states[k]

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame({
            "t": self.times,
            "normX": self.norms,
            "V": self.lyapunov,
            "controlMag": self.control_magnitudes,
        })


class PicardSubinterval(BaseModel):
    """One short interval of the fixed-point construction."""
    start: float
    end: float
    iterations: int
    contraction_ratio: float
    contraction_bound: float  # interval length * sup ||f||


class PicardResult(BaseModel):
    """Mild solution value at time t from Picard iteration."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    state: np.ndarray
    t: float
    subintervals: list[PicardSubinterval] = Field(default_factory=list)

    @property
    def iterations(self) -> int:
        return sum(s.iterations for s in self.subintervals)

    @property
    def max_contraction_ratio(self) -> float:
        return max((s.contraction_ratio for s in self.subintervals), default=0.0)
