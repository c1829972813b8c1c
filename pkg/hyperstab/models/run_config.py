"""CLI run configuration models."""

from enum import Enum

from pydantic import BaseModel, Field

from hyperstab.config.constants import (
    LEMMA_DEFAULT_PAIRS, LEMMA_TAU_MAX, LEMMA_TAU_MIN,
    LEMMA_TAU_POINTS, SWEEP_COMPARISON_POINTS, SWEEP_COMPARISON_START,
)
from hyperstab.models.experiment import HeatMemoryExperiment
from hyperstab.models.problem import DisturbanceSpec, SimulationOptions
from hyperstab.models.schedule import PsiSchedule


class Command(str, Enum):
    LEMMA_CHECK = "lemma-check"
    SIMULATE = "simulate"
    HEAT_MEMORY = "heat-memory"
    SWEEP_N = "sweep-n"
    RATE_FIT = "rate-fit"
    CERTIFY = "certify"


class ProblemKind(str, Enum):
    HEAT_MEMORY = "heat_memory"
    SCALAR = "scalar"


class ScalarSettings(BaseModel):
    """x' + a x + K psi(t)^n b x = d(t)."""
    a: float = Field(default=0.0, ge=0)
    b: float = Field(default=1.0, gt=0)
    x0: float = 1.0
    gain: float = Field(default=1.0, ge=0)
    horizon: float = Field(default=2.0, gt=0)
    schedule: PsiSchedule = Field(default_factory=PsiSchedule)
    disturbance: DisturbanceSpec = Field(default_factory=DisturbanceSpec)


class LemmaSettings(BaseModel):
    pairs: list[tuple[float, float]] = Field(default_factory=lambda: list(LEMMA_DEFAULT_PAIRS))
    tau_min: float = Field(default=LEMMA_TAU_MIN, ge=0)
    tau_max: float = Field(default=LEMMA_TAU_MAX, gt=0)
    tau_points: int = Field(default=LEMMA_TAU_POINTS, ge=1)


class SweepSettings(BaseModel):
    n_values: list[int] = Field(default_factory=lambda: [1, 2, 3, 4, 5])
    comparison_start: float = Field(default=SWEEP_COMPARISON_START, ge=0)
    comparison_points: int = Field(default=SWEEP_COMPARISON_POINTS, ge=1)


class FitSettings(BaseModel):
    window: tuple[float, float] | None = None


class RunSettings(BaseModel):
    """Full experiment configuration (the JSON config file)."""
    model_config = {"extra": "forbid"}

    problem: ProblemKind = ProblemKind.HEAT_MEMORY
    heat_memory: HeatMemoryExperiment = Field(default_factory=HeatMemoryExperiment)
    scalar: ScalarSettings = Field(default_factory=ScalarSettings)
    solver: SimulationOptions = Field(default_factory=SimulationOptions)
    lemma: LemmaSettings = Field(default_factory=LemmaSettings)
    sweep: SweepSettings = Field(default_factory=SweepSettings)
    fit: FitSettings = Field(default_factory=FitSettings)
    check_reformulation: bool = True
    write_states: bool = False
    html: bool = False


class RunConfig(BaseModel):
    """Parsed command line."""
    command: Command
    config_path: str | None = None
    output_dir: str
    overrides: list[str] = Field(default_factory=list)
    seed: int | None = None
    dt_max: float | None = None
    scheme: str | None = None
    html: bool = False

