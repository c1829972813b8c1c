"""Gain schedule models: psi(t)^n and the time reparametrization."""

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field


class PsiKind(str, Enum):
    """Supported gain profiles."""
    AFFINE = "affine"  # psi(t) = 1 + t
    EXPONENTIAL = "exponential"  # psi(t) = a * exp(alpha * t)
    POWER_TOWER = "power_tower"  # psi(t) = b * t**t
    CONSTANT = "constant"  # psi(t) = a, comparison baseline only


class PsiSchedule(BaseModel):
    """Time-varying gain profile psi(t) raised to the exponent n."""
    model_config = ConfigDict(frozen=True)

    kind: PsiKind = PsiKind.AFFINE
    a: float = Field(default=1.0, gt=0)
    alpha: float = Field(default=1.0, gt=0)
    b: float = Field(default=1.0, gt=0)
    n: int = Field(default=1, ge=1)

    @property
    def is_baseline(self) -> bool:
        return self.kind == PsiKind.CONSTANT

    @property
    def has_closed_form(self) -> bool:
        return self.kind != PsiKind.POWER_TOWER

    def with_exponent(self, n: int) -> "PsiSchedule":
        return self.model_copy(update={"n": n})


class TimeMap(BaseModel):
    """tau = phi(t) = eta * integral_0^t psi(s) ds (exponent n not applied)."""
    model_config = ConfigDict(frozen=True)

    eta: float = Field(gt=0)
    schedule: PsiSchedule = Field(default_factory=PsiSchedule)
