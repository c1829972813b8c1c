"""Certificate and report models (serialized to JSON with snake_case keys)."""

from enum import Enum

from pydantic import BaseModel, Field


class CertificateKind(str, Enum):
    DECAY_ONLY = "decay_only"
    ISS = "iss"


class Verdict(str, Enum):
    PASS = "pass"
    FAIL = "fail"


class Certificate(BaseModel):
    """Evaluated decay/ISS bound against a trajectory."""
    kind: CertificateKind
    eta: float = Field(gt=0)
    d_sup_norm: float = Field(ge=0)
    constant_c: float = Field(ge=0)
    constant_source: str = ""
    tol_bound: float = 0.0
    times: list[float] = Field(default_factory=list)
    bounds: list[float] = Field(default_factory=list)
    residuals: list[float] = Field(default_factory=list)  # bound - observed V
    verdict: Verdict
    worst_margin: float  # min_k residual_k / bound_k

    @property
    def passed(self) -> bool:
        return self.verdict == Verdict.PASS


class RateFit(BaseModel):
    """log||X(t)||_w ~ -(a t^2 + b t) + c over a window."""
    quad_coeff: float
    lin_coeff: float
    offset: float
    window: tuple[float, float]
    residual_rms: float
    samples: int


class LemmaPoint(BaseModel):
    tau: float
    left: float
    right: float
    margin: float  # right - left
    passed: bool


class LemmaReport(BaseModel):
    """Per-tau verification of the exponential-kernel integral inequality."""
    a: float
    alpha: float
    r: float
    points: list[LemmaPoint] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(p.passed for p in self.points)

    @property
    def violations(self) -> list[LemmaPoint]:
        return [p for p in self.points if not p.passed]
