from hyperstab.models.certificate import (
    Certificate, CertificateKind, LemmaPoint, LemmaReport, RateFit, Verdict,
)
from hyperstab.models.experiment import (
    HeatMemoryExperiment, OrderingViolation, ReformulationPoint,
    ReformulationReport, SweepCurve, SweepReport,
)
from hyperstab.models.operator import (
    DiscreteOperator, HeatMemoryGeometry, InnerProduct, MonotoneVerdict,
)
from hyperstab.models.problem import (
    DisturbanceKind, DisturbanceSpec, DtPolicy, EvolutionProblem, GainCondition,
    Scheme, SimulationOptions, SpatialPattern,
)
from hyperstab.models.schedule import PsiKind, PsiSchedule, TimeMap
from hyperstab.models.trajectory import PicardResult, PicardSubinterval, Trajectory

__all__ = [
    "Certificate", "CertificateKind", "DiscreteOperator", "DisturbanceKind",
    "DisturbanceSpec", "DtPolicy", "EvolutionProblem", "GainCondition",
    "HeatMemoryExperiment", "HeatMemoryGeometry", "InnerProduct", "LemmaPoint",
    "LemmaReport", "MonotoneVerdict", "OrderingViolation", "PicardResult",
    "PicardSubinterval", "PsiKind", "PsiSchedule", "RateFit", "ReformulationPoint",
    "ReformulationReport", "Scheme", "SimulationOptions", "SpatialPattern",
    "SweepCurve", "SweepReport", "TimeMap", "Trajectory", "Verdict",
]
