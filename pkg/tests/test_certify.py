"""Tests for decay/ISS certificates and rate fitting."""

import math

import numpy as np
import pytest

from conftest import scalar_problem
from hyperstab.errors import CertificationError, InsufficientSamplesError, PreconditionError
from hyperstab.models.certificate import CertificateKind, Verdict
from hyperstab.models.problem import DisturbanceKind, DisturbanceSpec, SimulationOptions
from hyperstab.models.schedule import PsiKind, PsiSchedule, TimeMap
from hyperstab.models.trajectory import Trajectory
from hyperstab.numerics.certify import (
    audit_trajectory, decay_bound, fit_rate, iss_constant, theorem2_constant, theorem3_constant,
)
from hyperstab.numerics.heatmem import assemble
from hyperstab.numerics.solver import simulate
from hyperstab.numerics.timescale import lemma1_constant


class TestConstants:
    def test_small_eta_uses_lemma_constant(self):
        assert theorem2_constant(1.0) == pytest.approx(4.0 * lemma1_constant(2.0, 1.0))

    def test_large_eta_falls_back_to_supremum(self):
        assert theorem2_constant(3.0) == pytest.approx(theorem3_constant(3.0) / 3.0)

    def test_supremum_at_least_one(self):
        # the profile tends to 1 as tau grows
        assert theorem3_constant(3.0) >= 1.0

    def test_iss_constant_source(self):
        assert iss_constant(1.0)[1].startswith("lemma")
        assert iss_constant(2.0)[1].startswith("supremum")

    def test_nonpositive_eta(self):
        with pytest.raises(PreconditionError):
            theorem2_constant(0.0)


class TestDecayBound:
    def test_decay_only(self):
        time_map = TimeMap(eta=1.0)
        assert decay_bound(time_map, 2.0, 2.0, 0.0, 5.0) == pytest.approx(2.0 * math.exp(-4.0))

    def test_disturbance_term(self):
        time_map = TimeMap(eta=1.0)
        expected = math.exp(-4.0) + 0.5 * 0.25 / 9.0
        assert decay_bound(time_map, 1.0, 2.0, 0.5, 0.5) == pytest.approx(expected)

    def test_larger_constant_never_lowers_bound(self):
        time_map = TimeMap(eta=1.5)
        times = np.linspace(0.0, 4.0, 41)
        previous = None
        for c in (0.0, 0.5, 1.0, 4.0, 20.0):
            bounds = np.array([decay_bound(time_map, 1.0, t, 0.3, c) for t in times])
            if previous is not None:
                assert np.all(bounds >= previous)
            previous = bounds


class TestAudit:
    def test_decay_certificate_passes(self, scalar):
        certificate = audit_trajectory(simulate(scalar), scalar)
        assert certificate.kind == CertificateKind.DECAY_ONLY
        assert certificate.verdict == Verdict.PASS
        assert certificate.eta == pytest.approx(1.0)
        assert len(certificate.bounds) == len(certificate.times)
        assert certificate.worst_margin >= -1e-2

    def test_iss_certificate_passes(self, scalar_disturbed):
        traj = simulate(scalar_disturbed)
        certificate = audit_trajectory(traj, scalar_disturbed)
        assert certificate.kind == CertificateKind.ISS
        assert certificate.passed
        assert certificate.d_sup_norm == pytest.approx(0.5)
        assert certificate.constant_source.startswith("supremum")

    def test_passing_certificate_reevaluates(self, scalar_disturbed):
        traj = simulate(scalar_disturbed)
        certificate = audit_trajectory(traj, scalar_disturbed)
        assert certificate.passed
        bounds = np.asarray(certificate.bounds)
        assert np.all(traj.lyapunov <= (1.0 + certificate.tol_bound) * bounds)

        time_map = TimeMap(eta=certificate.eta, schedule=scalar_disturbed.schedule)
        for k in (0, len(bounds) // 2, len(bounds) - 1):
            recomputed = decay_bound(time_map, float(traj.lyapunov[0]), float(traj.times[k]),
                                     certificate.d_sup_norm, certificate.constant_c)
            assert recomputed == pytest.approx(bounds[k], rel=1e-12)

    def test_iss_small_eta_uses_lemma(self):
        problem = scalar_problem(
            gain=1.0, horizon=3.0,
            disturbance=DisturbanceSpec(kind=DisturbanceKind.SINUSOID, amplitude=0.3, angular_frequency=4.0),
        )
        certificate = audit_trajectory(simulate(problem), problem)
        assert certificate.passed
        assert certificate.constant_source.startswith("lemma")

    def test_tail_ratio_below_constant(self, scalar_disturbed):
        traj = simulate(scalar_disturbed)
        d_sup = scalar_disturbed.disturbance_sup_norm()
        constant, _ = iss_constant(3.0)
        tail = traj.times >= 2.0
        ratio = traj.lyapunov[tail] * (1.0 + traj.times[tail]) ** 2 / d_sup**2
        assert np.max(ratio) <= 2.0 * constant

    def test_heat_memory_certificate(self, small_experiment):
        problem = assemble(small_experiment)
        certificate = audit_trajectory(simulate(problem), problem)
        assert certificate.passed
        assert certificate.eta == pytest.approx(3.0)

    def test_higher_exponent_uses_first_power_envelope(self):
        problem = scalar_problem(schedule=PsiSchedule(n=3))
        certificate = audit_trajectory(simulate(problem), problem)
        assert certificate.passed

    def test_violation_detected(self, scalar):
        traj = Trajectory(
            times=np.array([0.0, 1.0]),
            states=np.array([[1.0], [1.0]]),
            lyapunov=np.array([1.0, 1.0]),
            control_magnitudes=np.array([1.0, 2.0]),
        )
        certificate = audit_trajectory(traj, scalar)
        assert certificate.verdict == Verdict.FAIL
        assert certificate.worst_margin < 0

    def test_refuses_uncertified(self):
        problem = scalar_problem(gain=0.4)
        traj = simulate(problem, SimulationOptions(allow_uncertified=True))
        with pytest.raises(CertificationError, match="certify.audit_trajectory"):
            audit_trajectory(traj, problem)

    def test_refuses_baseline(self):
        problem = scalar_problem(schedule=PsiSchedule(kind=PsiKind.CONSTANT, a=2.0))
        with pytest.raises(CertificationError, match="baseline"):
            audit_trajectory(simulate(problem), problem)

    def test_refuses_iss_for_exponential(self):
        problem = scalar_problem(
            schedule=PsiSchedule(kind=PsiKind.EXPONENTIAL),
            disturbance=DisturbanceSpec(kind=DisturbanceKind.CONSTANT, value=0.1),
        )
        with pytest.raises(CertificationError, match="affine"):
            audit_trajectory(simulate(problem), problem)

    def test_exponential_decay_only(self):
        problem = scalar_problem(schedule=PsiSchedule(kind=PsiKind.EXPONENTIAL, a=1.0, alpha=0.5))
        assert audit_trajectory(simulate(problem), problem).passed


class TestFitRate:
    def test_recovers_quadratic_rate(self, scalar):
        traj = simulate(scalar, SimulationOptions(dt_max=1e-4))
        fit = fit_rate(traj)
        assert fit.quad_coeff == pytest.approx(0.5, abs=0.05)
        assert fit.lin_coeff == pytest.approx(1.0, abs=0.1)
        assert fit.window == (pytest.approx(0.2), pytest.approx(2.0))
        assert fit.residual_rms < 1e-3

    def test_constant_gain_has_no_quadratic_term(self):
        problem = scalar_problem(schedule=PsiSchedule(kind=PsiKind.CONSTANT, a=1.0))
        fit = fit_rate(simulate(problem))
        assert abs(fit.quad_coeff) < 0.05 * fit.lin_coeff / problem.horizon
        assert fit.lin_coeff == pytest.approx(1.0, abs=0.01)

    def test_custom_window(self, scalar):
        fit = fit_rate(simulate(scalar), (0.5, 1.5))
        assert fit.window == (0.5, 1.5)

    def test_insufficient_samples(self, scalar):
        with pytest.raises(InsufficientSamplesError, match="certify.fit_rate"):
            fit_rate(simulate(scalar), (5.0, 6.0))
