"""Tests for discrete operators and monotonicity checks."""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from hyperstab.errors import PreconditionError
from hyperstab.models.operator import HeatMemoryGeometry
from hyperstab.numerics.operators import (
    build_B_epsilon, build_dirichlet_laplacian, build_memory_operator, build_v_block_control,
    check_monotone, coercivity_constant, dump_operator, interleaved_ordering, make_operator,
    memory_inner_product, operator_norm,
)


class TestLaplacian:
    def test_stencil(self):
        op = build_dirichlet_laplacian(3)
        expected = 16.0 * np.array([[2, -1, 0], [-1, 2, -1], [0, -1, 2]])
        assert np.allclose(op.matrix, expected)
        assert op.inner_product.mesh_weight == pytest.approx(0.25)

    def test_monotone(self):
        assert build_dirichlet_laplacian(31).monotone

    def test_coercivity_near_pi_squared(self):
        n = 63
        h = 1.0 / (n + 1)
        expected = 2.0 * (1.0 - math.cos(math.pi * h)) / h**2
        assert coercivity_constant(build_dirichlet_laplacian(n)) == pytest.approx(expected, rel=1e-9)

    @pytest.mark.parametrize("n", [3, 7, 31])
    def test_spectrum_matches_analytic(self, n):
        h = 1.0 / (n + 1)
        k = np.arange(1, n + 1)
        expected = 4.0 / h**2 * np.sin(k * np.pi * h / 2.0) ** 2
        computed = np.linalg.eigvalsh(build_dirichlet_laplacian(n).matrix)
        assert np.allclose(np.sort(computed), expected, rtol=1e-10)

    def test_needs_two_points(self):
        with pytest.raises(PreconditionError, match="operators.build_dirichlet_laplacian"):
            build_dirichlet_laplacian(1)


class TestMemoryOperator:
    def test_block_structure(self):
        geom = HeatMemoryGeometry(n_points=4, beta=2.0, eta_mem=3.0)
        m = build_memory_operator(geom).matrix
        assert m.shape == (8, 8)
        assert np.allclose(m[:4, 4:], np.eye(4))
        assert np.allclose(m[4:, :4], -3.0 * np.eye(4))
        assert np.allclose(m[4:, 4:], 2.0 * np.eye(4))

    def test_monotone_in_weighted_product(self):
        geom = HeatMemoryGeometry(n_points=10, beta=0.0, eta_mem=5.0)
        op = build_memory_operator(geom)
        assert op.monotone
        assert check_monotone(op).passed

    def test_not_monotone_unweighted(self):
        geom = HeatMemoryGeometry(n_points=10, beta=0.0, eta_mem=5.0)
        op = build_memory_operator(geom)
        plain = make_operator(op.matrix)
        assert not check_monotone(plain).passed

    def test_inner_product_weights(self):
        geom = HeatMemoryGeometry(n_points=3, eta_mem=2.0)
        ip = memory_inner_product(geom)
        assert np.allclose(ip.weights, [2, 2, 2, 1, 1, 1])
        assert ip.mesh_weight == pytest.approx(0.25)

    def test_interleaved_ordering(self):
        assert interleaved_ordering(3).tolist() == [0, 3, 1, 4, 2, 5]

    @pytest.mark.parametrize("beta, eta_mem", [(0.0, 1.0), (1.0, 0.5), (2.5, 3.0)])
    def test_weighted_energy_identity(self, beta, eta_mem):
        """<Az, z>_w = eta h sum |D+ z1|^2 + beta h sum z2^2 (zero boundary values)."""
        geom = HeatMemoryGeometry(n_points=12, beta=beta, eta_mem=eta_mem)
        op = build_memory_operator(geom)
        rng = np.random.default_rng(7)
        for _ in range(10):
            z = rng.standard_normal(24)
            z1, z2 = z[:12], z[12:]
            forward = np.diff(np.concatenate([[0.0], z1, [0.0]])) / geom.h
            expected = eta_mem * geom.h * np.sum(forward**2) + beta * geom.h * np.sum(z2**2)
            assert op.inner_product.inner(op.apply(z), z) == pytest.approx(expected, rel=1e-10)

    @pytest.mark.parametrize("beta", [0.0, 1.0])
    @pytest.mark.parametrize("eta_mem", [0.5, 1.0, 2.0])
    def test_monotone_over_parameter_grid(self, beta, eta_mem):
        geom = HeatMemoryGeometry(n_points=20, beta=beta, eta_mem=eta_mem)
        op = build_memory_operator(geom)
        assert op.monotone
        assert check_monotone(op).passed


class TestControlOperators:
    def test_b_epsilon_coercivity(self):
        geom = HeatMemoryGeometry(n_points=5, epsilon=0.3)
        assert coercivity_constant(build_B_epsilon(geom)) == pytest.approx(0.3)

    @pytest.mark.parametrize("epsilon", [0.1, 0.5, 1.0, 2.0, 10.0])
    def test_b_epsilon_coercivity_is_min_one_epsilon(self, epsilon):
        geom = HeatMemoryGeometry(n_points=6, epsilon=epsilon)
        assert coercivity_constant(build_B_epsilon(geom)) == pytest.approx(min(1.0, epsilon))

    def test_b_epsilon_norm(self):
        geom = HeatMemoryGeometry(n_points=5, epsilon=2.0)
        assert operator_norm(build_B_epsilon(geom)) == pytest.approx(2.0)

    def test_v_only_control_not_coercive(self):
        geom = HeatMemoryGeometry(n_points=5)
        op = build_v_block_control(geom)
        assert coercivity_constant(op) == pytest.approx(0.0, abs=1e-12)
        assert check_monotone(op).passed


class TestCheckMonotone:
    def test_rotation_fails_with_witness(self):
        op = make_operator([[0.0, 1.0], [-3.0, 0.0]])
        verdict = check_monotone(op)
        assert not verdict.passed
        assert verdict.lambda_min == pytest.approx(-1.0)
        z = verdict.witness
        assert op.inner_product.norm(z) == pytest.approx(1.0)
        assert op.inner_product.inner(op.apply(z), z) < 0

    def test_negative_identity(self):
        verdict = check_monotone(make_operator(-np.eye(3)))
        assert not verdict.passed
        assert verdict.lambda_min == pytest.approx(-1.0)
        assert verdict.witness is not None

    def test_weights_change_verdict(self):
        op = make_operator([[0.0, 1.0], [-3.0, 0.0]], weights=[3.0, 1.0])
        assert check_monotone(op).passed

    def test_explicit_tolerance(self):
        op = make_operator([[-1e-6]])
        assert not check_monotone(op).passed
        assert check_monotone(op, tol=1e-5).passed


class TestOperatorModel:
    def test_non_square_rejected(self):
        with pytest.raises(ValidationError):
            make_operator(np.ones((2, 3)))

    def test_weight_dimension_mismatch(self):
        with pytest.raises(ValidationError):
            make_operator(np.eye(2), weights=[1.0, 1.0, 1.0])

    def test_nonpositive_weights(self):
        with pytest.raises(ValidationError):
            make_operator(np.eye(2), weights=[1.0, 0.0])

    def test_bad_ordering(self):
        op = make_operator(np.eye(2))
        with pytest.raises(ValidationError):
            type(op)(matrix=op.matrix, inner_product=op.inner_product, ordering=np.array([0, 0]))


class TestDumpOperator:
    def test_format(self, tmp_path):
        op = make_operator([[2.0, 0.0], [-1.0, 3.5]])
        path = dump_operator(op, tmp_path / "op.mtx")
        lines = path.read_text().splitlines()
        assert lines[0] == "2 2 3"
        assert lines[1] == "1 1 2"
        assert "2 1 -1" in lines
        assert "2 2 3.5" in lines
