"""Tests for adaptive Simpson quadrature."""

import math

import numpy as np

from hyperstab.numerics.quadrature import adaptive_simpson


class TestAdaptiveSimpson:
    def test_sine(self):
        q = adaptive_simpson(np.sin, 0.0, math.pi)
        assert q.converged
        assert abs(q.value - 2.0) < 1e-9

    def test_exponential_tail(self):
        q = adaptive_simpson(lambda x: np.exp(-x), 0.0, 50.0, panels=50)
        assert abs(q.value - (1.0 - math.exp(-50.0))) < 1e-9

    def test_empty_interval(self):
        q = adaptive_simpson(np.cos, 1.0, 1.0)
        assert q.value == 0.0
        assert q.evaluations == 0

    def test_reversed_bounds(self):
        forward = adaptive_simpson(np.cos, 0.0, 1.0)
        backward = adaptive_simpson(np.cos, 1.0, 0.0)
        assert backward.value == -forward.value

    def test_scalar_integrand_broadcast(self):
        q = adaptive_simpson(lambda x: 3.0, 0.0, 2.0)
        assert abs(q.value - 6.0) < 1e-12

    def test_kink_needs_refinement(self):
        q = adaptive_simpson(lambda x: np.abs(x - 0.3), 0.0, 1.0)
        exact = 0.5 * 0.3**2 + 0.5 * 0.7**2
        assert abs(q.value - exact) < 1e-9
        assert q.evaluations > 5

    def test_level_budget_reports_unconverged(self):
        q = adaptive_simpson(lambda x: np.sqrt(np.abs(x - 1.0 / 3.0)), 0.0, 1.0,
                             rel_tol=1e-15, max_levels=3)
        assert not q.converged
