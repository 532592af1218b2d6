#!/usr/bin/env python3
"""
Tests for the quadrature building blocks.
"""

import math
from unittest import TestCase

import numpy as np
import pytest

from gapflow import quadrature
from gapflow.errors import ConvergenceError


class TestRules(TestCase):
    """Test cases for the fixed rules."""

    def test_gauss_legendre_is_cached_and_read_only(self):
        """Test the cached nodes and weights."""
        nodes, weights = quadrature.gauss_legendre(6)
        self.assertAlmostEqual(float(np.sum(weights)), 2.0, places=14)
        self.assertIs(quadrature.gauss_legendre(6)[0], nodes)
        with self.assertRaises(ValueError):
            nodes[0] = 0.0

    def test_geometric_breakpoints(self):
        """Test doubling breakpoints with and without a lower limit."""
        self.assertEqual(quadrature.geometric_breakpoints(10.0), [0.0, 1.0, 2.0, 4.0, 8.0, 10.0])
        self.assertEqual(quadrature.geometric_breakpoints(10.0, lower=3.0), [3.0, 6.0, 10.0])
        self.assertEqual(quadrature.geometric_breakpoints(0.5), [0.0, 0.5])

    def test_sinh_rule(self):
        """Test that the mapped rule integrates smooth functions on a stretched interval."""
        s, w = quadrature.sinh_rule(1e-2, 1.0, 16)
        self.assertTrue(np.all((s > 0.0) & (s < 1.0)))
        self.assertAlmostEqual(float(np.sum(w)), 1.0, places=12)
        self.assertAlmostEqual(float(np.sum(w * s**2)), 1.0 / 3.0, places=12)
        self.assertAlmostEqual(float(np.sum(w / (1e-2 + s))), math.log(101.0), places=10)


class TestAdaptive(TestCase):
    """Test cases for the scipy-backed adaptive quadrature."""

    def test_adaptive_quad(self):
        """Test a smooth integral."""
        value, error = quadrature.adaptive_quad(math.exp, 0.0, 1.0, 1e-12, "exp")
        self.assertAlmostEqual(value, math.e - 1.0, places=12)
        self.assertLess(error, 1e-10)

    def test_divergent_integral_raises(self):
        """Test that a divergent integral is reported as non-convergence."""
        with self.assertRaises(ConvergenceError) as ctx:
            quadrature.adaptive_quad(lambda x: 1.0 / x, 0.0, 1.0, 1e-10, "reciprocal")
        self.assertEqual(ctx.exception.label, "reciprocal")
        self.assertEqual(ctx.exception.target, 1e-10)

    def test_panel_quad(self):
        """Test the panel sum over geometric breakpoints."""
        points = quadrature.geometric_breakpoints(100.0)
        value, _ = quadrature.panel_quad(lambda x: 1.0 / (1.0 + x) ** 2, points, 1e-10, "panels")
        self.assertAlmostEqual(value, 1.0 - 1.0 / 101.0, places=10)


class TestRefinement(TestCase):
    """Test cases for level and order refinement."""

    def test_refine_stops_at_agreement(self):
        """Test that refinement returns the first level that agrees with its predecessor."""
        result = quadrature.refine(lambda level: np.array([1.0 + 2.0 ** (-10 * level)]), 1e-8, "levels")
        self.assertEqual(result.level, 4)
        self.assertLess(result.error, 1e-8)

    def test_refine_raises(self):
        """Test the error after the last level."""
        with self.assertRaises(ConvergenceError):
            quadrature.refine(lambda level: np.array([1.0 + 2.0 ** (-10 * level)]), 1e-14, "levels")

    def test_refine_zero_vector(self):
        """Test that an identically zero result converges immediately."""
        result = quadrature.refine(lambda level: np.zeros(6), 1e-8, "zero")
        self.assertEqual(result.level, 1)
        self.assertEqual(result.error, 0.0)

    def test_batch_integral(self):
        """Test many signed integrals at once."""
        upper = np.array([1.0, 2.0, 3.0, 0.0])
        lower = np.array([0.0, 0.0, 0.0, 1.0])
        result = quadrature.batch_integral(lambda t, rows: t**2, lower, upper, 0.1, 1e-12, "cubes")
        np.testing.assert_allclose(result.value, [1.0 / 3.0, 8.0 / 3.0, 9.0, -1.0 / 3.0], rtol=1e-12)

    def test_batch_integral_uses_row_slices(self):
        """Test that the integrand sees the rows its nodes belong to."""
        k = np.array([1.0, 2.0, 3.0])
        result = quadrature.batch_integral(
            lambda t, rows: k[rows, None] * np.ones_like(t), 0.0, np.ones(3), 1.0, 1e-12, "rows"
        )
        np.testing.assert_allclose(result.value, k, rtol=1e-12)

    def test_batch_integral_raises(self):
        """Test that an exhausted order budget raises."""
        with self.assertRaises(ConvergenceError):
            quadrature.batch_integral(lambda t, rows: t, 0.0, np.ones(2), 1.0, 1e-8, "budget",
                                      start_order=8, max_order=8)


if __name__ == "__main__":
    pytest.main([__file__])
