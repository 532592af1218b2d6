#!/usr/bin/env python3
"""
Tests for the Gamma coefficients, rate functions and neck integrals.
"""

import math
from unittest import TestCase

import numpy as np
import pytest
from scipy import integrate, special

from gapflow import specfun
from gapflow.errors import DomainError
from gapflow.geometry import GapGeometry
from gapflow.specfun import CoeffIndex


class TestCoeffIndex(TestCase):
    """Test cases for the admissible index pairs."""

    def test_from_pair(self):
        """Test lookup of the two admissible pairs."""
        self.assertIs(CoeffIndex.from_pair(1, 2), CoeffIndex.SHEAR)
        self.assertIs(CoeffIndex.from_pair(3, 4), CoeffIndex.SQUEEZE)
        self.assertEqual(CoeffIndex.SQUEEZE.tag, "rho34")

    def test_rejects_other_pairs(self):
        """Test that pairs other than 12 and 34 are rejected."""
        with self.assertRaises(DomainError):
            CoeffIndex.from_pair(1, 4)


class TestGamma(TestCase):
    """Test cases for gamma_fn and gamma_coeff."""

    def test_gamma_values(self):
        """Test classical Gamma values."""
        self.assertAlmostEqual(specfun.gamma_fn(0.5), 1.7724538509, places=9)
        self.assertAlmostEqual(specfun.gamma_fn(2.5), 1.3293403882, places=9)

    def test_gamma_domain(self):
        """Test that non-positive and oversized arguments are rejected."""
        with self.assertRaises(DomainError):
            specfun.gamma_fn(0.0)
        with self.assertRaises(DomainError):
            specfun.gamma_fn(31.0)

    def test_gamma_coeff_power_branch(self):
        """Test Gamma_12 for m = 4, kappa = 1 against pi/(4 sqrt 2)."""
        value = specfun.gamma_coeff(CoeffIndex.SHEAR, 4.0, 1.0)
        self.assertAlmostEqual(value, math.pi / (4.0 * math.sqrt(2.0)), places=14)
        self.assertAlmostEqual(value, 0.5553604, places=7)

    def test_gamma_coeff_log_branch(self):
        """Test that i = j/m uses 1/(m (2 kappa)^(j/m))."""
        self.assertAlmostEqual(specfun.gamma_coeff(CoeffIndex.SHEAR, 2.0, 0.5), 0.5, places=15)
        self.assertAlmostEqual(specfun.gamma_coeff(CoeffIndex.SHEAR, 2.0, 1.0), 0.25, places=15)

    def test_gamma_coeff_squeeze_m2(self):
        """Test Gamma_34 for m = 2 reduces to 1/(8 kappa^2)."""
        for kappa in (0.25, 0.5, 2.0):
            self.assertAlmostEqual(
                specfun.gamma_coeff(CoeffIndex.SQUEEZE, 2.0, kappa), 1.0 / (8.0 * kappa**2), places=14
            )

    def test_gamma_coeff_domain(self):
        """Test m < 2 and kappa <= 0."""
        with self.assertRaises(DomainError):
            specfun.gamma_coeff(CoeffIndex.SHEAR, 1.5, 1.0)
        with self.assertRaises(DomainError):
            specfun.gamma_coeff(CoeffIndex.SHEAR, 2.0, 0.0)


class TestRate(TestCase):
    """Test cases for the rate functions."""

    def test_log_branch(self):
        """Test rho_12 at m = 2 is |ln eps|."""
        self.assertAlmostEqual(specfun.rate(CoeffIndex.SHEAR, 2.0, 0.01), 4.6051702, places=7)

    def test_power_branch(self):
        """Test rho_34 at m = 2 and rho_12 at m = 3."""
        self.assertAlmostEqual(specfun.rate(CoeffIndex.SQUEEZE, 2.0, 1e-3), 1000.0, places=9)
        self.assertAlmostEqual(specfun.rate(CoeffIndex.SHEAR, 3.0, 1e-6), 100.0, places=9)

    def test_rate_domain(self):
        """Test that eps must lie in (0, 1)."""
        for eps in (0.0, 1.0, 2.0):
            with self.assertRaises(DomainError):
                specfun.rate(CoeffIndex.SHEAR, 2.0, eps)


class TestNeckIntegrals(TestCase):
    """Test cases for the radial neck integrals."""

    def test_shear_integral_closed_form(self):
        """Test (1, 2) at m = 2 against (1/4 kappa) ln(1 + 2 kappa r^2/eps)."""
        geom = GapGeometry(m=2.0, kappa=0.5, epsilon=1e-4, r=1.0, R=2.0)
        value = specfun.neck_scalar_integral(1, 2, geom)
        self.assertAlmostEqual(value, 0.5 * math.log((1e-4 + 1.0) / 1e-4), places=8)
        self.assertAlmostEqual(value, 4.6052170, places=6)

    def test_squeeze_integral_closed_form(self):
        """Test (3, 4) at m = 2 against its antiderivative."""
        eps, kappa, r = 1e-4, 0.5, 0.5
        geom = GapGeometry(m=2.0, kappa=kappa, epsilon=eps, r=r)
        top = eps + 2.0 * kappa * r**2
        expected = (-1.0 / top + eps / (2.0 * top**2) + 1.0 / (2.0 * eps)) / (8.0 * kappa**2)
        value = specfun.neck_scalar_integral(3, 4, geom)
        self.assertLess(abs(value - expected) / expected, 1e-8)

    def test_beta_limit(self):
        """Test (1, 2) and (3, 4) at m = 3 against the Beta-function limit within 2%."""
        eps, kappa, m = 1e-6, 0.5, 3.0
        geom = GapGeometry(m=m, kappa=kappa, epsilon=eps, r=0.5)
        for i, j in ((1, 2), (3, 4)):
            limit = (
                special.beta(j / m, i - j / m) / m * (2.0 * kappa) ** (-j / m) * eps ** (j / m - i)
            )
            value = specfun.neck_scalar_integral(i, j, geom)
            self.assertLess(abs(value - limit) / limit, 0.02, msg=f"pair ({i}, {j})")

    def test_lower_limit(self):
        """Test that splitting at a lower limit adds up."""
        geom = GapGeometry(m=3.0, kappa=1.0, epsilon=1e-3, r=0.5)
        whole = specfun.neck_scalar_integral(1, 2, geom)
        tail = specfun.neck_scalar_integral(1, 2, geom, lower=0.1)
        head, _ = integrate.quad(lambda s: s / (1e-3 + 2.0 * s**3), 0.0, 0.1, epsabs=0.0, epsrel=1e-12)
        self.assertLess(abs(head + tail - whole) / whole, 1e-9)

    def test_neck_integral_domain(self):
        """Test invalid indices and lower limits."""
        geom = GapGeometry(m=2.0, kappa=0.5, epsilon=1e-3)
        with self.assertRaises(DomainError):
            specfun.neck_scalar_integral(0, 2, geom)
        with self.assertRaises(DomainError):
            specfun.neck_scalar_integral(1, 2, geom, lower=0.8)


class TestRadialPressureIntegral(TestCase):
    """Test cases for the squeeze-pressure radial integral."""

    def test_vanishes_at_neck_edge(self):
        """Test J(r) = 0."""
        for m in (2.0, 3.0):
            geom = GapGeometry(m=m, kappa=1.0, epsilon=1e-2, r=0.5)
            self.assertAlmostEqual(float(specfun.radial_pressure_integral(geom, 0.5)), 0.0, places=12)

    def test_quadratic_closed_form(self):
        """Test the m = 2 value at the apex."""
        eps, kappa, r = 1e-3, 0.5, 0.5
        geom = GapGeometry(m=2.0, kappa=kappa, epsilon=eps, r=r)
        expected = -(eps**-2 - (eps + 2.0 * kappa * r**2) ** -2) / (4.0 * kappa)
        self.assertAlmostEqual(float(specfun.radial_pressure_integral(geom, 0.0)) / expected, 1.0, places=14)

    def test_general_m_against_scipy(self):
        """Test m = 3 against scipy quad in the original variable."""
        eps, kappa, r = 1e-2, 1.0, 0.5
        geom = GapGeometry(m=3.0, kappa=kappa, epsilon=eps, r=r)
        s = np.array([0.0, 0.05, 0.2, 0.4])
        values = specfun.radial_pressure_integral(geom, s)
        expected = np.array([
            integrate.quad(
                lambda t: (eps + 2.0 * kappa * t**1.5) ** -3, r**2, point**2,
                epsabs=0.0, epsrel=1e-12, limit=200,
            )[0]
            for point in s
        ])
        np.testing.assert_allclose(values, expected, rtol=0, atol=1e-8 * np.max(np.abs(expected)))

    def test_domain(self):
        """Test that s outside [0, r] is rejected."""
        geom = GapGeometry(m=2.0, kappa=0.5, epsilon=1e-3)
        with self.assertRaises(DomainError):
            specfun.radial_pressure_integral(geom, 0.6)


if __name__ == "__main__":
    pytest.main([__file__])
