#!/usr/bin/env python3
"""
Tests for the explicit neck fields.
"""

from unittest import TestCase

import numpy as np
import pytest

from gapflow import fields, geometry, verify
from gapflow.errors import DomainError, ModeError
from gapflow.fields import FluidParams, ModeField, RigidMotion
from gapflow.geometry import GapGeometry
from gapflow.suites.suite import random_neck_points


def _random_motion(rng):
    return RigidMotion.from_vector(rng.normal(size=6))


def _surface_points(geom, rng, count, zeta):
    s = geom.r * np.sqrt(rng.random(count))
    theta = 2.0 * np.pi * rng.random(count)
    xp = np.stack([s * np.cos(theta), s * np.sin(theta)], axis=-1)
    return geometry.neck_point(geom, xp, np.full(count, zeta))


class TestModeField(TestCase):
    """Test cases for mode construction and admissibility."""

    def setUp(self):
        """Set up test fixtures."""
        self.quadratic = GapGeometry(kappa=0.5, epsilon=1e-3)
        self.cubic = GapGeometry(m=3.0, kappa=1.0, epsilon=1e-3)

    def test_admissible_modes(self):
        """Test that modes 4 and 5 exist only for m = 2."""
        self.assertEqual(fields.admissible_modes(self.quadratic), (1, 2, 3, 4, 5))
        self.assertEqual(fields.admissible_modes(self.cubic), (1, 2, 3))

    def test_mode_errors(self):
        """Test out-of-range modes and rotation modes for m != 2."""
        with self.assertRaises(ModeError):
            ModeField(6, self.quadratic, RigidMotion(), FluidParams())
        with self.assertRaises(ModeError):
            ModeField(4, self.cubic, RigidMotion(), FluidParams())

    def test_motion_helpers(self):
        """Test RigidMotion construction and scaling."""
        motion = RigidMotion.from_vector([1, 2, 3, 4, 5, 6])
        self.assertEqual(motion.U, (1.0, 2.0, 3.0))
        self.assertEqual(motion.scaled(2.0).omega, (8.0, 10.0, 12.0))
        self.assertTrue(RigidMotion().is_zero)
        self.assertFalse(RigidMotion(U=(0.0, 0.0, 1.0)).is_rotating)

    def test_invalid_motion_and_fluid(self):
        """Test that non-finite motions and non-positive viscosities are rejected."""
        with self.assertRaises(ValueError):
            RigidMotion(U=(float("nan"), 0.0, 0.0))
        with self.assertRaises(ValueError):
            FluidParams(mu=0.0)

    def test_points_outside_neck(self):
        """Test that evaluating outside the neck raises a domain error."""
        mode = ModeField(3, self.quadratic, RigidMotion(U=(0.0, 0.0, 1.0)), FluidParams())
        with self.assertRaises(DomainError):
            fields.velocity(mode, [0.0, 0.0, 0.01])


class TestBoundaryData(TestCase):
    """Test cases for phi, correction and velocity."""

    def setUp(self):
        """Set up test fixtures."""
        self.geom = GapGeometry(kappa=0.5, epsilon=0.01)
        self.fluid = FluidParams()
        self.rng = np.random.default_rng(20240601)

    def test_phi_examples(self):
        """Test phi for the squeeze, tilt and shear modes."""
        squeeze = ModeField(3, self.geom, RigidMotion(U=(0.0, 0.0, 2.0)), self.fluid)
        np.testing.assert_array_equal(fields.phi(squeeze, [0.1, 0.2, 0.0]), [0.0, 0.0, 2.0])
        tilt = ModeField(4, self.geom, RigidMotion(omega=(1.0, 0.0, 0.0)), self.fluid)
        np.testing.assert_allclose(fields.phi(tilt, [0.0, 0.1, 0.0]), [0.0, 0.0, 0.1], atol=1e-16)
        shear = ModeField(1, self.geom, RigidMotion(U=(1.0, 0.0, 0.0), omega=(0.0, 0.5, 0.0)), self.fluid)
        np.testing.assert_allclose(fields.phi(shear, [0.1, 0.0, 0.0]), [0.5, 0.0, 0.0], atol=1e-16)

    def test_correction_examples(self):
        """Test the squeeze correction at the apex and the shear correction."""
        squeeze = ModeField(3, self.geom, RigidMotion(U=(0.0, 0.0, 1.0)), self.fluid)
        np.testing.assert_array_equal(fields.correction(squeeze, [0.0, 0.0, 0.0]), [0.0, 0.0, 0.0])
        shear = ModeField(1, self.geom, RigidMotion(U=(1.0, 0.0, 0.0)), self.fluid)
        np.testing.assert_allclose(fields.correction(shear, [0.1, 0.0, 0.0]), [0.0, 0.0, 0.1], rtol=1e-14)

    def test_velocity_at_apex(self):
        """Test the squeeze velocity U3/2 on the mid-plane at the apex."""
        squeeze = ModeField(3, self.geom, RigidMotion(U=(0.0, 0.0, 1.0)), self.fluid)
        np.testing.assert_allclose(fields.velocity(squeeze, [0.0, 0.0, 0.0]), [0.0, 0.0, 0.5], atol=1e-16)

    def test_boundary_exactness(self):
        """Test velocity = phi on the upper surface and 0 on the lower one for every mode."""
        top = _surface_points(self.geom, self.rng, 1000, 0.5)
        bottom = _surface_points(self.geom, self.rng, 1000, -0.5)
        for alpha in fields.admissible_modes(self.geom):
            mode = ModeField(alpha, self.geom, _random_motion(self.rng), self.fluid)
            upper = fields.velocity(mode, top)
            scale = max(1.0, float(np.max(np.abs(upper))))
            np.testing.assert_allclose(upper, fields.phi(mode, top), rtol=0, atol=1e-12 * scale)
            lower = fields.velocity(mode, bottom)
            np.testing.assert_allclose(lower, 0.0, rtol=0, atol=1e-12 * scale)

    def test_linearity(self):
        """Test that velocity, pressure and stress are linear in the motion."""
        points = random_neck_points(self.geom, self.rng, 200)
        motion = _random_motion(self.rng)
        for alpha in fields.admissible_modes(self.geom):
            mode = ModeField(alpha, self.geom, motion, self.fluid)
            doubled = mode.with_motion(motion.scaled(-2.5))
            for fn in (fields.velocity, fields.pressure, fields.stress):
                expected = -2.5 * fn(mode, points)
                atol = 1e-12 * float(np.max(np.abs(expected)))
                np.testing.assert_allclose(fn(doubled, points), expected, rtol=0, atol=atol,
                                           err_msg=f"{fn.__name__} mode {alpha}")


class TestPressure(TestCase):
    """Test cases for the mode pressures."""

    def setUp(self):
        """Set up test fixtures."""
        self.geom = GapGeometry(kappa=0.5, epsilon=1e-3, r=0.5)
        self.fluid = FluidParams()

    def test_shear_pressure_on_mid_plane(self):
        """Test that the shear pressure is odd in x3."""
        mode = ModeField(1, self.geom, RigidMotion(U=(1.0, 0.0, 0.0)), self.fluid)
        self.assertEqual(float(fields.pressure(mode, [0.1, 0.05, 0.0])), 0.0)

    def test_mode5_pressure_vanishes(self):
        """Test that mode 5 carries no pressure."""
        mode = ModeField(5, self.geom, RigidMotion(omega=(0.3, -0.2, 0.7)), self.fluid)
        points = random_neck_points(self.geom, np.random.default_rng(3), 50)
        np.testing.assert_array_equal(fields.pressure(mode, points), 0.0)

    def test_squeeze_pressure_at_apex(self):
        """Test the squeeze pressure against the closed-form radial integral."""
        eps, kappa, r = 1e-3, 0.5, 0.5
        mode = ModeField(3, self.geom, RigidMotion(U=(0.0, 0.0, 1.0)), self.fluid)
        x3 = 0.2 * eps
        expected = -6.0 * x3**2 / eps**3 - 3.0 / (4.0 * kappa) * (eps**-2 - (eps + 2.0 * kappa * r**2) ** -2)
        value = float(fields.pressure(mode, [0.0, 0.0, x3]))
        self.assertLess(abs(value - expected) / abs(expected), 1e-10)


class TestDerivatives(TestCase):
    """Test cases for gradients, divergence, residuals and stresses."""

    def setUp(self):
        """Set up test fixtures."""
        self.fluid = FluidParams(mu=1.3)
        self.rng = np.random.default_rng(11)

    def test_shear_gradient_at_apex(self):
        """Test d3 u1 = (U1 - omega2 R)/eps at the apex."""
        geom = GapGeometry(kappa=0.5, epsilon=1e-3)
        mode = ModeField(1, geom, RigidMotion(U=(1.0, 0.0, 0.0), omega=(0.0, 0.5, 0.0)), self.fluid)
        grad = fields.velocity_gradient(mode, [0.0, 0.0, 0.0]).grad
        self.assertAlmostEqual(float(grad[0, 2]) / (0.5 / 1e-3), 1.0, places=13)

    def test_shear_stress_at_apex(self):
        """Test sigma_13 = mu c (1/eps - kappa/2) at the apex."""
        geom = GapGeometry(kappa=0.5, epsilon=1e-3)
        mode = ModeField(1, geom, RigidMotion(U=(2.0, 0.0, 0.0)), self.fluid)
        sigma = fields.stress(mode, [0.0, 0.0, 0.0])
        expected = self.fluid.mu * 2.0 * (1.0 / 1e-3 - 0.25)
        self.assertAlmostEqual(float(sigma[0, 2]) / expected, 1.0, places=12)

    def test_gradient_matches_finite_differences(self):
        """Test the analytic gradient against central differences for m = 3."""
        geom = GapGeometry(m=3.0, kappa=1.0, epsilon=1e-3)
        points = random_neck_points(geom, self.rng, 200, radius_fraction=0.9, zeta_max=0.4)
        h = 1e-4 * geometry.delta(geom, points[:, :2]).value
        for alpha in (1, 2, 3):
            mode = ModeField(alpha, geom, RigidMotion(U=tuple(self.rng.normal(size=3))), self.fluid)
            analytic = fields.velocity_gradient(mode, points).grad
            numeric = np.empty_like(analytic)
            for k in range(3):
                shift = np.zeros_like(points)
                shift[:, k] = h
                upper = fields.velocity(mode, points + shift)
                lower = fields.velocity(mode, points - shift)
                numeric[:, :, k] = (upper - lower) / (2.0 * h[:, None])
            scale = np.max(np.abs(analytic), axis=(-2, -1))
            error = np.max(np.abs(numeric - analytic), axis=(-2, -1)) / scale
            self.assertLess(float(np.max(error)), 1e-6, msg=f"mode {alpha}")

    def test_incompressibility(self):
        """Test div u = 0 for modes 1..3 at m in {2, 3, 4} and mode 4 at m = 2."""
        cases = [(m, alpha) for m in (2.0, 3.0, 4.0) for alpha in (1, 2, 3)] + [(2.0, 4)]
        for m, alpha in cases:
            geom = GapGeometry(m=m, kappa=0.5, epsilon=1e-3)
            points = random_neck_points(geom, self.rng, 10_000)
            motion = _random_motion(self.rng) if m == 2.0 else RigidMotion(U=tuple(self.rng.normal(size=3)))
            mode = ModeField(alpha, geom, motion, self.fluid)
            grad = fields.velocity_gradient(mode, points).grad
            bound = 1e-8 * np.maximum(1.0, np.linalg.norm(grad, axis=(-2, -1)))
            self.assertTrue(np.all(np.abs(fields.divergence(mode, points)) <= bound), msg=f"m={m} mode {alpha}")

    def test_mode5_divergence_defect(self):
        """Test that the mode-5 divergence equals its closed form and vanishes without tilt."""
        geom = GapGeometry(kappa=0.5, epsilon=1e-3)
        points = random_neck_points(geom, self.rng, 1000)
        mode = ModeField(5, geom, RigidMotion(omega=(0.4, -0.7, 0.2)), self.fluid)
        defects = fields.mode5_defects(mode, points)
        np.testing.assert_allclose(fields.divergence(mode, points), defects.divergence,
                                   rtol=1e-8, atol=1e-8)
        spin = mode.with_motion(RigidMotion(omega=(0.0, 0.0, 1.0)))
        np.testing.assert_allclose(fields.divergence(spin, points), 0.0, atol=1e-10)

    def test_residual_identity(self):
        """Test mu d33 u - grad p against its closed form."""
        for m, alpha in [(2.0, a) for a in (1, 2, 3, 4)] + [(3.0, a) for a in (1, 2, 3)]:
            geom = GapGeometry(m=m, kappa=0.5, epsilon=1e-3)
            points = random_neck_points(geom, self.rng, 2000)
            motion = _random_motion(self.rng) if m == 2.0 else RigidMotion(U=(0.3, -1.1, 0.8))
            residual = fields.residual33(ModeField(alpha, geom, motion, self.fluid), points)
            size = float(np.max(np.abs(residual.computed)))
            change = float(np.max(np.abs(residual.computed - residual.closed_form)))
            self.assertLessEqual(change, 1e-8 * size, msg=f"m={m} mode {alpha}")

    def test_residual_examples(self):
        """Test the squeeze third component, the shear mid-plane and mode 5 without rotation."""
        geom = GapGeometry(kappa=0.5, epsilon=1e-3)
        points = random_neck_points(geom, self.rng, 100)
        squeeze = fields.residual33(ModeField(3, geom, RigidMotion(U=(0.0, 0.0, 1.0)), self.fluid), points)
        np.testing.assert_array_equal(squeeze.closed_form[:, 2], 0.0)
        mid = points.copy()
        mid[:, 2] = 0.0
        shear = fields.residual33(ModeField(1, geom, RigidMotion(U=(1.0, 0.0, 0.0)), self.fluid), mid)
        np.testing.assert_allclose(shear.closed_form[:, :2], 0.0, atol=1e-300)
        still = fields.residual33(ModeField(5, geom, RigidMotion(), self.fluid), points)
        np.testing.assert_array_equal(still.closed_form, 0.0)

    def test_stress_symmetry_and_zero_motion(self):
        """Test sigma = sigma^T and sigma = 0 for zero motion."""
        geom = GapGeometry(kappa=0.5, epsilon=1e-3)
        points = random_neck_points(geom, self.rng, 200)
        for alpha in fields.admissible_modes(geom):
            sigma = fields.stress(ModeField(alpha, geom, _random_motion(self.rng), self.fluid), points)
            np.testing.assert_array_equal(sigma, np.swapaxes(sigma, -1, -2))
            still = fields.stress(ModeField(alpha, geom, RigidMotion(), self.fluid), points)
            np.testing.assert_array_equal(still, 0.0)

    def test_strain_rate(self):
        """Test that strain_rate matches the symmetric part of the gradient."""
        geom = GapGeometry(kappa=0.5, epsilon=1e-3)
        points = random_neck_points(geom, self.rng, 50)
        mode = ModeField(4, geom, _random_motion(self.rng), self.fluid)
        np.testing.assert_array_equal(fields.strain_rate(mode, points),
                                      fields.velocity_gradient(mode, points).strain)
        self.assertEqual(fields.velocity_hessian(mode, points).shape, (50, 3, 3, 3))


class TestCorrectionConstants(TestCase):
    """Test cases for the undetermined-coefficient constants."""

    def test_kappa_one(self):
        """Test the constants at kappa = 1."""
        constants = fields.derive_correction_constants(1.0)
        self.assertEqual((constants.a1, constants.a2), (3.0, -2.0))
        np.testing.assert_allclose(
            [constants.b1, constants.b2, constants.b3, constants.b4], [-2.4, 0.3, 3.2, 0.6], rtol=1e-14
        )

    def test_kappa_half(self):
        """Test that b1 and b3 do not depend on kappa."""
        constants = fields.derive_correction_constants(0.5)
        np.testing.assert_allclose(
            [constants.b1, constants.b2, constants.b3, constants.b4], [-2.4, 0.6, 3.2, 1.2], rtol=1e-14
        )

    def test_kappa_domain(self):
        """Test that kappa <= 0 is rejected."""
        with self.assertRaises(DomainError):
            fields.derive_correction_constants(0.0)


class TestTestStress(TestCase):
    """Test cases for the dual test stresses."""

    def setUp(self):
        """Set up test fixtures."""
        self.geom = GapGeometry(kappa=0.5, epsilon=1e-2)
        self.fluid = FluidParams()
        self.rng = np.random.default_rng(5)
        self.points = random_neck_points(self.geom, self.rng, 12, radius_fraction=0.8, zeta_max=0.4)

    def test_mode5_is_zero(self):
        """Test that mode 5 uses the zero tensor."""
        mode = ModeField(5, self.geom, _random_motion(self.rng), self.fluid)
        np.testing.assert_array_equal(fields.test_stress(mode, self.points), 0.0)

    def test_shear_entries(self):
        """Test the (1, 3) entry mu c / delta of the mode-1 tensor."""
        motion = RigidMotion(U=(1.0, 0.0, 0.0), omega=(0.0, 0.25, 0.0))
        mode = ModeField(1, self.geom, motion, self.fluid)
        S = fields.test_stress(mode, self.points)
        gap = geometry.delta(self.geom, self.points[:, :2]).value
        np.testing.assert_allclose(S[:, 0, 2], 0.75 / gap, rtol=1e-15)
        np.testing.assert_array_equal(S, np.swapaxes(S, -1, -2))

    def test_shear_divergence(self):
        """Test that the mode-1 and mode-2 tensors are divergence free."""
        for alpha in (1, 2):
            mode = ModeField(alpha, self.geom, _random_motion(self.rng), self.fluid)
            self.assertLess(float(np.max(verify.test_stress_divergence(mode, self.points))), 1e-6)

    def test_closed_tensor_divergence(self):
        """Test that the mode-3 and mode-4 tensors are divergence free and symmetric."""
        for alpha in (3, 4):
            mode = ModeField(alpha, self.geom, _random_motion(self.rng), self.fluid)
            S = fields.test_stress(mode, self.points)
            np.testing.assert_array_equal(S, np.swapaxes(S, -1, -2))
            self.assertLess(float(np.max(verify.test_stress_divergence(mode, self.points))), 1e-6)

    def test_closure_starts_on_lower_surface(self):
        """Test that S - σ vanishes on x3 = -δ/2 and only touches the (k,3) entries."""
        for alpha in (3, 4):
            mode = ModeField(alpha, self.geom, _random_motion(self.rng), self.fluid)
            lower = _surface_points(self.geom, self.rng, 20, -0.5)
            upper = _surface_points(self.geom, self.rng, 20, 0.5)
            size = float(np.max(np.abs(fields.test_stress(mode, upper) - fields.stress(mode, upper))))
            self.assertGreater(size, 0.0)
            extra = fields.test_stress(mode, lower) - fields.stress(mode, lower)
            self.assertLess(float(np.max(np.abs(extra))), 1e-9 * size)
            inner = fields.test_stress(mode, self.points) - fields.stress(mode, self.points)
            np.testing.assert_array_equal(inner[:, :2, :2], 0.0)

    def test_closure_stays_in_the_gap(self):
        """Test that points above δ(0, x2)/2 near the rim keep a small correction."""
        geom = GapGeometry(kappa=0.5, epsilon=1e-4)
        mode = ModeField(3, geom, RigidMotion(U=(0.0, 0.0, 1.0)), self.fluid)
        xp = np.array([[0.4, 0.0], [0.3, 0.2], [-0.35, -0.1]])
        x = geometry.neck_point(geom, xp, np.full(3, 0.45))
        self.assertTrue(np.all(np.abs(x[:, 2]) > 0.5 * geometry.delta(geom, np.stack(
            [np.zeros(3), x[:, 1]], axis=-1)).value))
        sigma = fields.stress(mode, x)
        extra = fields.test_stress(mode, x) - sigma
        gap = geometry.delta(geom, xp).value
        # the correction is one power of δ below the shear stress
        ratio = np.abs(extra[:, :2, 2]).max(axis=-1) / np.abs(sigma[:, :2, 2]).max(axis=-1)
        self.assertTrue(np.all(ratio < 10.0 * gap / geom.r**2), msg=str(ratio))


if __name__ == "__main__":
    pytest.main([__file__])
