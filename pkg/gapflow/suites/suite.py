import logging
import math
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import special

from .. import asymptotics, fields, geometry, specfun, verify
from ..config import VerifySettings
from ..fields import FluidParams, ModeField, RigidMotion
from ..geometry import GapGeometry
from ..specfun import CoeffIndex
from ..verify import CheckResult, FitModel, SweepSpec, VerificationReport

logger = logging.getLogger(__name__)

TINY = 1e-300


def random_neck_points(
    geom: GapGeometry,
    rng: np.random.Generator,
    count: int,
    zeta=None,
    radius_fraction: float = 1.0,
    zeta_max: float = 0.5,
) -> np.ndarray:
    """Points uniform in the disk |x'| < radius_fraction·r at random or fixed rescaled height."""
    s = geom.r * radius_fraction * np.sqrt(rng.random(count))
    theta = 2.0 * np.pi * rng.random(count)
    xp = np.stack([s * np.cos(theta), s * np.sin(theta)], axis=-1)
    if zeta is None:
        zeta = rng.uniform(-zeta_max, zeta_max, count)
    return geometry.neck_point(geom, xp, np.broadcast_to(zeta, (count,)))


def _relative(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    size = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    change = float(np.max(np.abs(a - b)))
    return change / size if size > 0.0 else change


class Suite:
    """
    A named group of verification actions.

    Subclasses list their actions in ``ACTIONS`` (name -> description) and
    implement one method per action returning a VerificationReport.
    """

    NAME = "suite"
    ACTIONS: Dict[str, str] = {}
    # actions skipped unless requested explicitly
    ON_REQUEST: Sequence[str] = ()

    def __init__(self, settings: Optional[VerifySettings] = None):
        self._names = list(self.ACTIONS)
        self._description = (self.__doc__ or self.NAME).strip().splitlines()[0]
        self.settings = settings or VerifySettings()

    @property
    def name(self) -> str:
        return self.NAME

    def names(self) -> List[str]:
        return self._names

    def default_names(self) -> List[str]:
        return [name for name in self._names if name not in self.ON_REQUEST]

    def description(self) -> str:
        return self._description

    def names_and_description(self) -> str:
        return "\n".join(f"{self.NAME}.{name}: {self.ACTIONS[name]}" for name in self._names)

    def definition(self) -> List[dict]:
        return [
            {
                "suite": self.NAME,
                "action": name,
                "description": self.ACTIONS[name],
                "on_request": name in self.ON_REQUEST,
            }
            for name in self._names
        ]

    def run(self, action_name, **action_args) -> VerificationReport:
        if action_name in self._names:
            return getattr(self, action_name)(**action_args)
        else:
            raise ValueError(f"Invalid action name: {action_name}")

    def check(
        self,
        name: str,
        value: Optional[float],
        threshold: Optional[float] = None,
        passed: Optional[bool] = None,
        informational: bool = False,
        detail: str = "",
    ) -> CheckResult:
        """CheckResult passing when value <= threshold unless ``passed`` is given."""
        if value is not None:
            value = float(value)
        if passed is None:
            passed = value is not None and threshold is not None and math.isfinite(value) and (
                value <= threshold
            )
        return CheckResult(self.NAME, name, bool(passed), value, threshold, informational, detail)

    def rng(self, offset: int = 0) -> np.random.Generator:
        return np.random.default_rng(self.settings.seed + offset)

    @property
    def fluid(self) -> FluidParams:
        return self.settings.fluid()


class IdentitySuite(Suite):
    """Exact identities of the constructed fields and closed forms."""

    NAME = "identities"
    ACTIONS = {
        "boundary_values": "velocity equals phi on the upper surface and 0 on the lower one",
        "incompressibility": "div u = 0 at random neck points",
        "residuals": "mu d33 u - grad p equals its closed form",
        "constants": "solved correction constants equal their closed forms",
        "theorem": "closed-form statements agree with the mode sums",
        "linearity": "fields are linear in the motion and forces linear in mu",
        "quadratic_scaling": "primal and dual energies scale quadratically with the motion",
        "test_stress": "test stresses are symmetric and divergence free",
    }

    COMBINATIONS = ((2.0, (1, 2, 3, 4, 5)), (3.0, (1, 2, 3)), (4.0, (1, 2, 3)))

    def _motion(self, rng: np.random.Generator, m: float, alpha: int) -> RigidMotion:
        U = tuple(rng.normal(size=3))
        if m != 2.0:
            return RigidMotion(U=U)
        if alpha == 5:
            return RigidMotion(U=U, omega=(0.0, 0.0, float(rng.normal())))
        return RigidMotion(U=U, omega=tuple(rng.normal(size=3)))

    def boundary_values(self) -> VerificationReport:
        report = VerificationReport()
        rng = self.rng(1)
        count = self.settings.boundary_points
        for m, modes in self.COMBINATIONS:
            geom = self.settings.geometry(m)
            for alpha in modes:
                mode = ModeField(alpha, geom, self._motion(rng, m, alpha), self.fluid)
                top = random_neck_points(geom, rng, count, zeta=0.5)
                bottom = random_neck_points(geom, rng, count, zeta=-0.5)
                target = fields.phi(mode, top)
                scale = max(1.0, float(np.max(np.abs(target))))
                top_error = float(np.max(np.abs(fields.velocity(mode, top) - target))) / scale
                bottom_error = float(np.max(np.abs(fields.velocity(mode, bottom)))) / scale
                report.checks.append(self.check(f"top_m{m:g}_mode{alpha}", top_error, 1e-8))
                report.checks.append(self.check(f"bottom_m{m:g}_mode{alpha}", bottom_error, 1e-8))
        return report

    def incompressibility(self) -> VerificationReport:
        report = VerificationReport()
        rng = self.rng(2)
        count = self.settings.identity_points
        for m, modes in self.COMBINATIONS:
            geom = self.settings.geometry(m)
            for alpha in modes:
                mode = ModeField(alpha, geom, self._motion(rng, m, alpha), self.fluid)
                x = random_neck_points(geom, rng, count)
                grad = fields.velocity_gradient(mode, x).grad
                size = np.maximum(1.0, np.max(np.abs(grad), axis=(-2, -1)))
                value = float(np.max(np.abs(fields.divergence(mode, x)) / size))
                report.residuals[f"divergence_m{m:g}_mode{alpha}"] = value
                report.checks.append(self.check(f"divergence_m{m:g}_mode{alpha}", value, 1e-8))

        # general rotation: mode 5 carries a known divergence defect
        geom = self.settings.geometry(2.0)
        mode = ModeField(5, geom, RigidMotion(U=(0.0, 0.0, 0.0), omega=(0.3, 0.2, 0.5)), self.fluid)
        x = random_neck_points(geom, rng, count)
        measured = fields.divergence(mode, x)
        defect = fields.mode5_defects(mode, x).divergence
        report.checks.append(
            self.check("mode5_divergence_defect_closed_form", _relative(measured, defect), 1e-8)
        )
        report.checks.append(
            self.check(
                "mode5_divergence_defect_size", float(np.max(np.abs(measured))),
                informational=True, passed=True,
                detail="nonzero unless omega1 = omega2 = 0",
            )
        )
        return report

    def residuals(self) -> VerificationReport:
        report = VerificationReport()
        rng = self.rng(3)
        count = self.settings.identity_points
        for m, modes in self.COMBINATIONS:
            geom = self.settings.geometry(m)
            for alpha in modes:
                mode = ModeField(alpha, geom, self._motion(rng, m, alpha), self.fluid)
                x = random_neck_points(geom, rng, count)
                residual = fields.residual33(mode, x)
                d33 = fields.velocity_gradient(mode, x).d33
                size = np.maximum(
                    np.max(np.abs(mode.fluid.mu * d33), axis=-1),
                    np.max(np.abs(residual.computed - mode.fluid.mu * d33), axis=-1),
                )
                error = np.max(np.abs(residual.computed - residual.closed_form), axis=-1)
                value = float(np.max(error / np.maximum(size, TINY)))
                report.residuals[f"residual_m{m:g}_mode{alpha}"] = value
                report.checks.append(self.check(f"residual_m{m:g}_mode{alpha}", value, 1e-8))

        geom = self.settings.geometry(2.0)
        mode = ModeField(5, geom, RigidMotion(omega=(0.3, 0.2, 0.5)), self.fluid)
        x = random_neck_points(geom, rng, count)
        residual = fields.residual33(mode, x)
        defect = fields.mode5_defects(mode, x).residual
        measured = residual.computed - residual.closed_form
        report.checks.append(
            self.check("mode5_residual_defect_closed_form", _relative(measured, defect), 1e-8)
        )
        report.checks.append(
            self.check(
                "mode5_residual_defect_size", float(np.max(np.abs(measured))),
                informational=True, passed=True,
                detail="nonzero unless omega1 = omega2 = 0",
            )
        )
        return report

    def constants(self) -> VerificationReport:
        report = VerificationReport()
        for kappa in (0.5, 1.0, 2.0):
            solved = fields.derive_correction_constants(kappa)
            expected = (3.0, -2.0, -12.0 / 5.0, 3.0 / (10.0 * kappa), 16.0 / 5.0, 3.0 / (5.0 * kappa))
            actual = (solved.a1, solved.a2, solved.b1, solved.b2, solved.b3, solved.b4)
            report.checks.append(
                self.check(f"constants_kappa{kappa:g}", _relative(actual, expected), 1e-14)
            )
        return report

    def theorem(self) -> VerificationReport:
        report = VerificationReport()
        rng = self.rng(5)
        for m in (2.0, 3.0, 4.0):
            geom = self.settings.geometry(m, epsilon=1e-4)
            for trial in range(3):
                motion = RigidMotion(U=tuple(rng.normal(size=3)))
                result = asymptotics.theorem_force_torque("ii", geom, motion, self.fluid)
                report.checks.append(
                    self.check(f"case_ii_m{m:g}_{trial}", result.relative, 1e-12)
                )

        geom = self.settings.geometry(2.0, epsilon=1e-4)
        for trial in range(3):
            motion = RigidMotion(U=tuple(rng.normal(size=3)))
            result = asymptotics.theorem_force_torque("i", geom, motion, self.fluid)
            report.checks.append(self.check(f"case_i_without_rotation_{trial}", result.relative, 1e-12))

        kappa, R, mu = geom.kappa, geom.R, self.fluid.mu
        tilt = math.pi * mu * (10.0 * kappa * R - 3.0) / (20.0 * kappa**2) * abs(math.log(geom.epsilon))
        for trial in range(3):
            motion = RigidMotion(U=tuple(rng.normal(size=3)), omega=tuple(rng.normal(size=3)))
            result = asymptotics.theorem_force_torque("i", geom, motion, self.fluid)
            scale = float(np.max(np.abs(result.mode_sum.vector())))
            torque = float(np.max(np.abs(result.torque_diff))) / scale
            report.checks.append(self.check(f"case_i_torque_{trial}", torque, 1e-12))
            # the theorem's ω×e3 force term has the opposite sign of the mode sum
            expected = -2.0 * tilt * np.cross(motion.rotation, [0.0, 0.0, 1.0])
            report.checks.append(
                self.check(
                    f"case_i_rotation_force_diff_{trial}",
                    float(np.max(np.abs(result.force_diff - expected))) / scale, 1e-10,
                    detail="theorem minus mode sum equals -2c|ln eps|(omega x e3)",
                )
            )
            report.checks.append(
                self.check(
                    f"case_i_rotation_relative_{trial}", result.relative,
                    informational=True, passed=True,
                )
            )

        # leading-order modes give no reciprocal (symmetric) resistance matrix
        matrix = asymptotics.resistance_matrix(geom, self.fluid)
        report.checks.append(
            self.check("resistance_asymmetry", _relative(matrix, matrix.T), informational=True, passed=True)
        )
        return report

    def linearity(self) -> VerificationReport:
        report = VerificationReport()
        rng = self.rng(6)
        geom = self.settings.geometry(2.0)
        motion = RigidMotion(U=tuple(rng.normal(size=3)), omega=tuple(rng.normal(size=3)))
        factor = -1.75
        x = random_neck_points(geom, rng, 200)
        for alpha in fields.admissible_modes(geom):
            mode = ModeField(alpha, geom, motion, self.fluid)
            scaled = mode.with_motion(motion.scaled(factor))
            for label, fn in (("velocity", fields.velocity), ("pressure", fields.pressure),
                              ("stress", fields.stress)):
                value = _relative(fn(scaled, x), factor * fn(mode, x))
                report.checks.append(self.check(f"{label}_mode{alpha}", value, 1e-12))

        base = asymptotics.total_force_torque(geom, motion, self.fluid)
        thick = asymptotics.total_force_torque(geom, motion, FluidParams(mu=3.0 * self.fluid.mu))
        report.checks.append(
            self.check("force_viscosity", _relative(thick.vector(), 3.0 * base.vector()), 1e-12)
        )
        matrix = asymptotics.resistance_matrix(geom, self.fluid)
        vectors = rng.normal(size=(20, 6))
        errors = [
            _relative(
                matrix @ v,
                asymptotics.total_force_torque(geom, RigidMotion.from_vector(v), self.fluid).vector(),
            )
            for v in vectors
        ]
        report.checks.append(self.check("resistance_matrix", max(errors), 1e-12))
        return report

    def quadratic_scaling(self) -> VerificationReport:
        report = VerificationReport()
        geom = self.settings.geometry(2.0)
        motion = self.settings.gap_motion()
        factor = 2.5
        tol = self.settings.quad_tol
        primal = verify.energy_primal((1, 2, 3), geom, motion, self.fluid, tol)
        primal_scaled = verify.energy_primal((1, 2, 3), geom, motion.scaled(factor), self.fluid, tol)
        dual = verify.energy_dual((1, 2, 5), geom, motion, self.fluid, tol)
        dual_scaled = verify.energy_dual((1, 2, 5), geom, motion.scaled(factor), self.fluid, tol)
        report.checks.append(
            self.check("primal", abs(primal_scaled - factor**2 * primal) / abs(primal_scaled), 1e-10)
        )
        report.checks.append(
            self.check("dual", abs(dual_scaled - factor**2 * dual) / abs(dual_scaled), 1e-10)
        )
        zero = verify.energy_primal((1, 2, 3), geom, RigidMotion(), self.fluid, tol)
        report.checks.append(self.check("primal_zero_motion", abs(zero), 0.0))
        return report

    def test_stress(self) -> VerificationReport:
        report = VerificationReport()
        rng = self.rng(8)
        geom = self.settings.geometry(2.0, epsilon=1e-2)
        motion = RigidMotion(U=tuple(rng.normal(size=3)), omega=tuple(rng.normal(size=3)))
        x = random_neck_points(geom, rng, self.settings.stress_points,
                               radius_fraction=0.8, zeta_max=0.4)
        for alpha in (1, 2, 3, 4, 5):
            mode = ModeField(alpha, geom, motion, self.fluid)
            S = fields.test_stress(mode, x)
            symmetry = _relative(S, np.swapaxes(S, -1, -2))
            report.checks.append(self.check(f"symmetry_mode{alpha}", symmetry, 1e-14))
            if alpha == 5:
                report.checks.append(
                    self.check("zero_mode5", float(np.max(np.abs(S))), 0.0)
                )
                continue
            divergence = float(np.max(verify.test_stress_divergence(mode, x)))
            report.residuals[f"test_stress_divergence_mode{alpha}"] = divergence
            report.checks.append(self.check(f"divergence_mode{alpha}", divergence, 1e-6))
        return report


class OracleSuite(Suite):
    """Independent cross-checks of the special functions and derivatives."""

    NAME = "oracles"
    ACTIONS = {
        "neck_integrals": "neck integrals against closed-form antiderivatives for m = 2",
        "beta_limit": "neck integrals against their Beta-function limits for m = 3",
        "scaling_law": "halving epsilon scales the neck integrals by 2^(i - j/m)",
        "gamma": "Gamma reflection formula and the log-branch coefficients",
        "gradients": "analytic gradients against central finite differences",
    }

    @staticmethod
    def _closed_form(i: int, geom: GapGeometry) -> float:
        eps, a, r = geom.epsilon, 2.0 * geom.kappa, geom.r
        if i == 1:
            return math.log((eps + a * r**2) / eps) / (2.0 * a)
        v0, v1 = eps, eps + a * r**2

        def antiderivative(v):
            return -1.0 / v + eps / (2.0 * v**2)

        return (antiderivative(v1) - antiderivative(v0)) / (2.0 * a**2)

    def neck_integrals(self) -> VerificationReport:
        report = VerificationReport()
        for eps in self.settings.coefficient_epsilons:
            geom = self.settings.geometry(2.0, epsilon=eps)
            for i, j in ((1, 2), (3, 4)):
                value = specfun.neck_scalar_integral(i, j, geom)
                error = abs(value - self._closed_form(i, geom)) / abs(value)
                report.checks.append(self.check(f"closed_form_{i}{j}_eps{eps:g}", error, 1e-8))
        return report

    def beta_limit(self) -> VerificationReport:
        report = VerificationReport()
        m = 3.0
        geom = self.settings.geometry(m, epsilon=1e-6)
        for i, j in ((1, 2), (3, 4)):
            value = specfun.neck_scalar_integral(i, j, geom)
            limit = (
                special.beta(j / m, i - j / m) / m
                * (2.0 * geom.kappa) ** (-j / m) * geom.epsilon ** (j / m - i)
            )
            report.checks.append(self.check(f"beta_{i}{j}", abs(value / limit - 1.0), 0.02))
        return report

    def scaling_law(self) -> VerificationReport:
        report = VerificationReport()
        for m in (2.0, 3.0):
            geom = self.settings.geometry(m, epsilon=1e-6)
            half = geom.with_epsilon(0.5 * geom.epsilon)
            for idx in CoeffIndex:
                a = specfun.exponent(idx, m)
                if specfun.is_log_branch(idx, m):
                    continue
                ratio = specfun.neck_scalar_integral(idx.i, idx.j, half) / specfun.neck_scalar_integral(
                    idx.i, idx.j, geom
                )
                report.checks.append(
                    self.check(f"ratio_{idx.tag}_m{m:g}", abs(ratio / 2.0**a - 1.0), 0.02)
                )
        return report

    def gamma(self) -> VerificationReport:
        report = VerificationReport()
        for s in (0.1, 0.25, 0.5, 0.75, 0.9):
            product = specfun.gamma_fn(s) * specfun.gamma_fn(1.0 - s)
            report.checks.append(
                self.check(f"reflection_{s:g}", abs(product * math.sin(math.pi * s) / math.pi - 1.0), 1e-12)
            )
        kappa = self.settings.kappa
        shear = specfun.gamma_coeff(CoeffIndex.SHEAR, 2.0, kappa)
        squeeze = specfun.gamma_coeff(CoeffIndex.SQUEEZE, 2.0, kappa)
        report.checks.append(self.check("shear_m2", abs(shear * 4.0 * kappa - 1.0), 1e-14))
        report.checks.append(self.check("squeeze_m2", abs(squeeze * 8.0 * kappa**2 - 1.0), 1e-14))
        return report

    def gradients(self) -> VerificationReport:
        report = VerificationReport()
        rng = self.rng(11)
        for m in (2.0, 3.0):
            geom = self.settings.geometry(m)
            x = random_neck_points(geom, rng, 50, radius_fraction=0.9, zeta_max=0.45)
            gap = geometry.delta(geom, x[:, :2])
            h = 1e-4 * gap.value

            fd = np.empty(gap.grad.shape)
            for k in range(2):
                step = np.zeros((x.shape[0], 2))
                step[:, k] = h
                fd[:, k] = (
                    geometry.delta(geom, x[:, :2] + step).value - geometry.delta(geom, x[:, :2] - step).value
                ) / (2.0 * h)
            report.checks.append(self.check(f"delta_gradient_m{m:g}", _relative(fd, gap.grad), 1e-6))

            modes = fields.admissible_modes(geom)
            motion = RigidMotion(U=tuple(rng.normal(size=3)),
                                 omega=tuple(rng.normal(size=3)) if m == 2.0 else (0.0, 0.0, 0.0))
            for alpha in modes:
                mode = ModeField(alpha, geom, motion, self.fluid)
                grad = fields.velocity_gradient(mode, x).grad
                fd = np.empty(grad.shape)
                for k in range(3):
                    step = np.zeros_like(x)
                    step[:, k] = h
                    fd[:, :, k] = (fields.velocity(mode, x + step) - fields.velocity(mode, x - step)) / (
                        2.0 * h[:, None]
                    )
                scale = np.max(np.abs(grad), axis=(-2, -1))
                error = np.max(np.abs(fd - grad), axis=(-2, -1)) / np.maximum(scale, TINY)
                report.checks.append(
                    self.check(f"velocity_gradient_m{m:g}_mode{alpha}", float(np.max(error)), 1e-6)
                )
        return report


class CoefficientSuite(Suite):
    """Leading coefficients recovered from traction and energy quadratures."""

    NAME = "coefficients"
    ACTIONS = {
        "squeeze_m2": "mode 3, m = 2: 1/eps coefficient of the e3 force",
        "squeeze_m3": "mode 3, m = 3: exponent and coefficient of the e3 force",
        "shear_m2": "mode 1, m = 2: log coefficients of the e1 force and e2 torque",
        "rotation_m2": "mode 4, m = 2: log coefficients of the horizontal force",
        "energy_rates": "blow-up rates of the primal and dual energies",
    }

    PARITY = 1e-10
    # |ln ε| coefficient of the mode-4 force, relative to the closed-form coefficient
    LOG_CANCELLATION = 0.05

    def _series(self, report: VerificationReport, alpha: int, m: float, motion: RigidMotion,
                sweep: SweepSpec) -> List[verify.Traction]:
        series = []
        for eps in sweep.epsilons:
            mode = ModeField(alpha, self.settings.geometry(m, epsilon=eps), motion, self.fluid)
            traction = verify.traction_quadrature(mode, sweep.quad_tol)
            report.traction.append({
                "mode": alpha,
                "m": m,
                "epsilon": eps,
                "F": traction.F.tolist(),
                "T": traction.T.tolist(),
                "level": traction.level,
                "error": traction.error,
            })
            series.append(traction)
        report.epsilons = list(sweep.epsilons)
        return series

    def _parity(self, report: VerificationReport, label: str, series, zero_force, zero_torque,
                scale_of) -> None:
        worst = 0.0
        for traction in series:
            scale = scale_of(traction)
            values = [traction.F[k] for k in zero_force] + [traction.T[k] for k in zero_torque]
            worst = max(worst, max(abs(v) for v in values) / scale)
        report.checks.append(self.check(f"{label}_parity", worst, self.PARITY))

    def _coefficient(self, report: VerificationReport, label: str, record: verify.FitRecord,
                     predicted: float, tolerance: float, informational: bool = False) -> None:
        report.fits[label] = record
        error = abs(record.A - predicted) / abs(predicted)
        report.checks.append(
            self.check(
                label, error, tolerance, informational=informational,
                passed=True if informational else None,
                detail=f"measured {record.A:.10g}, closed form {predicted:.10g}",
            )
        )

    def squeeze_m2(self) -> VerificationReport:
        report = VerificationReport()
        sweep = self.settings.coefficient_sweep()
        motion = RigidMotion(U=(0.0, 0.0, 1.0))
        series = self._series(report, 3, 2.0, motion, sweep)
        values = [t.F[2] for t in series]
        record = verify.exponent_fit(sweep, values, exponent=1.0, model=FitModel.POWER_PLUS_LOG)
        predicted = -3.0 * math.pi * self.fluid.mu * specfun.gamma_coeff(
            CoeffIndex.SQUEEZE, 2.0, self.settings.kappa)
        self._coefficient(report, "squeeze_m2", record, predicted, 0.01)
        self._parity(report, "squeeze_m2", series, (0, 1), (0, 1, 2), lambda t: abs(t.F[2]))
        return report

    def squeeze_m3(self) -> VerificationReport:
        report = VerificationReport()
        sweep = self.settings.coefficient_sweep()
        motion = RigidMotion(U=(0.0, 0.0, 1.0))
        series = self._series(report, 3, 3.0, motion, sweep)
        values = [t.F[2] for t in series]
        free = verify.exponent_fit(sweep, values, model=FitModel.POWER)
        report.fits["squeeze_m3_exponent"] = free
        expected = specfun.exponent(CoeffIndex.SQUEEZE, 3.0)
        report.checks.append(
            self.check("squeeze_m3_exponent", abs(free.p - expected), 0.05,
                       detail=f"measured p {free.p:.6g}, expected {expected:.6g}")
        )
        fixed = verify.exponent_fit(sweep, values, exponent=expected, model=FitModel.POWER)
        predicted = -3.0 * math.pi * self.fluid.mu * specfun.gamma_coeff(
            CoeffIndex.SQUEEZE, 3.0, self.settings.kappa)
        self._coefficient(report, "squeeze_m3", fixed, predicted, 0.02)
        self._parity(report, "squeeze_m3", series, (0, 1), (0, 1, 2), lambda t: abs(t.F[2]))
        return report

    def shear_m2(self) -> VerificationReport:
        report = VerificationReport()
        sweep = self.settings.coefficient_sweep()
        motion = RigidMotion(U=(1.0, 0.0, 0.0))
        series = self._series(report, 1, 2.0, motion, sweep)
        mu, R = self.fluid.mu, self.settings.R
        g12 = specfun.gamma_coeff(CoeffIndex.SHEAR, 2.0, self.settings.kappa)
        c = motion.U[0] - motion.omega[1] * R
        force = verify.exponent_fit(sweep, [t.F[0] for t in series], model=FitModel.LOG_PLUS_CONST)
        torque = verify.exponent_fit(sweep, [t.T[1] for t in series], model=FitModel.LOG_PLUS_CONST)
        self._coefficient(report, "shear_m2_force", force, -2.0 * math.pi * mu * c * g12, 0.05)
        self._coefficient(report, "shear_m2_torque", torque, 2.0 * math.pi * mu * R * c * g12, 0.05)
        self._parity(report, "shear_m2", series, (1, 2), (0, 2), lambda t: abs(t.F[0]))
        return report

    def rotation_m2(self) -> VerificationReport:
        report = VerificationReport()
        sweep = self.settings.coefficient_sweep()
        motion = RigidMotion(omega=(1.0, 1.0, 0.0))
        series = self._series(report, 4, 2.0, motion, sweep)
        mu, kappa = self.fluid.mu, self.settings.kappa
        factor = 3.0 * math.pi * mu * specfun.gamma_coeff(CoeffIndex.SHEAR, 2.0, kappa) / (5.0 * kappa)
        for k, predicted in ((0, -factor * motion.omega[1]), (1, factor * motion.omega[0])):
            record = verify.exponent_fit(sweep, [t.F[k] for t in series], model=FitModel.LOG_PLUS_CONST)
            self._coefficient(report, f"rotation_m2_F{k + 1}", record, predicted, 0.05,
                              informational=True)
            # b1, b2 and b4 contributions to the |ln ε| term sum to zero
            report.checks.append(
                self.check(
                    f"rotation_m2_F{k + 1}_log_cancels", abs(record.A) / abs(predicted),
                    self.LOG_CANCELLATION,
                    detail=f"measured {record.A:.10g} against closed-form scale {predicted:.10g}",
                )
            )
        return report

    def energy_rates(self) -> VerificationReport:
        report = VerificationReport()
        sweep = self.settings.coefficient_sweep()
        tol = sweep.quad_tol
        squeeze = RigidMotion(U=(0.0, 0.0, 1.0))
        primal = [
            verify.energy_primal((3,), self.settings.geometry(2.0, epsilon=eps), squeeze, self.fluid, tol)
            for eps in sweep.epsilons
        ]
        record = verify.exponent_fit(sweep, primal, model=FitModel.POWER)
        report.fits["energy_primal_squeeze_m2"] = record
        report.checks.append(self.check("energy_primal_squeeze_rate", abs(record.p - 1.0), 0.1))

        shear = RigidMotion(U=(1.0, 0.0, 0.0))
        primal = []
        dual = []
        for eps in sweep.epsilons:
            geom = self.settings.geometry(2.0, epsilon=eps)
            primal.append(verify.energy_primal((1,), geom, shear, self.fluid, tol))
            dual.append(verify.energy_dual((1,), geom, shear, self.fluid, tol))
        primal_fit = verify.exponent_fit(sweep, primal, model=FitModel.LOG_PLUS_CONST)
        dual_fit = verify.exponent_fit(sweep, dual, model=FitModel.LOG_PLUS_CONST)
        report.fits["energy_primal_shear_m2"] = primal_fit
        report.fits["energy_dual_shear_m2"] = dual_fit
        report.checks.append(
            self.check("energy_dual_tracks_primal", abs(dual_fit.A / primal_fit.A - 1.0), 0.1)
        )
        return report


class DominanceSuite(Suite):
    """The squeeze force dominates the shear force as the gap closes."""

    NAME = "dominance"
    ACTIONS = {
        "closed_form": "|F3|/|F1| from the closed forms at the smallest gap",
        "quadrature": "|F3|/|F1| from traction quadrature at the smallest gap",
        "monotonicity": "leading coefficients grow as the gap closes",
    }

    RATIO = 10.0

    def _geometry(self) -> GapGeometry:
        return self.settings.geometry(2.0, epsilon=self.settings.dominance_epsilon)

    def closed_form(self) -> VerificationReport:
        report = VerificationReport()
        total = asymptotics.total_force_torque(
            self._geometry(), RigidMotion(U=(1.0, 1.0, 1.0)), self.fluid
        )
        ratio = abs(total.F[2]) / abs(total.F[0])
        report.checks.append(self.check("closed_form_ratio", ratio, self.RATIO, passed=ratio >= self.RATIO))
        return report

    def quadrature(self) -> VerificationReport:
        report = VerificationReport()
        geom = self._geometry()
        motion = RigidMotion(U=(1.0, 1.0, 1.0))
        force = np.zeros(3)
        for alpha in (1, 2, 3):
            traction = verify.traction_quadrature(ModeField(alpha, geom, motion, self.fluid),
                                                  self.settings.quad_tol)
            force += traction.F
        ratio = abs(force[2]) / abs(force[0])
        report.checks.append(self.check("quadrature_ratio", ratio, self.RATIO, passed=ratio >= self.RATIO))
        return report

    def monotonicity(self) -> VerificationReport:
        report = VerificationReport()
        epsilons = np.logspace(-2, -8, 25)
        for m in (2.0, 3.0, 4.0):
            geom = self.settings.geometry(m, epsilon=epsilons[0])
            for idx in CoeffIndex:
                if specfun.exponent(idx, m) < 0.0:
                    continue
                values = [asymptotics.leading_factor(geom.with_epsilon(e), idx) for e in epsilons]
                steps = np.diff(np.abs(values))
                report.checks.append(
                    self.check(f"{idx.tag}_m{m:g}", float(np.min(steps)), 0.0,
                               passed=bool(np.all(steps >= 0.0)))
                )
        return report


class DualityGapSuite(Suite):
    """Boundedness of the duality gap between the primal and dual energies."""

    NAME = "duality_gap"
    ACTIONS = {
        "boundedness": "log-log slopes of every gap cell over the default eps ladder",
        "zero_motion": "the gap vanishes for a particle at rest",
        "extended_cells": "the same slopes over a ladder down to eps = 1e-6",
    }
    ON_REQUEST = ("extended_cells",)

    SLOPE = -0.05

    def _sweep(self, sweep: SweepSpec) -> VerificationReport:
        geom = self.settings.geometry(2.0, epsilon=sweep.epsilons[0])
        return verify.duality_gap_sweep(
            sweep, geom, self.settings.gap_motion(), self.fluid, self.settings.gap_modes
        )

    def _assess(self, report: VerificationReport) -> VerificationReport:
        modes = report.gap[0].modes
        for a_index, a in enumerate(modes):
            for b in modes[a_index:]:
                slope = report.slopes.get(f"{a},{b}")
                if slope is None:
                    report.checks.append(
                        self.check(f"slope_{a}{b}", None, self.SLOPE, passed=True, informational=True,
                                   detail="zero by parity")
                    )
                    continue
                report.checks.append(
                    self.check(f"slope_{a}{b}", slope, self.SLOPE, passed=slope >= self.SLOPE)
                )
        if 5 in modes:
            index = modes.index(5)
            finite = all(math.isfinite(t.ell[index, index]) for t in report.gap)
            report.checks.append(self.check("mode5_diagonal_finite", None, passed=finite))
        return report

    def boundedness(self) -> VerificationReport:
        return self._assess(self._sweep(self.settings.gap_sweep()))

    def zero_motion(self) -> VerificationReport:
        report = VerificationReport()
        geom = self.settings.geometry(2.0, epsilon=self.settings.gap_epsilons[0])
        table = verify.gap_table(geom, RigidMotion(), self.fluid, self.settings.gap_modes,
                                 self.settings.quad_tol, max_level=1)
        report.checks.append(self.check("zero_motion", float(np.max(np.abs(table.ell))), 0.0))
        return report

    def extended_cells(self) -> VerificationReport:
        return self._assess(self._sweep(self.settings.gap_extended_sweep()))


DEFAULT_SUITES = (IdentitySuite, OracleSuite, CoefficientSuite, DominanceSuite, DualityGapSuite)


def default_suites(settings: Optional[VerifySettings] = None) -> List[Suite]:
    return [suite(settings) for suite in DEFAULT_SUITES]
