"""
Explicit singular fields in the neck.

The motion of the upper particle is split into five modes α = 1..5 (two
shears, squeeze, rotation about horizontal axes, remaining rotation). Each
mode carries a boundary datum φ_α, a correction 𝓕_α, a Keller-type velocity
ū^(α) = φ_α(1/2 + 𝔊) + (𝔊² - 1/4)𝓕_α, a pressure p̄^(α) and a dual test
stress S̄^(α). Modes 4 and 5 exist only for m = 2.

Point arguments have shape (..., 3); results keep the leading shape.
"""

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from . import expressions, geometry, specfun
from .errors import DomainError, ModeError
from .geometry import GapGeometry

logger = logging.getLogger(__name__)

# stand-in for x' = 0 when |x'|^(m-k) is not polynomial
APEX_OFFSET = 1e-150


class RigidMotion(BaseModel):
    """Translational velocity U and angular velocity ω of the upper particle."""

    model_config = ConfigDict(frozen=True)

    U: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    omega: Tuple[float, float, float] = (0.0, 0.0, 0.0)

    @field_validator("U", "omega")
    @classmethod
    def _finite(cls, value):
        if not all(math.isfinite(v) for v in value):
            raise ValueError("motion components must be finite")
        return value

    @property
    def translation(self) -> np.ndarray:
        return np.array(self.U, dtype=float)

    @property
    def rotation(self) -> np.ndarray:
        return np.array(self.omega, dtype=float)

    @property
    def is_rotating(self) -> bool:
        return any(w != 0.0 for w in self.omega)

    @property
    def is_zero(self) -> bool:
        return not self.is_rotating and all(u == 0.0 for u in self.U)

    def scaled(self, factor: float) -> "RigidMotion":
        return RigidMotion(
            U=tuple(factor * u for u in self.U),
            omega=tuple(factor * w for w in self.omega),
        )

    @classmethod
    def from_vector(cls, vector) -> "RigidMotion":
        """Motion from the stacked 6-vector (U1, U2, U3, ω1, ω2, ω3)."""
        v = [float(c) for c in vector]
        return cls(U=tuple(v[:3]), omega=tuple(v[3:]))


class FluidParams(BaseModel):
    """Dynamic viscosity of the fluid."""

    model_config = ConfigDict(frozen=True)

    mu: float = 1.0

    @field_validator("mu")
    @classmethod
    def _positive(cls, value):
        if not value > 0.0:
            raise ValueError("viscosity mu must be positive")
        return value


@dataclass(frozen=True)
class CorrectionConstants:
    a1: float
    a2: float
    b1: float
    b2: float
    b3: float
    b4: float


@dataclass(frozen=True)
class ModeField:
    """
    One decomposition mode of a given geometry, motion and fluid.

    Raises:
        ModeError: for α outside 1..5 or α in {4, 5} with m != 2
    """

    alpha: int
    geometry: GapGeometry
    motion: RigidMotion
    fluid: FluidParams

    def __post_init__(self):
        if self.alpha not in expressions.MODES:
            raise ModeError(f"mode index {self.alpha} is not in 1..5")
        if self.alpha in expressions.QUADRATIC_ONLY_MODES and not self.geometry.is_quadratic:
            raise ModeError(
                f"mode {self.alpha} is only defined for m = 2, got m = {self.geometry.m}"
            )

    @property
    def params(self) -> tuple:
        g = self.geometry
        return (g.epsilon, g.kappa, g.R, self.fluid.mu) + tuple(self.motion.U) + tuple(
            self.motion.omega
        )

    @property
    def kernel(self) -> expressions.CompiledMode:
        m = 2.0 if self.geometry.is_quadratic else self.geometry.m
        return expressions.compiled_mode(self.alpha, m)

    def with_motion(self, motion: RigidMotion) -> "ModeField":
        return ModeField(self.alpha, self.geometry, motion, self.fluid)


def admissible_modes(geom: GapGeometry) -> Tuple[int, ...]:
    """Modes defined for this geometry."""
    return expressions.MODES if geom.is_quadratic else (1, 2, 3)


class VelocityGradient(NamedTuple):
    grad: np.ndarray
    strain: np.ndarray
    d33: np.ndarray


class Residual(NamedTuple):
    computed: np.ndarray
    closed_form: np.ndarray


class Mode5Defects(NamedTuple):
    divergence: np.ndarray
    residual: np.ndarray


def _points(mode: ModeField, x, check: bool = True) -> np.ndarray:
    x = np.array(x, dtype=float)
    if x.shape[-1] != 3:
        raise DomainError(f"points need a trailing axis of length 3, got {x.shape}")
    if check and not np.all(geometry.contains(mode.geometry, x)):
        raise DomainError("point lies outside the neck region Ω_r")
    if not mode.kernel.smooth_at_apex:
        apex = (x[..., 0] == 0.0) & (x[..., 1] == 0.0)
        x[..., 0] = np.where(apex, APEX_OFFSET, x[..., 0])
    return x


def phi(mode: ModeField, x) -> np.ndarray:
    """Boundary datum φ_α, the rigid velocity of the upper surface for mode α."""
    return mode.kernel.phi(_points(mode, x), mode.params)


def correction(mode: ModeField, x) -> np.ndarray:
    """Correction field 𝓕_α that makes the Keller-type velocity incompressible."""
    return mode.kernel.correction(_points(mode, x), mode.params)


def velocity(mode: ModeField, x) -> np.ndarray:
    """ū^(α): equals φ_α on the upper surface and vanishes on the lower one."""
    return mode.kernel.velocity(_points(mode, x), mode.params)


def pressure(mode: ModeField, x, tol: float = 1e-10) -> np.ndarray:
    """
    Pressure p̄^(α).

    For α = 3 the radial term a1 μ U3 ∫_{r²}^{|x'|²}(ε + 2κt^(m/2))^(-3) dt
    vanishes at |x'| = r; it is exact for m = 2 and integrated otherwise.
    """
    x = _points(mode, x)
    value = mode.kernel.pressure(x, mode.params)
    if mode.alpha == 3 and mode.motion.U[2] != 0.0:
        a1 = float(expressions.correction_constants()["a1"])
        s = np.hypot(x[..., 0], x[..., 1])
        value = value + a1 * mode.fluid.mu * mode.motion.U[2] * specfun.radial_pressure_integral(
            mode.geometry, s, tol
        )
    return value


def velocity_gradient(mode: ModeField, x) -> VelocityGradient:
    """Analytic ∇ū (grad[..., i, j] = ∂_j ū_i), strain rate e(ū) and ∂₃₃ū."""
    x = _points(mode, x)
    grad = mode.kernel.gradient(x, mode.params)
    strain = 0.5 * (grad + np.swapaxes(grad, -1, -2))
    d33 = mode.kernel.hessian(x, mode.params)[..., 2, 2]
    return VelocityGradient(grad, strain, d33)


def strain_rate(mode: ModeField, x) -> np.ndarray:
    """e(ū) = (∇ū + ∇ūᵀ)/2 without the second derivatives."""
    grad = mode.kernel.gradient(_points(mode, x), mode.params)
    return 0.5 * (grad + np.swapaxes(grad, -1, -2))


def velocity_hessian(mode: ModeField, x) -> np.ndarray:
    """Second derivatives ∂_j ∂_k ū_i with shape (..., 3, 3, 3)."""
    return mode.kernel.hessian(_points(mode, x), mode.params)


def divergence(mode: ModeField, x) -> np.ndarray:
    grad = mode.kernel.gradient(_points(mode, x), mode.params)
    return np.trace(grad, axis1=-2, axis2=-1)


def residual33(mode: ModeField, x) -> Residual:
    """
    Thin-gap Stokes residual μ∂₃₃ū - ∇p̄ next to its closed form.

    The closed forms are -μc x3 ∂_i(∂_1δ/δ²) for mode 1 (mode 2 alike),
    -3μU3 x3² ∂_i[δ⁻³(a1 x'·∇δ/δ + a2)] for mode 3,
    -3μ x3² ∂_i[W δ⁻³(b1 x'·∇δ/δ + b3)] for mode 4 with W = ω2x1 - ω1x2,
    and a purely vertical term for mode 5.
    """
    x = _points(mode, x)
    params = mode.params
    d33 = mode.kernel.hessian(x, params)[..., 2, 2]
    computed = mode.fluid.mu * d33 - mode.kernel.pressure_gradient(x, params)
    return Residual(computed, mode.kernel.residual_rhs(x, params))


def mode5_defects(mode: ModeField, x) -> Mode5Defects:
    """
    Closed forms of ∇·ū⁽⁵⁾ and of residual33 computed minus closed form for mode 5.

    Both vanish when ω1 = ω2 = 0; the other modes have no defect.
    """
    x = _points(mode, x)
    values = mode.kernel.defects(x, mode.params)
    return Mode5Defects(values[..., 0], values[..., 1:])


def stress(mode: ModeField, x, tol: float = 1e-10) -> np.ndarray:
    """Cauchy stress σ = 2μe(ū) - p̄𝕀."""
    x = _points(mode, x)
    grad = mode.kernel.gradient(x, mode.params)
    p = pressure(mode, x, tol)
    sigma = mode.fluid.mu * (grad + np.swapaxes(grad, -1, -2))
    sigma -= p[..., None, None] * np.eye(3)
    return sigma


def derive_correction_constants(kappa: float) -> CorrectionConstants:
    """Solve the undetermined-coefficient systems and evaluate at κ."""
    if not kappa > 0.0:
        raise DomainError(f"kappa must be positive, got {kappa}")
    exact = expressions.correction_constants()
    values = {
        name: float(value.subs(expressions.KAPPA, kappa)) for name, value in exact.items()
    }
    return CorrectionConstants(**values)


def test_stress(mode: ModeField, x, tol: float = 1e-10) -> np.ndarray:
    """
    Dual test stress S̄^(α), symmetric and divergence-free in Ω_r.

    Modes 1 and 2 use the explicit tensors with (1,3) entry μc/δ and
    (3,3) entry μc x3 ∂δ/δ²; mode 5 uses zero. Modes 3 and 4 start from
    σ = 2μe(ū) - p̄𝕀 and add, with r = μΔū - ∇p̄ and
    Φ_k = ∫_{-δ/2}^{x3} r_k dx3,

        S_k3 = S_3k = σ_k3 - Φ_k            (k = 1, 2)
        S_33 = σ_33 - ∫_{-δ/2}^{x3}(r_3 - ∂_1Φ_1 - ∂_2Φ_2) dx3

    so every integral stays between the two surfaces.

    Raises:
        ConvergenceError: if the mode-3 radial pressure integral misses ``tol``
    """
    x = _points(mode, x)
    mu = mode.fluid.mu
    shape = x.shape[:-1] + (3, 3)
    if mode.alpha == 5:
        return np.zeros(shape)
    if mode.alpha in (1, 2):
        gap = geometry.delta(mode.geometry, x[..., :2])
        U, omega, R = mode.motion.U, mode.motion.omega, mode.geometry.R
        k = mode.alpha - 1
        c = U[0] - omega[1] * R if k == 0 else U[1] + omega[0] * R
        out = np.zeros(shape)
        out[..., k, 2] = mu * c / gap.value
        out[..., 2, k] = out[..., k, 2]
        out[..., 2, 2] = mu * c * x[..., 2] * gap.grad[..., k] / gap.value**2
        return out

    out = stress(mode, x, tol)
    closure = mode.kernel.closure(x, mode.params)
    for k in range(2):
        out[..., k, 2] += closure[..., k]
        out[..., 2, k] += closure[..., k]
    out[..., 2, 2] += closure[..., 2]
    return out


# keep pytest from collecting the stress builder when tests import it by name
test_stress.__test__ = False
