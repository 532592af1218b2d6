"""
Gamma-function coefficients and blow-up rates of the neck integrals.

For ij in {12, 34}:

    Γ_ij(m) = Γ(i - j/m) Γ(j/m) / (m (2κ)^(j/m))    if i > j/m
            = 1 / (m (2κ)^(j/m))                     if i = j/m

    ρ_ij(m, ε) = ε^-(i - j/m)                        if i > j/m
               = |ln ε|                               if i = j/m
"""

import logging
import math
from enum import Enum

import numpy as np
from scipy import special

from . import quadrature
from .errors import DomainError
from .geometry import GapGeometry

logger = logging.getLogger(__name__)

BRANCH_TOL = 1e-12
GAMMA_MAX_ARG = 30.0


class CoeffIndex(Enum):
    """Admissible index pairs (i, j) of the asymptotic coefficients."""

    SHEAR = (1, 2)
    SQUEEZE = (3, 4)

    @property
    def i(self) -> int:
        return self.value[0]

    @property
    def j(self) -> int:
        return self.value[1]

    @property
    def tag(self) -> str:
        return f"rho{self.i}{self.j}"

    @classmethod
    def from_pair(cls, i: int, j: int) -> "CoeffIndex":
        for idx in cls:
            if idx.value == (i, j):
                return idx
        raise DomainError(f"index pair ({i}, {j}) is not one of 12, 34")


def gamma_fn(s: float) -> float:
    """Euler Gamma function on (0, 30]."""
    if not s > 0.0:
        raise DomainError(f"Gamma argument must be positive, got {s}")
    if s > GAMMA_MAX_ARG:
        raise DomainError(f"Gamma argument {s} exceeds the supported range (0, 30]")
    return float(special.gamma(s))


def exponent(idx: CoeffIndex, m: float) -> float:
    """Blow-up exponent i - j/m."""
    return idx.i - idx.j / m


def is_log_branch(idx: CoeffIndex, m: float) -> bool:
    return abs(exponent(idx, m)) <= BRANCH_TOL


def gamma_coeff(idx: CoeffIndex, m: float, kappa: float) -> float:
    """Leading coefficient Γ_ij^(m) of the neck integrals."""
    if m < 2.0 or kappa <= 0.0:
        raise DomainError(f"gamma_coeff needs m >= 2 and kappa > 0, got m={m}, kappa={kappa}")
    a = exponent(idx, m)
    denominator = m * (2.0 * kappa) ** (idx.j / m)
    if abs(a) <= BRANCH_TOL:
        return 1.0 / denominator
    if a < 0.0:
        raise DomainError(f"i - j/m = {a} is negative; no blow-up coefficient")
    return gamma_fn(a) * gamma_fn(idx.j / m) / denominator


def rate(idx: CoeffIndex, m: float, epsilon: float) -> float:
    """Rate function ρ_ij^(m)(ε); defined only for 0 < ε < 1."""
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"rate functions need 0 < epsilon < 1, got {epsilon}")
    if m < 2.0:
        raise DomainError(f"convexity exponent m={m} must be >= 2")
    a = exponent(idx, m)
    if abs(a) <= BRANCH_TOL:
        return abs(math.log(epsilon))
    return epsilon ** (-a)


def neck_scalar_integral(
    i: int, j: int, geom: GapGeometry, tol: float = 1e-10, lower: float = 0.0
) -> float:
    """
    Radial neck integral ∫_lower^r s^(j-1) δ(s)^(-i) ds by adaptive quadrature.

    With s = L t and L = (ε/2κ)^(1/m) the integrand becomes
    L^j ε^(-i) t^(j-1) (1 + t^m)^(-i), smooth on the unit scale; the t-range
    is split into geometric panels [0, 1], [1, 2], [2, 4], ...

    Raises:
        DomainError: for i < 1, j < 1 or a lower limit outside [0, r]
        ConvergenceError: if a panel misses the tolerance
    """
    if i < 1 or j < 1:
        raise DomainError(f"neck integral needs i >= 1 and j >= 1, got ({i}, {j})")
    if not 0.0 <= lower <= geom.r:
        raise DomainError(f"lower limit {lower} outside [0, r]")
    L = geom.boundary_layer
    m = geom.m

    def scaled(t: float) -> float:
        return t ** (j - 1) * (1.0 + t**m) ** (-i)

    breakpoints = quadrature.geometric_breakpoints(geom.r / L, lower / L)
    value, error = quadrature.panel_quad(
        scaled, breakpoints, tol, label=f"neck integral ({i},{j})"
    )
    logger.debug("neck integral (%d,%d) eps=%g: %.17g +- %.2e", i, j, geom.epsilon, value, error)
    return L**j * geom.epsilon ** (-i) * value


def radial_pressure_integral(geom: GapGeometry, s, tol: float = 1e-10) -> np.ndarray:
    """
    J(s) = ∫_{r²}^{s²} (ε + 2κ t^(m/2))^(-3) dt for 0 <= s <= r.

    Closed form for m = 2; otherwise t = u² turns it into
    -∫_s^r 2u δ(u)^(-3) du, integrated on the boundary-layer map.
    """
    s = np.asarray(s, dtype=float)
    if np.any(s < 0.0) or np.any(s > geom.r * (1.0 + 1e-12)):
        raise DomainError("radial pressure integral needs 0 <= s <= r")
    eps, kappa = geom.epsilon, geom.kappa
    if geom.is_quadratic:
        return -(1.0 / (4.0 * kappa)) * (
            (eps + 2.0 * kappa * s**2) ** -2 - (eps + 2.0 * kappa * geom.r**2) ** -2
        )
    m = geom.m
    flat = s.ravel()

    def integrand(u, rows):
        return 2.0 * u * (eps + 2.0 * kappa * np.abs(u) ** m) ** -3

    refined = quadrature.batch_integral(
        integrand, flat, np.full_like(flat, geom.r), geom.boundary_layer, tol,
        label="radial pressure integral",
    )
    return -refined.value.reshape(s.shape)
