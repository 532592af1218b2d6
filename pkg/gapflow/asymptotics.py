"""
Leading-order force and torque on the upper particle.

Every mode contributes a Γ·ρ term per rate (ρ12: |ln ε| or ε^(2/m-1),
ρ34: ε^(4/m-3)); O(1) remainders are carried as flagged zero entries.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from .errors import ModeError
from .fields import FluidParams, ModeField, RigidMotion, admissible_modes
from .geometry import GapGeometry
from .specfun import CoeffIndex, gamma_coeff, rate

logger = logging.getLogger(__name__)

ROW_LABELS = ("F1", "F2", "F3", "T1", "T2", "T3")
COLUMN_LABELS = ("U1", "U2", "U3", "omega1", "omega2", "omega3")

_E1 = np.array([1.0, 0.0, 0.0])
_E2 = np.array([0.0, 1.0, 0.0])
_E3 = np.array([0.0, 0.0, 1.0])
_ZERO = np.zeros(3)


class RateTag(str, Enum):
    RHO12 = "rho12"
    RHO34 = "rho34"
    O1 = "O1"


@dataclass(frozen=True)
class BreakdownEntry:
    """Contribution of one mode at one rate; ``unmodeled`` marks an O(1) remainder."""

    mode: Optional[int]
    tag: RateTag
    force: np.ndarray = field(default_factory=lambda: _ZERO.copy())
    torque: np.ndarray = field(default_factory=lambda: _ZERO.copy())
    unmodeled: bool = False

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "rate": self.tag.value,
            "F": [float(v) for v in self.force],
            "T": [float(v) for v in self.torque],
            "unmodeled": self.unmodeled,
        }


@dataclass(frozen=True)
class ForceTorque:
    """Force and torque with the contributions they are summed from."""

    F: np.ndarray
    T: np.ndarray
    breakdown: Tuple[BreakdownEntry, ...] = ()

    @classmethod
    def from_breakdown(cls, entries) -> "ForceTorque":
        entries = tuple(entries)
        F = np.zeros(3)
        T = np.zeros(3)
        for entry in entries:
            if not entry.unmodeled:
                F = F + entry.force
                T = T + entry.torque
        return cls(F, T, entries)

    def __add__(self, other: "ForceTorque") -> "ForceTorque":
        return ForceTorque.from_breakdown(self.breakdown + other.breakdown)

    def vector(self) -> np.ndarray:
        """Stacked (F1, F2, F3, T1, T2, T3)."""
        return np.concatenate([self.F, self.T])

    def to_dict(self) -> dict:
        return {
            "F": [float(v) for v in self.F],
            "T": [float(v) for v in self.T],
            "breakdown": [entry.to_dict() for entry in self.breakdown],
        }


@dataclass(frozen=True)
class TheoremComparison:
    case: str
    theorem: ForceTorque
    mode_sum: ForceTorque
    force_diff: np.ndarray
    torque_diff: np.ndarray
    relative: float

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "F_theorem": [float(v) for v in self.theorem.F],
            "T_theorem": [float(v) for v in self.theorem.T],
            "F_diff": [float(v) for v in self.force_diff],
            "T_diff": [float(v) for v in self.torque_diff],
            "relative": float(self.relative),
        }


def leading_factor(geom: GapGeometry, idx: CoeffIndex) -> float:
    """Γ_ij^(m) ρ_ij^(m)(ε)."""
    return gamma_coeff(idx, geom.m, geom.kappa) * rate(idx, geom.m, geom.epsilon)


def mode_force_torque(mode: ModeField) -> ForceTorque:
    """
    Leading force and torque of a single mode.

    Shear modes give ∓2πμcΓ12ρ12 along e1/e2 with a torque arm R, squeeze
    gives -πμU3(2Γ12ρ12 + 3Γ34ρ34)e3, horizontal rotation gives
    (3πμΓ12ρ12/5κ)(-ω2, ω1, 0) and mode 5 contributes nothing at leading order.
    """
    geom, mu = mode.geometry, mode.fluid.mu
    U, omega, R = mode.motion.U, mode.motion.omega, geom.R
    g12 = leading_factor(geom, CoeffIndex.SHEAR)
    entries = []

    if mode.alpha == 1:
        c = U[0] - omega[1] * R
        entries.append(
            BreakdownEntry(1, RateTag.RHO12, -2.0 * math.pi * mu * c * g12 * _E1,
                           2.0 * math.pi * mu * R * c * g12 * _E2)
        )
    elif mode.alpha == 2:
        c = U[1] + omega[0] * R
        entries.append(
            BreakdownEntry(2, RateTag.RHO12, -2.0 * math.pi * mu * c * g12 * _E2,
                           -2.0 * math.pi * mu * R * c * g12 * _E1)
        )
    elif mode.alpha == 3:
        g34 = leading_factor(geom, CoeffIndex.SQUEEZE)
        entries.append(BreakdownEntry(3, RateTag.RHO12, -2.0 * math.pi * mu * U[2] * g12 * _E3))
        entries.append(BreakdownEntry(3, RateTag.RHO34, -3.0 * math.pi * mu * U[2] * g34 * _E3))
    elif mode.alpha == 4:
        factor = 3.0 * math.pi * mu * g12 / (5.0 * geom.kappa)
        entries.append(
            BreakdownEntry(4, RateTag.RHO12, factor * np.array([-omega[1], omega[0], 0.0]))
        )
    entries.append(BreakdownEntry(mode.alpha, RateTag.O1, unmodeled=True))
    return ForceTorque.from_breakdown(entries)


def _check_rotation(geom: GapGeometry, motion: RigidMotion):
    if motion.is_rotating and not geom.is_quadratic:
        raise ModeError("rotation (omega != 0) is only modelled for m = 2")


def total_force_torque(
    geom: GapGeometry, motion: RigidMotion, fluid: FluidParams
) -> ForceTorque:
    """Superposition of the admissible modes."""
    _check_rotation(geom, motion)
    total = ForceTorque(np.zeros(3), np.zeros(3))
    for alpha in admissible_modes(geom):
        total = total + mode_force_torque(ModeField(alpha, geom, motion, fluid))
    return total


def theorem_force_torque(
    case: str, geom: GapGeometry, motion: RigidMotion, fluid: FluidParams
) -> TheoremComparison:
    """
    Evaluate the closed-form statements and compare them with the mode sum.

    Case "i" (m = 2, any motion):
        F = -3πμ/(8κ²ε) U3 e3 - πμ/(2κ)|ln ε| U - πμ(10κR-3)/(20κ²)|ln ε| ω×e3
        T = -πμR/(2κ)|ln ε| (U×e3 + R(ω1e1 + ω2e2))
    Case "ii" (ω = 0, any m):
        F = -3πμΓ34ρ34 U3 e3 - 2πμΓ12ρ12 U
        T = -2πμRΓ12ρ12 U×e3

    Raises:
        ModeError: if the case does not apply to the inputs
    """
    case = str(case).lower()
    mu, R, kappa, eps = fluid.mu, geom.R, geom.kappa, geom.epsilon
    U = motion.translation
    omega = motion.rotation
    U_cross = np.cross(U, _E3)
    omega_cross = np.cross(omega, _E3)

    if case == "i":
        if not geom.is_quadratic:
            raise ModeError("case (i) requires m = 2")
        log_eps = abs(math.log(eps))
        squeeze = -3.0 * math.pi * mu / (8.0 * kappa**2 * eps) * U[2] * _E3
        shear = -math.pi * mu / (2.0 * kappa) * log_eps * U
        tilt = -math.pi * mu * (10.0 * kappa * R - 3.0) / (20.0 * kappa**2) * log_eps * omega_cross
        torque = -math.pi * mu * R / (2.0 * kappa) * log_eps * (
            U_cross + R * np.array([omega[0], omega[1], 0.0])
        )
        entries = [
            BreakdownEntry(None, RateTag.RHO34, squeeze),
            BreakdownEntry(None, RateTag.RHO12, shear + tilt, torque),
        ]
    elif case == "ii":
        if motion.is_rotating:
            raise ModeError("case (ii) requires omega = 0")
        g12 = leading_factor(geom, CoeffIndex.SHEAR)
        g34 = leading_factor(geom, CoeffIndex.SQUEEZE)
        entries = [
            BreakdownEntry(None, RateTag.RHO34, -3.0 * math.pi * mu * g34 * U[2] * _E3),
            BreakdownEntry(None, RateTag.RHO12, -2.0 * math.pi * mu * g12 * U,
                           -2.0 * math.pi * mu * R * g12 * U_cross),
        ]
    else:
        raise ModeError(f"unknown theorem case {case!r}; expected 'i' or 'ii'")

    entries.append(BreakdownEntry(None, RateTag.O1, unmodeled=True))
    theorem = ForceTorque.from_breakdown(entries)
    mode_sum = total_force_torque(geom, motion, fluid)
    force_diff = theorem.F - mode_sum.F
    torque_diff = theorem.T - mode_sum.T
    size = max(np.max(np.abs(mode_sum.vector())), np.max(np.abs(theorem.vector())))
    change = max(np.max(np.abs(force_diff)), np.max(np.abs(torque_diff)))
    relative = change / size if size > 0.0 else change
    if relative > 1e-12:
        logger.info("theorem case (%s) differs from the mode sum: relative %.3e", case, relative)
    return TheoremComparison(case, theorem, mode_sum, force_diff, torque_diff, float(relative))


def resistance_matrix(
    geom: GapGeometry, fluid: FluidParams, include_rotation: Optional[bool] = None
) -> np.ndarray:
    """
    Leading-order map (U, ω) -> (F, T) as a 6x6 matrix (6x3 without rotation).

    Columns are total_force_torque at unit basis motions; rows are
    (F1, F2, F3, T1, T2, T3).

    Raises:
        ModeError: if rotation columns are requested for m != 2
    """
    if include_rotation is None:
        include_rotation = geom.is_quadratic
    if include_rotation and not geom.is_quadratic:
        raise ModeError("rotation columns are only defined for m = 2")
    columns = 6 if include_rotation else 3
    matrix = np.zeros((6, columns))
    for n in range(columns):
        basis = np.zeros(6)
        basis[n] = 1.0
        matrix[:, n] = total_force_torque(geom, RigidMotion.from_vector(basis), fluid).vector()
    return matrix
