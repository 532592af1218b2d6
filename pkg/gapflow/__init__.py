"""
gapflow - singular Stokes flow in the gap between two nearly touching particles.

This package builds the explicit neck fields of the five motion modes of the
upper particle, evaluates the leading-order force and torque they carry and
verifies both against independent quadratures.
"""

from .asymptotics import ForceTorque, resistance_matrix, theorem_force_torque, total_force_torque
from .fields import FluidParams, ModeField, RigidMotion
from .geometry import GapGeometry
from .trace import SimpleTrace, TraceEntry, TraceType
from .verify import SweepSpec, VerificationReport

__version__ = "0.1.0"
__author__ = "Jac Lemieux"
__email__ = "jalemieux@gmail.com"

__all__ = [
    "GapGeometry",
    "RigidMotion",
    "FluidParams",
    "ModeField",
    "ForceTorque",
    "total_force_torque",
    "theorem_force_torque",
    "resistance_matrix",
    "SweepSpec",
    "VerificationReport",
    "SimpleTrace",
    "TraceType",
    "TraceEntry",
]
