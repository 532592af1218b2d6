"""
Verification suites for gapflow.

Each suite groups named actions that return VerificationReport fragments.
"""

from .suite import (
    CoefficientSuite,
    DominanceSuite,
    DualityGapSuite,
    IdentitySuite,
    OracleSuite,
    Suite,
    default_suites,
)

__all__ = [
    "Suite",
    "IdentitySuite",
    "OracleSuite",
    "CoefficientSuite",
    "DominanceSuite",
    "DualityGapSuite",
    "default_suites",
]
