"""
Exception hierarchy for gapflow.

Every error raised deliberately by the package derives from GapflowError so
callers (and the CLI) can map failures to exit codes without string matching.
"""

from typing import Optional

from pydantic import ValidationError


class GapflowError(Exception):
    """Base class for all gapflow errors."""


class DomainError(GapflowError, ValueError):
    """An argument lies outside the domain of the operation."""


class ModeError(GapflowError, ValueError):
    """A decomposition mode is out of range or not admissible for the geometry."""


class ConstantsError(GapflowError, ArithmeticError):
    """The undetermined-coefficient system for the correction constants is singular."""


class ConvergenceError(GapflowError, RuntimeError):
    """
    A quadrature did not reach its tolerance.

    Args:
        label: Name of the integral that failed
        achieved: Relative error estimate reached before giving up
        target: Requested relative tolerance
    """

    def __init__(self, label: str, achieved: float, target: float):
        self.label = label
        self.achieved = achieved
        self.target = target
        super().__init__(
            f"{label}: quadrature did not converge "
            f"(achieved {achieved:.3e}, target {target:.3e})"
        )


class FitError(GapflowError):
    """A least-squares fit is under-determined or ill-conditioned."""


class ConfigError(GapflowError):
    """
    Invalid run configuration.

    Args:
        key: Offending configuration key
        message: Single-line explanation
    """

    def __init__(self, key: str, message: str):
        self.key = key
        self.message = " ".join(str(message).split())
        super().__init__(f"{key}: {self.message}")


EXIT_OK = 0
EXIT_INVARIANT_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_NON_CONVERGENCE = 3


def domain_error(exc: ValidationError) -> DomainError:
    """Rejected model arguments (GapGeometry, RigidMotion, FluidParams...) as a DomainError."""
    error = exc.errors()[0]
    where = ".".join(str(part) for part in error["loc"]) or exc.title
    return DomainError(f"{where}: {error['msg']}")


def exit_code(exc: Optional[BaseException]) -> int:
    """Map an exception raised by a subcommand to the CLI exit code."""
    if exc is None:
        return EXIT_OK
    if isinstance(exc, ConvergenceError):
        return EXIT_NON_CONVERGENCE
    if isinstance(exc, (GapflowError, ValidationError)):
        return EXIT_CONFIG_ERROR
    raise exc
