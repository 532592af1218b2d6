"""
Run configuration: flat key = value files, command-line overrides and the
built-in acceptance configuration used by ``verify``.
"""

import logging
import math
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ConfigError
from .fields import FluidParams, RigidMotion
from .geometry import GapGeometry, ellipsoid_kappa
from .verify import FitModel, SweepSpec

logger = logging.getLogger(__name__)

DEFAULT_EPSILONS = (1e-3, 1e-4, 1e-5, 1e-6)


def _split(value):
    if isinstance(value, str):
        parts = [part.strip() for part in value.split(",")]
        if any(part == "" for part in parts):
            raise ValueError(f"malformed list {value!r}")
        return tuple(parts)
    return value


class RunConfig(BaseModel):
    """
    Validated settings of one CLI run.

    Exactly one of ``kappa`` and ``ellipsoid_R`` may be given; the geometry
    subcommands also need ``epsilon`` (see ``parse_config``).
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    m: float = Field(2.0, ge=2.0)
    kappa: Optional[float] = Field(None, gt=0.0)
    ellipsoid_R: Optional[float] = Field(None, gt=0.0)
    epsilon: Optional[float] = Field(None, gt=0.0)
    r: Optional[float] = Field(None, gt=0.0)
    R: float = Field(1.0, gt=0.0)
    mu: float = Field(1.0, gt=0.0)
    U: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    omega: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    epsilons: Tuple[float, ...] = DEFAULT_EPSILONS
    fit_model: FitModel = FitModel.POWER
    format: Optional[str] = Field(None, pattern="^(json|csv)$")
    out: Optional[str] = None
    quad_tol: float = Field(1e-8, gt=0.0, lt=1.0)
    workers: int = Field(1, ge=1)

    @field_validator("U", "omega", "epsilons", mode="before")
    @classmethod
    def _lists(cls, value):
        return _split(value)

    @field_validator("U", "omega")
    @classmethod
    def _finite(cls, value):
        if not all(math.isfinite(v) for v in value):
            raise ValueError("components must be finite")
        return value

    @model_validator(mode="after")
    def _check(self):
        if self.kappa is not None and self.ellipsoid_R is not None:
            raise ConfigError("kappa", "give exactly one of kappa and ellipsoid_R")
        if any(self.omega) and self.m != 2.0:
            raise ConfigError("omega", "omega != 0 needs m = 2 (modes 4 and 5 are undefined otherwise)")
        return self

    @property
    def resolved_kappa(self) -> Optional[float]:
        if self.kappa is not None:
            return self.kappa
        if self.ellipsoid_R is not None:
            return ellipsoid_kappa(self.m, self.ellipsoid_R)
        return None

    def geometry(self, epsilon: Optional[float] = None) -> GapGeometry:
        epsilon = self.epsilon if epsilon is None else epsilon
        return GapGeometry(m=self.m, kappa=self.resolved_kappa, epsilon=epsilon, r=self.r, R=self.R)

    def motion(self) -> RigidMotion:
        return RigidMotion(U=self.U, omega=self.omega)

    def fluid(self) -> FluidParams:
        return FluidParams(mu=self.mu)

    def sweep(self) -> SweepSpec:
        try:
            return SweepSpec(
                epsilons=self.epsilons, quad_tol=self.quad_tol,
                fit_model=self.fit_model, workers=self.workers,
            )
        except ValidationError as exc:
            raise _from_validation_error(exc) from None


class VerifySettings(BaseModel):
    """Built-in configuration of the ``verify`` suites."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kappa: float = Field(0.5, gt=0.0)
    R: float = Field(1.0, gt=0.0)
    r: float = Field(0.5, gt=0.0)
    mu: float = Field(1.0, gt=0.0)
    identity_epsilon: float = Field(1e-3, gt=0.0, lt=1.0)
    identity_points: int = Field(10_000, ge=10)
    boundary_points: int = Field(1_000, ge=10)
    stress_points: int = Field(12, ge=1)
    seed: int = 20240601
    coefficient_epsilons: Tuple[float, ...] = DEFAULT_EPSILONS
    dominance_epsilon: float = Field(1e-6, gt=0.0, lt=1.0)
    gap_epsilons: Tuple[float, ...] = (1e-2, 1e-3, 1e-4, 1e-5)
    gap_extended_epsilons: Tuple[float, ...] = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
    gap_modes: Tuple[int, ...] = (1, 2, 3, 4, 5)
    gap_U: Tuple[float, float, float] = (1.0, 1.0, 1.0)
    gap_omega: Tuple[float, float, float] = (0.3, 0.2, 0.5)
    quad_tol: float = Field(1e-8, gt=0.0, lt=1.0)
    workers: int = Field(1, ge=1)

    @field_validator("coefficient_epsilons", "gap_epsilons", "gap_extended_epsilons", "gap_modes",
                     "gap_U", "gap_omega", mode="before")
    @classmethod
    def _lists(cls, value):
        return _split(value)

    @field_validator("gap_modes")
    @classmethod
    def _modes(cls, value):
        if not value or any(alpha not in (1, 2, 3, 4, 5) for alpha in value):
            raise ValueError("gap modes must be drawn from 1..5")
        return tuple(sorted(set(value)))

    def geometry(self, m: float = 2.0, epsilon: Optional[float] = None) -> GapGeometry:
        return GapGeometry(
            m=m, kappa=self.kappa, epsilon=self.identity_epsilon if epsilon is None else epsilon,
            r=self.r, R=self.R,
        )

    def fluid(self) -> FluidParams:
        return FluidParams(mu=self.mu)

    def coefficient_sweep(self) -> SweepSpec:
        return SweepSpec(epsilons=self.coefficient_epsilons, quad_tol=self.quad_tol,
                         workers=self.workers)

    def gap_sweep(self) -> SweepSpec:
        return SweepSpec(epsilons=self.gap_epsilons, quad_tol=self.quad_tol, workers=self.workers)

    def gap_extended_sweep(self) -> SweepSpec:
        return SweepSpec(epsilons=self.gap_extended_epsilons, quad_tol=self.quad_tol,
                         workers=self.workers)

    def gap_motion(self) -> RigidMotion:
        return RigidMotion(U=self.gap_U, omega=self.gap_omega)


def read_config_file(path) -> Dict[str, str]:
    """
    Read a flat ``key = value`` file.

    ``#`` starts a comment; blank lines are skipped; keys may use dashes.

    Raises:
        ConfigError: for unreadable files, lines without ``=`` or repeated keys
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from exc
    values: Dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("config", f"{path}:{number}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key in values:
            raise ConfigError(key, f"{path}:{number}: repeated key")
        values[key] = value
    logger.debug("read %d keys from %s", len(values), path)
    return values


def _from_validation_error(exc: ValidationError, default_key: str = "config") -> ConfigError:
    error = exc.errors()[0]
    key = str(error["loc"][0]) if error["loc"] else default_key
    if error["type"] == "extra_forbidden":
        return ConfigError(key, "unknown key")
    return ConfigError(key, error["msg"])


def _validate(model, values: Mapping[str, Any]):
    try:
        return model.model_validate(dict(values))
    except ValidationError as exc:
        raise _from_validation_error(exc) from None


def parse_config(
    args: Optional[Mapping[str, Any]] = None,
    file=None,
    require_geometry: bool = False,
) -> RunConfig:
    """
    Merge a config file with command-line values into a RunConfig.

    Command-line values that are None are treated as absent and never
    override the file.

    Raises:
        ConfigError: naming the offending key
    """
    values: Dict[str, Any] = dict(read_config_file(file)) if file else {}
    for key, value in (args or {}).items():
        if value is not None:
            values[key.replace("-", "_")] = value
    config = _validate(RunConfig, values)
    if require_geometry:
        if config.kappa is None and config.ellipsoid_R is None:
            raise ConfigError("kappa", "missing required key 'kappa' (or 'ellipsoid_R')")
        if config.epsilon is None:
            raise ConfigError("epsilon", "missing required key 'epsilon'")
        try:
            config.geometry()
        except ValidationError as exc:
            raise _from_validation_error(exc, default_key="r") from None
    return config


def verify_settings(overrides: Optional[Mapping[str, Any]] = None) -> VerifySettings:
    """Built-in verify configuration with optional overrides."""
    values = {key: value for key, value in (overrides or {}).items() if value is not None}
    return _validate(VerifySettings, values)
