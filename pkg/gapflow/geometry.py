"""
Neck geometry between two nearly touching particles.

Near the apexes the upper particle surface is x3 = ε/2 + h(x') and the lower
one is x3 = -(ε/2 + h(x')), with h(x') = κ|x'|^m. The thin fluid layer
between them over |x'| < r is the neck Ω_r.

All functions are vectorised: planar points have shape (..., 2), spatial
points shape (..., 3).
"""

import logging
from typing import NamedTuple, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .errors import DomainError

logger = logging.getLogger(__name__)

# relative slack for points sitting exactly on |x'| = r or on the surfaces
EDGE_TOL = 1e-12


class GapGeometry(BaseModel):
    """
    Shape of the neck region.

    Args:
        m: Convexity exponent, m >= 2 (real)
        kappa: Profile coefficient, units of length^(1-m)
        epsilon: Distance between the two particles
        r: Neck radius, 0 < r < R (defaults to R/2)
        R: Particle length scale
    """

    model_config = ConfigDict(frozen=True)

    m: float = Field(2.0, ge=2.0)
    kappa: float = Field(..., gt=0.0)
    epsilon: float = Field(..., gt=0.0)
    r: float = Field(..., gt=0.0)
    R: float = Field(1.0, gt=0.0)

    @model_validator(mode="before")
    @classmethod
    def _default_neck_radius(cls, data):
        if isinstance(data, dict) and data.get("r") is None:
            data = dict(data)
            data["r"] = 0.5 * float(data.get("R", 1.0))
        return data

    @model_validator(mode="after")
    def _check_shape(self):
        if not self.r < self.R:
            raise ValueError(f"neck radius r={self.r} must be smaller than R={self.R}")
        if self.epsilon >= self.kappa * self.r**self.m:
            logger.warning(
                "epsilon=%g is not small against kappa*r^m=%g; "
                "leading-order formulas may be inaccurate",
                self.epsilon,
                self.kappa * self.r**self.m,
            )
        return self

    @classmethod
    def from_ellipsoid(
        cls, m: float, R: float, epsilon: float, r: Optional[float] = None
    ) -> "GapGeometry":
        """Geometry of two axisymmetric ellipsoid-like particles of scale R."""
        return cls(m=m, kappa=ellipsoid_kappa(m, R), epsilon=epsilon, r=r, R=R)

    def with_epsilon(self, epsilon: float) -> "GapGeometry":
        """Same shape at a different gap."""
        return type(self)(**{**self.model_dump(), "epsilon": epsilon})

    @property
    def boundary_layer(self) -> float:
        """Radial scale (ε/2κ)^(1/m) on which δ doubles from its apex value."""
        return (self.epsilon / (2.0 * self.kappa)) ** (1.0 / self.m)

    @property
    def is_quadratic(self) -> bool:
        return abs(self.m - 2.0) <= EDGE_TOL

    @property
    def particle_center(self) -> np.ndarray:
        """Centre of the upper particle, the torque reference point."""
        return np.array([0.0, 0.0, 0.5 * self.epsilon + self.R])


class ProfileValue(NamedTuple):
    value: np.ndarray
    grad: np.ndarray
    area_element: np.ndarray


class GapValue(NamedTuple):
    value: np.ndarray
    grad: np.ndarray


class XiValue(NamedTuple):
    value: np.ndarray
    grad: np.ndarray


class SurfacePoint(NamedTuple):
    point: np.ndarray
    normal: np.ndarray
    area_element: np.ndarray


def _planar(xp) -> np.ndarray:
    xp = np.asarray(xp, dtype=float)
    if xp.shape[-1] != 2:
        raise DomainError(f"planar points need a trailing axis of length 2, got {xp.shape}")
    return xp


def _spatial(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 3:
        raise DomainError(f"points need a trailing axis of length 3, got {x.shape}")
    return x


def _radius_squared(geom: GapGeometry, xp: np.ndarray, strict: bool = False) -> np.ndarray:
    s2 = xp[..., 0] ** 2 + xp[..., 1] ** 2
    limit = geom.r**2 * (1.0 + EDGE_TOL)
    outside = s2 >= geom.r**2 if strict else s2 > limit
    if np.any(outside):
        worst = float(np.sqrt(np.max(s2)))
        raise DomainError(f"|x'| = {worst:.6g} lies outside the neck radius r = {geom.r:g}")
    return s2


def _profile(geom: GapGeometry, s2: np.ndarray, xp: np.ndarray):
    # |x'|^m and the factor |x'|^(m-2) through the squared radius, so m = 2 stays exact
    power = np.power(s2, 0.5 * geom.m)
    slope = np.power(s2, 0.5 * (geom.m - 2.0))
    h = geom.kappa * power
    grad_h = (geom.kappa * geom.m) * slope[..., None] * xp
    return h, grad_h


def half_gap(geom: GapGeometry, xp) -> ProfileValue:
    """
    Surface profile h(x') = κ|x'|^m with its planar gradient and area element.

    Raises:
        DomainError: if |x'| > r
    """
    xp = _planar(xp)
    s2 = _radius_squared(geom, xp)
    h, grad_h = _profile(geom, s2, xp)
    area = np.sqrt(1.0 + np.sum(grad_h**2, axis=-1))
    return ProfileValue(h, grad_h, area)


def delta(geom: GapGeometry, xp) -> GapValue:
    """
    Local gap width δ(x') = ε + 2h(x') and its planar gradient.

    For m = 2 the gradient is exactly 4κx'.
    """
    xp = _planar(xp)
    s2 = _radius_squared(geom, xp)
    h, grad_h = _profile(geom, s2, xp)
    return GapValue(geom.epsilon + 2.0 * h, 2.0 * grad_h)


def xi(geom: GapGeometry, x) -> XiValue:
    """
    Rescaled vertical coordinate 𝔊 = x3/δ(x') in [-1/2, 1/2] and its gradient.

    Raises:
        DomainError: if x is outside Ω_r
    """
    x = _spatial(x)
    gap = delta(geom, x[..., :2])
    x3 = x[..., 2]
    if np.any(np.abs(x3) > 0.5 * gap.value * (1.0 + EDGE_TOL)):
        raise DomainError("point lies outside the gap |x3| <= δ(x')/2")
    value = x3 / gap.value
    grad = np.empty(x.shape, dtype=float)
    grad[..., :2] = -(x3 / gap.value**2)[..., None] * gap.grad
    grad[..., 2] = 1.0 / gap.value
    return XiValue(value, grad)


def top_surface(geom: GapGeometry, xp) -> SurfacePoint:
    """
    Point, unit normal and area element of the upper particle over x'.

    The normal is the outward normal of the upper particle, pointing down into
    the gap: n = (∇h, -1)/sqrt(1 + |∇h|²).

    Raises:
        DomainError: if |x'| >= r
    """
    xp = _planar(xp)
    s2 = _radius_squared(geom, xp, strict=True)
    h, grad_h = _profile(geom, s2, xp)
    area = np.sqrt(1.0 + np.sum(grad_h**2, axis=-1))
    point = np.concatenate([xp, (0.5 * geom.epsilon + h)[..., None]], axis=-1)
    normal = np.concatenate([grad_h, -np.ones_like(h)[..., None]], axis=-1)
    return SurfacePoint(point, normal / area[..., None], area)


def ellipsoid_kappa(m: float, R: float) -> float:
    """Profile coefficient κ = 1/(m R^(m-1)) of an axisymmetric ellipsoid-like particle."""
    if m < 2.0:
        raise DomainError(f"convexity exponent m={m} must be >= 2")
    if R <= 0.0:
        raise DomainError(f"particle scale R={R} must be positive")
    return 1.0 / (m * R ** (m - 1.0))


def contains(geom: GapGeometry, x) -> np.ndarray:
    """Boolean mask of the points lying in the closed neck region."""
    x = _spatial(x)
    xp = x[..., :2]
    s2 = xp[..., 0] ** 2 + xp[..., 1] ** 2
    inside = s2 <= geom.r**2 * (1.0 + EDGE_TOL)
    safe = np.where(inside, s2, 0.0)
    h, _ = _profile(geom, safe, xp)
    width = geom.epsilon + 2.0 * h
    return inside & (np.abs(x[..., 2]) <= 0.5 * width * (1.0 + EDGE_TOL))


def neck_point(geom: GapGeometry, xp, zeta) -> np.ndarray:
    """Point at planar position x' and rescaled height 𝔊 = zeta, i.e. x3 = zeta·δ(x')."""
    xp = _planar(xp)
    zeta = np.asarray(zeta, dtype=float)
    if np.any(np.abs(zeta) > 0.5):
        raise DomainError("rescaled height must lie in [-1/2, 1/2]")
    gap = delta(geom, xp)
    x3 = np.asarray(zeta * gap.value)
    xp = np.broadcast_to(xp, x3.shape + (2,))
    return np.concatenate([xp, x3[..., None]], axis=-1)
