"""
Numerical verification of the neck fields and their asymptotics.

Independent quadratures of the exact traction, the primal and dual energies
and the duality-gap quadratic form, plus the fits that turn ε-series of
those numbers into blow-up exponents and coefficients.

Radial integrals use the boundary-layer map of ``quadrature.sinh_rule``,
angles the periodic trapezoid rule and the vertical direction Gauss–Legendre
in the rescaled height 𝔊 (the fields are polynomial in x3 at fixed x').
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy import optimize

from . import fields, geometry, quadrature
from .errors import ConvergenceError, FitError, ModeError
from .fields import FluidParams, ModeField, RigidMotion
from .geometry import GapGeometry

logger = logging.getLogger(__name__)

START_ORDER = 8
ANGLE_NODES = 16
VERTICAL_NODES = 6
MAX_LEVEL = 4
CONDITION_LIMIT = 1e12
PARITY_ZERO = 1e-9


class FitModel(str, Enum):
    POWER = "power"
    LOG_PLUS_CONST = "log_plus_const"
    POWER_PLUS_LOG = "power_plus_log"


class SweepSpec(BaseModel):
    """
    Descending gap values for an ε-sweep.

    Args:
        epsilons: At least four values in (0, 1), strictly descending,
            spanning at least two decades
        quad_tol: Relative quadrature tolerance
        fit_model: Model used by exponent_fit
        workers: Threads used to evaluate sweep points
    """

    model_config = ConfigDict(frozen=True)

    epsilons: Tuple[float, ...]
    quad_tol: float = Field(1e-8, gt=0.0, lt=1.0)
    fit_model: FitModel = FitModel.POWER
    workers: int = Field(1, ge=1)

    @field_validator("epsilons")
    @classmethod
    def _check_epsilons(cls, value):
        if len(value) < 4:
            raise ValueError("a sweep needs at least 4 epsilon values")
        if not all(0.0 < e < 1.0 for e in value):
            raise ValueError("sweep epsilons must lie in (0, 1)")
        if any(b >= a for a, b in zip(value, value[1:])):
            raise ValueError("sweep epsilons must be strictly descending")
        if math.log10(value[0] / value[-1]) < 2.0 - 1e-9:
            raise ValueError("sweep epsilons must span at least two decades")
        return tuple(float(e) for e in value)


@dataclass
class FitRecord:
    """Least-squares fit of v(ε); ``radius`` holds 2σ confidence radii."""

    model: FitModel
    A: float
    p: Optional[float]
    B: Optional[float]
    C: Optional[float]
    residual: float
    radius: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "model": self.model.value,
            "A": self.A,
            "p": self.p,
            "B": self.B,
            "C": self.C,
            "residual": self.residual,
            "radius": dict(self.radius),
        }


@dataclass
class CheckResult:
    """Outcome of one named check; informational checks never fail a run."""

    suite: str
    name: str
    passed: bool
    value: Optional[float] = None
    threshold: Optional[float] = None
    informational: bool = False
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "name": self.name,
            "passed": self.passed,
            "value": self.value,
            "threshold": self.threshold,
            "informational": self.informational,
            "detail": self.detail,
        }


@dataclass
class GapTable:
    """ℓ[α, β] at one ε, with per-cell convergence flags."""

    epsilon: float
    modes: Tuple[int, ...]
    ell: np.ndarray
    converged: np.ndarray
    achieved: np.ndarray

    @property
    def err(self) -> float:
        """Σℓ[α,α] + 2Σ_{α<β}ℓ[α,β], the sum of the symmetric table."""
        return float(np.sum(self.ell))

    def cell(self, a: int, b: int) -> float:
        return float(self.ell[self.modes.index(a), self.modes.index(b)])

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "modes": list(self.modes),
            "ell": self.ell.tolist(),
            "converged": self.converged.tolist(),
            "achieved": self.achieved.tolist(),
            "err": self.err,
        }


@dataclass
class VerificationReport:
    """Everything measured by a verification run."""

    epsilons: List[float] = field(default_factory=list)
    traction: List[dict] = field(default_factory=list)
    fits: Dict[str, FitRecord] = field(default_factory=dict)
    residuals: Dict[str, float] = field(default_factory=dict)
    gap: List[GapTable] = field(default_factory=list)
    slopes: Dict[str, Optional[float]] = field(default_factory=dict)
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def err_trend(self) -> List[float]:
        return [table.err for table in self.gap]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks if not check.informational)

    def merge(self, other: "VerificationReport") -> "VerificationReport":
        self.epsilons = sorted(set(self.epsilons) | set(other.epsilons), reverse=True)
        self.traction.extend(other.traction)
        self.fits.update(other.fits)
        self.residuals.update(other.residuals)
        self.gap.extend(other.gap)
        self.slopes.update(other.slopes)
        self.checks.extend(other.checks)
        return self

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "epsilons": list(self.epsilons),
            "traction": list(self.traction),
            "fits": {name: record.to_dict() for name, record in self.fits.items()},
            "residuals": dict(self.residuals),
            "gap": [table.to_dict() for table in self.gap],
            "err_trend": self.err_trend,
            "slopes": dict(self.slopes),
            "checks": [check.to_dict() for check in self.checks],
        }


class Traction(NamedTuple):
    F: np.ndarray
    T: np.ndarray
    error: float
    level: int


@dataclass(frozen=True)
class Grid:
    points: np.ndarray
    weights: np.ndarray
    normals: Optional[np.ndarray] = None


def _angles(count: int) -> Tuple[np.ndarray, float]:
    theta = 2.0 * np.pi * np.arange(count) / count
    return theta, 2.0 * np.pi / count


def _order(level: int) -> int:
    return START_ORDER * 2**level


def surface_grid(geom: GapGeometry, level: int, angle_nodes: int = ANGLE_NODES) -> Grid:
    """
    Nodes on the upper surface over |x'| < r.

    ``normals`` holds n dS/dx' = (∇h, -1), so Σ w σ·normal is ∫σn dS.
    """
    s, ws = quadrature.sinh_rule(geom.boundary_layer, geom.r, _order(level))
    theta, wt = _angles(angle_nodes)
    xp = np.stack(
        [np.outer(s, np.cos(theta)), np.outer(s, np.sin(theta))], axis=-1
    ).reshape(-1, 2)
    weights = np.outer(ws * s, np.full(theta.shape, wt)).ravel()
    surface = geometry.top_surface(geom, xp)
    return Grid(surface.point, weights, surface.normal * surface.area_element[:, None])


def volume_grid(geom: GapGeometry, level: int, angular_refine: bool = False) -> Grid:
    """Polar × sinh-radial × Gauss–Legendre-in-𝔊 nodes filling Ω_r."""
    s, ws = quadrature.sinh_rule(geom.boundary_layer, geom.r, _order(level))
    count = ANGLE_NODES * (2**level if angular_refine else 1)
    theta, wt = _angles(count)
    zeta, wz = quadrature.gauss_legendre(VERTICAL_NODES)
    zeta, wz = 0.5 * zeta, 0.5 * wz
    width = geometry.delta(geom, np.stack([s, np.zeros_like(s)], axis=-1)).value
    S, TH, Z = np.meshgrid(s, theta, zeta, indexing="ij")
    points = np.stack([S * np.cos(TH), S * np.sin(TH), Z * width[:, None, None]], axis=-1)
    weights = (ws * s * width)[:, None, None] * wt * wz[None, None, :]
    return Grid(points.reshape(-1, 3), np.broadcast_to(weights, S.shape).ravel())


def lateral_grid(geom: GapGeometry, level: int) -> Grid:
    """Nodes on the side |x'| = r of Ω_r with outward normal (cos θ, sin θ, 0)."""
    theta, wt = _angles(ANGLE_NODES * 2**level)
    zeta, wz = quadrature.gauss_legendre(VERTICAL_NODES)
    zeta, wz = 0.5 * zeta, 0.5 * wz
    width = float(geometry.delta(geom, np.array([geom.r, 0.0])).value)
    TH, Z = np.meshgrid(theta, zeta, indexing="ij")
    points = np.stack([geom.r * np.cos(TH), geom.r * np.sin(TH), Z * width], axis=-1)
    normals = np.stack([np.cos(TH), np.sin(TH), np.zeros_like(TH)], axis=-1)
    weights = np.broadcast_to(geom.r * wt * width * wz[None, :], TH.shape)
    return Grid(points.reshape(-1, 3), weights.ravel(), normals.reshape(-1, 3))


def traction_quadrature(
    mode: ModeField, quad_tol: float = 1e-8, max_level: int = MAX_LEVEL
) -> Traction:
    """
    Force ∫σ[ū,p̄]n dS and torque ∫(x - x_D)×σn dS over the upper neck surface.

    x_D = (0, 0, ε/2 + R) is the centre of the upper particle.

    Raises:
        ConvergenceError: if the radial refinement does not reach ``quad_tol``
    """
    geom = mode.geometry
    center = geom.particle_center
    pressure_tol = min(quad_tol, 1e-10)

    def evaluate(level: int) -> np.ndarray:
        grid = surface_grid(geom, level)
        sigma = fields.stress(mode, grid.points, pressure_tol)
        traction = np.einsum("nij,nj->ni", sigma, grid.normals)
        force = grid.weights @ traction
        torque = grid.weights @ np.cross(grid.points - center, traction)
        return np.concatenate([force, torque])

    refined = quadrature.refine(
        evaluate, quad_tol, f"traction (mode {mode.alpha}, eps={geom.epsilon:g})", max_level
    )
    logger.debug(
        "traction mode %d eps=%g converged at level %d (%.2e)",
        mode.alpha, geom.epsilon, refined.level, refined.error,
    )
    return Traction(refined.value[:3], refined.value[3:], refined.error, refined.level)


def _linear_fit(columns: Sequence[np.ndarray], values: np.ndarray):
    X = np.stack(columns, axis=-1)
    norms = np.linalg.norm(X, axis=0)
    if np.any(norms == 0.0):
        raise FitError("fit has an identically zero column")
    scaled = X / norms
    if np.linalg.cond(scaled) > CONDITION_LIMIT:
        raise FitError("fit is ill-conditioned on this epsilon grid")
    coef, *_ = np.linalg.lstsq(scaled, values, rcond=None)
    coef = coef / norms
    residual_vec = values - X @ coef
    dof = len(values) - X.shape[1]
    if dof > 0:
        sigma2 = float(residual_vec @ residual_vec) / dof
        cov = sigma2 * np.linalg.inv(X.T @ X)
        radius = 2.0 * np.sqrt(np.abs(np.diag(cov)))
    else:
        radius = np.full(X.shape[1], np.nan)
    size = float(np.max(np.abs(values)))
    rms = float(np.sqrt(np.mean(residual_vec**2)))
    return coef, (rms / size if size > 0.0 else rms), radius


def exponent_fit(
    sweep: SweepSpec,
    values: Sequence[float],
    exponent: Optional[float] = None,
    model: Optional[FitModel] = None,
) -> FitRecord:
    """
    Fit v(ε) over the sweep.

    power:          v = A ε^(-p)            (log-log fit; A keeps the sign of v)
    log_plus_const: v = A |ln ε| + B
    power_plus_log: v = A ε^(-p) + B |ln ε| + C

    Passing ``exponent`` fixes p and makes the fit linear. The residual is
    the RMS misfit relative to max |v| (in log space for the free power fit).

    Raises:
        FitError: on mismatched lengths, non-finite or zero data, or an
            ill-conditioned design matrix
    """
    model = FitModel(model or sweep.fit_model)
    eps = np.asarray(sweep.epsilons, dtype=float)
    v = np.asarray(values, dtype=float)
    if v.shape != eps.shape:
        raise FitError(f"got {v.size} values for {eps.size} epsilons")
    if not np.all(np.isfinite(v)):
        raise FitError("fit values must be finite")
    log_abs = np.abs(np.log(eps))

    if model is FitModel.POWER:
        if exponent is not None:
            coef, residual, radius = _linear_fit([eps ** (-exponent)], v)
            return FitRecord(model, float(coef[0]), float(exponent), None, None, residual,
                             {"A": float(radius[0])})
        if np.any(v == 0.0):
            raise FitError("power fit needs nonzero values")
        signs = np.sign(v)
        if not np.all(signs == signs[0]):
            raise FitError("power fit needs values of one sign")
        sign = float(signs[0])
        coef, residual, radius = _linear_fit([np.ones_like(eps), -np.log(eps)], np.log(np.abs(v)))
        A = sign * float(np.exp(coef[0]))
        return FitRecord(model, A, float(coef[1]), None, None, residual,
                         {"A": abs(A) * float(radius[0]), "p": float(radius[1])})

    if model is FitModel.LOG_PLUS_CONST:
        coef, residual, radius = _linear_fit([log_abs, np.ones_like(eps)], v)
        return FitRecord(model, float(coef[0]), None, float(coef[1]), None, residual,
                         {"A": float(radius[0]), "B": float(radius[1])})

    def solve(p: float):
        return _linear_fit([eps ** (-p), log_abs, np.ones_like(eps)], v)

    if exponent is None:
        if eps.size < 4:
            raise FitError("power_plus_log with a free exponent needs at least 4 points")
        best = optimize.minimize_scalar(
            lambda p: solve(p)[1], bounds=(0.05, 5.0), method="bounded",
            options={"xatol": 1e-10},
        )
        exponent = float(best.x)
    coef, residual, radius = solve(exponent)
    return FitRecord(model, float(coef[0]), float(exponent), float(coef[1]), float(coef[2]),
                     residual, {"A": float(radius[0]), "B": float(radius[1]), "C": float(radius[2])})


def _mode_fields(modes: Iterable[int], geom: GapGeometry, motion: RigidMotion,
                 fluid: FluidParams) -> List[ModeField]:
    return [ModeField(alpha, geom, motion, fluid) for alpha in modes]


def energy_primal(
    modes: Sequence[int],
    geom: GapGeometry,
    motion: RigidMotion,
    fluid: FluidParams,
    quad_tol: float = 1e-8,
    max_level: int = MAX_LEVEL,
) -> float:
    """μ∫_{Ω_r} e(ū):e(ū) dx for ū the sum of the selected mode velocities."""
    selected = _mode_fields(modes, geom, motion, fluid)
    if not selected:
        return 0.0

    def evaluate(level: int) -> np.ndarray:
        grid = volume_grid(geom, level)
        strain = sum(fields.strain_rate(mode, grid.points) for mode in selected)
        return np.array([fluid.mu * grid.weights @ np.einsum("nij,nij->n", strain, strain)])

    refined = quadrature.refine(evaluate, quad_tol, "primal energy", max_level)
    return float(refined.value[0])


def _test_stress_sum(selected: Sequence[ModeField], points: np.ndarray, tol: float) -> np.ndarray:
    return sum(fields.test_stress(mode, points, tol) for mode in selected)


def energy_dual(
    modes: Sequence[int],
    geom: GapGeometry,
    motion: RigidMotion,
    fluid: FluidParams,
    quad_tol: float = 1e-8,
    max_level: int = MAX_LEVEL,
) -> float:
    """
    ∫_{∂Ω_r} ū·S̄n dS - (1/4μ)∫_{Ω_r}(tr S̄² - (tr S̄)²/3) dx.

    The boundary term runs over the upper surface and the side |x'| = r; the
    velocity vanishes on the lower surface.
    """
    selected = _mode_fields(modes, geom, motion, fluid)
    if not selected:
        return 0.0
    pressure_tol = min(quad_tol, 1e-10)
    angular = any(mode.alpha in (3, 4) for mode in selected)

    def evaluate(level: int) -> np.ndarray:
        top = surface_grid(geom, level, ANGLE_NODES * (2**level if angular else 1))
        u_top = sum(fields.velocity(mode, top.points) for mode in selected)
        # outward normal of Ω_r on the upper surface is -(∇h, -1)
        s_top = _test_stress_sum(selected, top.points, pressure_tol)
        boundary = top.weights @ np.einsum("ni,nij,nj->n", u_top, s_top, -top.normals)

        side = lateral_grid(geom, level)
        u_side = sum(fields.velocity(mode, side.points) for mode in selected)
        s_side = _test_stress_sum(selected, side.points, pressure_tol)
        boundary += side.weights @ np.einsum("ni,nij,nj->n", u_side, s_side, side.normals)

        bulk = volume_grid(geom, level, angular_refine=angular)
        s_bulk = _test_stress_sum(selected, bulk.points, pressure_tol)
        trace = np.trace(s_bulk, axis1=-2, axis2=-1)
        density = np.einsum("nij,nij->n", s_bulk, s_bulk) - trace**2 / 3.0
        return np.array([boundary - bulk.weights @ density / (4.0 * fluid.mu)])

    refined = quadrature.refine(evaluate, quad_tol, "dual energy", max_level)
    return float(refined.value[0])


def _deviation(mode: ModeField, points: np.ndarray, tol: float) -> np.ndarray:
    """e(ū) - dev(S̄)/(2μ)."""
    strain = fields.strain_rate(mode, points)
    S = fields.test_stress(mode, points, tol)
    trace = np.trace(S, axis1=-2, axis2=-1)
    dev = S - (trace / 3.0)[:, None, None] * np.eye(3)
    return strain - dev / (2.0 * mode.fluid.mu)


def gap_table(
    geom: GapGeometry,
    motion: RigidMotion,
    fluid: FluidParams,
    modes: Sequence[int],
    quad_tol: float = 1e-8,
    max_level: int = MAX_LEVEL,
) -> GapTable:
    """
    ℓ[α,β] = μ∫_{Ω_r}(D_α, D_β) dx with D_α = e(ū^(α)) - dev(S̄^(α))/(2μ).

    Cells are refined together; a cell is converged once its change is below
    ``quad_tol`` relative to max(|ℓ[α,β]|, sqrt(ℓ[α,α]ℓ[β,β])).

    Raises:
        ConvergenceError: if any cell misses ``quad_tol`` after ``max_level``
            refinements, or a mode-3 radial pressure integral fails
    """
    modes = tuple(modes)
    selected = _mode_fields(modes, geom, motion, fluid)
    n = len(modes)
    angular = any(alpha in (3, 4) for alpha in modes)
    pressure_tol = min(quad_tol, 1e-10)
    previous = None
    converged = np.zeros((n, n), dtype=bool)
    achieved = np.full((n, n), np.inf)

    for level in range(max_level + 1):
        grid = volume_grid(geom, level, angular_refine=angular)
        deviations = [_deviation(mode, grid.points, pressure_tol) for mode in selected]
        current = np.empty((n, n))
        for a in range(n):
            for b in range(a, n):
                value = fluid.mu * grid.weights @ np.einsum(
                    "nij,nij->n", deviations[a], deviations[b]
                )
                current[a, b] = current[b, a] = value
        if previous is not None:
            diag = np.abs(np.diag(current))
            scale = np.maximum(np.abs(current), np.sqrt(np.outer(diag, diag)))
            change = np.abs(current - previous)
            with np.errstate(invalid="ignore", divide="ignore"):
                achieved = np.where(scale > 0.0, change / scale, change)
            converged = np.isfinite(current) & (change <= quad_tol * scale)
            if np.all(converged):
                break
        previous = current

    if not np.all(converged):
        worst = np.unravel_index(int(np.argmax(np.where(converged, -np.inf, achieved))), (n, n))
        label = (f"duality gap cell l[{modes[worst[0]]},{modes[worst[1]]}] at eps={geom.epsilon:g}"
                 f" ({int(np.sum(~converged))} of {n * n} cells unconverged)")
        raise ConvergenceError(label, float(achieved[worst]), quad_tol)
    logger.debug("duality gap at eps=%g converged at level %d", geom.epsilon, level)
    return GapTable(geom.epsilon, modes, current, converged, np.asarray(achieved, dtype=float))


def map_ordered(fn: Callable, items: Sequence, workers: int) -> list:
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, items))


def gap_slope(sweep: SweepSpec, values: Sequence[float], scales: Sequence[float]) -> Optional[float]:
    """
    Log-log slope of |ℓ| against ε; None when the cell is zero by parity
    (|ℓ| <= 1e-9·scale at every ε) or was not computed.
    """
    v = np.abs(np.asarray(values, dtype=float))
    s = np.asarray(scales, dtype=float)
    if not np.all(np.isfinite(v)):
        return None
    if np.all(v <= PARITY_ZERO * s) or np.all(v == 0.0):
        return None
    if np.any(v == 0.0):
        return None
    slope, _ = np.polyfit(np.log(np.asarray(sweep.epsilons)), np.log(v), 1)
    return float(slope)


def duality_gap_sweep(
    sweep: SweepSpec,
    geom: GapGeometry,
    motion: RigidMotion,
    fluid: FluidParams,
    modes: Optional[Sequence[int]] = None,
    max_level: int = MAX_LEVEL,
) -> VerificationReport:
    """
    ℓ[α,β] tables and their log-log slopes across the sweep.

    ``geom`` is a template; its ε is replaced by each sweep value.
    """
    if modes is None:
        modes = fields.admissible_modes(geom)
    modes = tuple(modes)
    for alpha in modes:
        if alpha in (4, 5) and not geom.is_quadratic:
            raise ModeError(f"mode {alpha} is only defined for m = 2")

    def one(eps: float) -> GapTable:
        logger.info("duality gap at eps=%g", eps)
        return gap_table(geom.with_epsilon(eps), motion, fluid, modes, sweep.quad_tol, max_level)

    tables = map_ordered(one, sweep.epsilons, sweep.workers)
    report = VerificationReport(epsilons=list(sweep.epsilons), gap=tables)
    for a_index, a in enumerate(modes):
        for b_index in range(a_index, len(modes)):
            b = modes[b_index]
            values = [t.ell[a_index, b_index] for t in tables]
            scales = [
                math.sqrt(abs(t.ell[a_index, a_index] * t.ell[b_index, b_index])) for t in tables
            ]
            report.slopes[f"{a},{b}"] = gap_slope(sweep, values, scales)
    return report


def test_stress_divergence(mode: ModeField, x, step: float = 1e-3, tol: float = 1e-12) -> np.ndarray:
    """
    Fourth-order central differences of ∇·S̄^(α) at points x, relative to the
    largest single derivative term of each row.

    The step in every direction is ``step``·δ(x'); points must keep a margin
    of 2·step·δ from the upper and lower surfaces.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    gap = geometry.delta(mode.geometry, x[:, :2]).value
    h = step * gap
    terms = np.zeros(x.shape[:1] + (3, 3))
    for direction in range(3):
        shift = np.zeros_like(x)
        shift[:, direction] = h
        samples = [fields.test_stress(mode, x + k * shift, tol) for k in (-2, -1, 1, 2)]
        derivative = (samples[0] - 8.0 * samples[1] + 8.0 * samples[2] - samples[3]) / (
            12.0 * h[:, None, None]
        )
        terms[:, :, direction] = derivative[:, :, direction]
    divergence = np.sum(terms, axis=-1)
    size = np.max(np.abs(terms), axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(size > 0.0, np.abs(divergence) / size, np.abs(divergence))


test_stress_divergence.__test__ = False
