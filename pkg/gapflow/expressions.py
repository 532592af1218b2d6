"""
Symbolic construction of the neck fields.

Each decomposition mode α is written once as a sympy expression in the
coordinates (x1, x2, x3) and the parameters (ε, κ, R, μ, U, ω). Every
derivative the package needs is taken symbolically and compiled with
``sympy.lambdify``; finite differences appear only in the tests.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Dict, Sequence, Tuple

import numpy as np
import sympy as sp

from .errors import ConstantsError, ModeError

logger = logging.getLogger(__name__)

X1, X2, X3 = sp.symbols("x1 x2 x3", real=True)
EPS, KAPPA, RADIUS, MU = sp.symbols("epsilon kappa R mu", positive=True)
U1, U2, U3 = sp.symbols("U1 U2 U3", real=True)
W1, W2, W3 = sp.symbols("omega1 omega2 omega3", real=True)

COORDS = (X1, X2, X3)
PARAMS = (EPS, KAPPA, RADIUS, MU, U1, U2, U3, W1, W2, W3)
MODES = (1, 2, 3, 4, 5)
QUADRATIC_ONLY_MODES = (4, 5)

HALF = sp.Rational(1, 2)
QUARTER = sp.Rational(1, 4)

# unique (j, k) pairs of the symmetric second derivatives
HESSIAN_PAIRS = tuple((j, k) for j in range(3) for k in range(j, 3))


@lru_cache(maxsize=None)
def correction_constants() -> Dict[str, sp.Expr]:
    """
    Solve the undetermined-coefficient systems for a1, a2 and b1..b4.

    The squeeze constants follow from matching the boundary flux and the
    pressure of mode 3; the rotation constants from the analogous conditions
    of mode 4. Results are exact rationals (b2, b4 carry 1/κ).

    Raises:
        ConstantsError: if either system is singular
    """
    a1, a2, b1, b2, b3, b4 = sp.symbols("a1 a2 b1 b2 b3 b4")
    squeeze = sp.solve(
        [1 - (2 * a1 + a2) / 4, 2 * a1 + 3 * a2], [a1, a2], dict=True
    )
    rotation = sp.solve(
        [
            1 + (3 * b1 + b3) / 4,
            3 * b1 + 3 * b3 - 8 * KAPPA * b2,
            b1 + 4 * KAPPA * b4,
            b2 - b4 / 2,
        ],
        [b1, b2, b3, b4],
        dict=True,
    )
    if len(squeeze) != 1 or set(squeeze[0]) != {a1, a2}:
        raise ConstantsError("squeeze correction system has no unique solution")
    if len(rotation) != 1 or set(rotation[0]) != {b1, b2, b3, b4}:
        raise ConstantsError("rotation correction system has no unique solution")
    solved = {**squeeze[0], **rotation[0]}
    return {str(symbol): sp.simplify(value) for symbol, value in solved.items()}


def exact_exponent(m: float) -> sp.Expr:
    """Rational sympy value of the convexity exponent."""
    return sp.nsimplify(m, rational=True)


def gap_expression(m: sp.Expr) -> sp.Expr:
    return EPS + 2 * KAPPA * (X1**2 + X2**2) ** (m / 2)


def from_lower_surface(expr: sp.Expr, gap: sp.Expr) -> sp.Expr:
    """∫_{-δ/2}^{x3} expr dx3 for an expression polynomial in x3."""
    primitive = sp.Poly(expr, X3).integrate().as_expr()
    return primitive - primitive.subs(X3, -gap / 2)


@dataclass(frozen=True)
class ModeExpressions:
    """Symbolic fields of one mode at a fixed convexity exponent."""

    alpha: int
    m: sp.Expr
    gap: sp.Expr
    phi: Tuple[sp.Expr, ...]
    correction: Tuple[sp.Expr, ...]
    velocity: Tuple[sp.Expr, ...]
    pressure: sp.Expr
    pressure_gradient: Tuple[sp.Expr, ...]
    residual_rhs: Tuple[sp.Expr, ...]
    divergence_defect: sp.Expr = sp.Integer(0)
    residual_defect: Tuple[sp.Expr, ...] = field(
        default=(sp.Integer(0), sp.Integer(0), sp.Integer(0))
    )


def build_mode(alpha: int, m: sp.Expr) -> ModeExpressions:
    """
    Assemble φ_α, 𝓕_α, ū^(α) = φ_α(1/2 + 𝔊) + (𝔊² - 1/4)𝓕_α and p̄^(α).

    For α = 3 the returned pressure omits the radial integral term
    a1 μ U3 J(|x'|); its gradient (2 a1 μ U3 x_i/δ³ for i = 1, 2) is included
    in ``pressure_gradient``.
    """
    if alpha not in MODES:
        raise ModeError(f"mode index {alpha} is not in 1..5")
    if alpha in QUADRATIC_ONLY_MODES and m != 2:
        raise ModeError(f"mode {alpha} is only defined for m = 2, got m = {m}")

    k = correction_constants()
    d = gap_expression(m)
    d1, d2 = sp.diff(d, X1), sp.diff(d, X2)
    G = X3 / d
    radial = X1 * d1 + X2 * d2
    zero = sp.Integer(0)
    extra_gradient = (zero, zero, zero)
    divergence_defect = zero
    residual_defect = (zero, zero, zero)

    if alpha == 1:
        c = U1 - W2 * RADIUS
        phi = (c, zero, zero)
        correction = (zero, zero, c * d1 / 2)
        pressure = MU * c * X3 * d1 / d**2
        rhs = tuple(-MU * c * X3 * sp.diff(d1 / d**2, xi) for xi in (X1, X2)) + (zero,)
    elif alpha == 2:
        c = U2 + W1 * RADIUS
        phi = (zero, c, zero)
        correction = (zero, zero, c * d2 / 2)
        pressure = MU * c * X3 * d2 / d**2
        rhs = tuple(-MU * c * X3 * sp.diff(d2 / d**2, xi) for xi in (X1, X2)) + (zero,)
    elif alpha == 3:
        a1, a2 = k["a1"], k["a2"]
        shape = a1 * radial / d + a2
        phi = (zero, zero, U3)
        correction = (U3 * a1 * X1 / d, U3 * a1 * X2 / d, U3 * G * shape)
        pressure = MU * U3 * 3 * X3**2 / d**3 * shape
        extra_gradient = (2 * a1 * MU * U3 * X1 / d**3, 2 * a1 * MU * U3 * X2 / d**3, zero)
        rhs = tuple(
            -3 * MU * U3 * X3**2 * sp.diff(shape / d**3, xi) for xi in (X1, X2)
        ) + (zero,)
    elif alpha == 4:
        b1, b2, b3, b4 = k["b1"], k["b2"], k["b3"], k["b4"]
        swirl = W2 * X1 - W1 * X2
        shape = b1 * radial / d + b3
        phi = (zero, zero, -swirl)
        correction = (
            b1 * X1 * swirl / d + b2 * W2,
            b1 * X2 * swirl / d - b2 * W1,
            swirl * shape * G,
        )
        pressure = MU * swirl / d**2 * (3 * X3**2 * shape / d + b4)
        rhs = tuple(
            -3 * MU * X3**2 * sp.diff(swirl * shape / d**3, xi) for xi in (X1, X2)
        ) + (zero,)
    else:
        phi1 = W2 * (X3 - EPS / 2) - W3 * X2
        phi2 = -W1 * (X3 - EPS / 2) + W3 * X1
        tilt = W1 * d2 - W2 * d1
        phi = (phi1, phi2, zero)
        correction = (zero, zero, phi1 * d1 / 2 + phi2 * d2 / 2 + d * tilt / 4)
        pressure = zero
        rhs = (zero, zero, MU / d**2 * (phi1 * d1 + phi2 * d2) + MU / (2 * d) * tilt)
        divergence_defect = tilt / 2 * (G - G**2 + QUARTER)
        residual_defect = (2 * MU * W2 / d, -2 * MU * W1 / d, -2 * MU * X3 / d**2 * tilt)

    velocity = tuple(
        p * (HALF + G) + (G**2 - QUARTER) * f for p, f in zip(phi, correction)
    )
    pressure_gradient = tuple(
        sp.diff(pressure, xi) + extra for xi, extra in zip(COORDS, extra_gradient)
    )
    return ModeExpressions(
        alpha=alpha,
        m=m,
        gap=d,
        phi=phi,
        correction=correction,
        velocity=velocity,
        pressure=pressure,
        pressure_gradient=pressure_gradient,
        residual_rhs=rhs,
        divergence_defect=divergence_defect,
        residual_defect=residual_defect,
    )


def _compile(expressions: Sequence[sp.Expr]) -> Callable:
    return sp.lambdify(COORDS + PARAMS, list(expressions), modules="numpy", cse=True)


class CompiledMode:
    """
    Numerical kernels for one (mode, m) pair.

    Groups of expressions are compiled on first use; every evaluator takes
    points of shape (N, 3) and the parameter tuple and returns arrays with a
    trailing component axis.
    """

    def __init__(self, expressions: ModeExpressions):
        self.expressions = expressions
        # |x'|^(m-k) terms are not polynomial when m/2 is not an integer
        self.smooth_at_apex = bool((expressions.m / 2).is_integer)

    @cached_property
    def _gradient_exprs(self):
        return [sp.diff(u, xj) for u in self.expressions.velocity for xj in COORDS]

    @cached_property
    def _hessian_exprs(self):
        return [
            sp.diff(u, COORDS[j], COORDS[k])
            for u in self.expressions.velocity
            for j, k in HESSIAN_PAIRS
        ]

    @cached_property
    def _phi(self):
        return _compile(self.expressions.phi)

    @cached_property
    def _correction(self):
        return _compile(self.expressions.correction)

    @cached_property
    def _velocity(self):
        return _compile(self.expressions.velocity)

    @cached_property
    def _gradient(self):
        return _compile(self._gradient_exprs)

    @cached_property
    def _hessian(self):
        return _compile(self._hessian_exprs)

    @cached_property
    def _pressure(self):
        return _compile([self.expressions.pressure])

    @cached_property
    def _pressure_gradient(self):
        return _compile(self.expressions.pressure_gradient)

    @cached_property
    def _residual_rhs(self):
        return _compile(self.expressions.residual_rhs)

    @cached_property
    def _defects(self):
        return _compile((self.expressions.divergence_defect,) + self.expressions.residual_defect)

    @cached_property
    def _stokes_residual_exprs(self):
        # μΔū_k - ∂_k p̄ for k = 1, 2, 3
        lookup = {pair: n for n, pair in enumerate(HESSIAN_PAIRS)}
        hess = self._hessian_exprs
        laplacians = [
            sum(hess[6 * i + lookup[(j, j)]] for j in range(3)) for i in range(3)
        ]
        return [MU * lap - dp for lap, dp in zip(laplacians, self.expressions.pressure_gradient)]

    @cached_property
    def _closure_exprs(self):
        # rows 1, 2 close through S_k3 = S_3k = -Φ_k, row 3 through S_33
        residual = self._stokes_residual_exprs
        gap = self.expressions.gap
        flux = [-from_lower_surface(residual[k], gap) for k in range(2)]
        tail = residual[2] + sp.diff(flux[0], X1) + sp.diff(flux[1], X2)
        return flux + [-from_lower_surface(tail, gap)]

    @cached_property
    def _closure(self):
        return _compile(self._closure_exprs)

    @staticmethod
    def _stack(values, shape) -> np.ndarray:
        return np.stack([np.broadcast_to(np.asarray(v, dtype=float), shape) for v in values], axis=-1)

    def _call(self, fn, x1, x2, x3, params) -> np.ndarray:
        shape = np.broadcast_shapes(np.shape(x1), np.shape(x2), np.shape(x3))
        with np.errstate(divide="ignore", invalid="ignore"):
            values = fn(x1, x2, x3, *params)
        return self._stack(values, shape)

    def phi(self, x, params):
        return self._call(self._phi, x[..., 0], x[..., 1], x[..., 2], params)

    def correction(self, x, params):
        return self._call(self._correction, x[..., 0], x[..., 1], x[..., 2], params)

    def velocity(self, x, params):
        return self._call(self._velocity, x[..., 0], x[..., 1], x[..., 2], params)

    def gradient(self, x, params):
        """∂_j ū_i with shape (..., 3, 3), row i = component."""
        flat = self._call(self._gradient, x[..., 0], x[..., 1], x[..., 2], params)
        return flat.reshape(flat.shape[:-1] + (3, 3))

    def hessian(self, x, params):
        """∂_j ∂_k ū_i with shape (..., 3, 3, 3)."""
        flat = self._call(self._hessian, x[..., 0], x[..., 1], x[..., 2], params)
        out = np.empty(flat.shape[:-1] + (3, 3, 3))
        for i in range(3):
            for n, (j, k) in enumerate(HESSIAN_PAIRS):
                out[..., i, j, k] = flat[..., 6 * i + n]
                out[..., i, k, j] = flat[..., 6 * i + n]
        return out

    def pressure(self, x, params):
        return self._call(self._pressure, x[..., 0], x[..., 1], x[..., 2], params)[..., 0]

    def pressure_gradient(self, x, params):
        return self._call(self._pressure_gradient, x[..., 0], x[..., 1], x[..., 2], params)

    def residual_rhs(self, x, params):
        return self._call(self._residual_rhs, x[..., 0], x[..., 1], x[..., 2], params)

    def defects(self, x, params):
        return self._call(self._defects, x[..., 0], x[..., 1], x[..., 2], params)

    def closure(self, x, params):
        """
        Entries (S_13, S_23, S_33) that cancel ∇·(2μe(ū) - p̄𝕀).

        Each is an x3-integral from the lower surface x3 = -δ/2, so only
        values inside the gap enter.
        """
        return self._call(self._closure, x[..., 0], x[..., 1], x[..., 2], params)


@lru_cache(maxsize=None)
def compiled_mode(alpha: int, m: float) -> CompiledMode:
    """Cached kernels for mode ``alpha`` at convexity exponent ``m``."""
    exact_m = exact_exponent(m)
    logger.debug("building symbolic fields for mode %d, m = %s", alpha, exact_m)
    return CompiledMode(build_mode(alpha, exact_m))
