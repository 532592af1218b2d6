"""
Quadrature building blocks.

Neck integrands vary on the boundary-layer scale L = (ε/2κ)^(1/m) near the apex
and on the scale r far from it. Radial integrals therefore use the map
s = L·sinh(w): composite Gauss–Legendre panels of unit width in w put nodes
geometrically dense near s = 0 without any adaptive bookkeeping.
"""

import logging
from functools import lru_cache
from typing import Callable, NamedTuple, Sequence, Tuple

import numpy as np
from scipy import integrate

from .errors import ConvergenceError

logger = logging.getLogger(__name__)

START_ORDER = 8
MAX_ORDER = 128
CHUNK_ROWS = 2048


class Refined(NamedTuple):
    value: np.ndarray
    error: float
    level: int


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss–Legendre nodes and weights on [-1, 1] (cached, read-only)."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def adaptive_quad(
    func: Callable[[float], float],
    a: float,
    b: float,
    tol: float,
    label: str,
    abs_floor: float = 0.0,
) -> Tuple[float, float]:
    """
    Adaptive Gauss–Kronrod quadrature of a scalar integrand.

    Returns:
        Tuple of (value, absolute error estimate)

    Raises:
        ConvergenceError: if QUADPACK flags a failure or the error estimate
            exceeds the requested tolerance
    """
    result = integrate.quad(
        func, a, b, epsabs=abs_floor, epsrel=tol, limit=200, full_output=1
    )
    value, abserr = float(result[0]), float(result[1])
    achieved = abserr / abs(value) if value != 0.0 else abserr
    if len(result) > 3 or abserr > max(tol * abs(value), abs_floor):
        raise ConvergenceError(label, achieved, tol)
    return value, abserr


def panel_quad(
    func: Callable[[float], float],
    breakpoints: Sequence[float],
    tol: float,
    label: str,
) -> Tuple[float, float]:
    """Sum of adaptive_quad over consecutive panels [b_k, b_(k+1)]."""
    total = 0.0
    error = 0.0
    for a, b in zip(breakpoints[:-1], breakpoints[1:]):
        value, abserr = adaptive_quad(func, a, b, tol, label, abs_floor=0.0)
        total += value
        error += abserr
    if error > tol * abs(total) and error > 0.0:
        raise ConvergenceError(label, error / abs(total) if total else error, tol)
    return total, error


def geometric_breakpoints(upper: float, lower: float = 0.0, ratio: float = 2.0) -> list:
    """Breakpoints lower, 1, 2, 4, ... up to upper for a scaled variable."""
    points = [lower]
    edge = max(1.0, lower * ratio) if lower > 0.0 else 1.0
    while edge < upper:
        points.append(edge)
        edge *= ratio
    points.append(upper)
    return points


def _panels(w_lo: np.ndarray, w_hi: np.ndarray, order: int):
    width = float(np.max(np.abs(w_hi - w_lo))) if np.size(w_hi) else 0.0
    count = max(1, int(np.ceil(width)))
    nodes, weights = gauss_legendre(order)
    fractions = np.arange(count + 1) / count
    edges = w_lo[..., None] + (w_hi - w_lo)[..., None] * fractions
    mid = 0.5 * (edges[..., 1:] + edges[..., :-1])
    half = 0.5 * (edges[..., 1:] - edges[..., :-1])
    w = mid[..., None] + half[..., None] * nodes
    wt = half[..., None] * weights
    return w.reshape(w.shape[:-2] + (-1,)), wt.reshape(wt.shape[:-2] + (-1,))


def sinh_rule(scale: float, upper: float, order: int, lower: float = 0.0):
    """
    Nodes and weights for ∫_lower^upper f(s) ds under s = scale·sinh(w).

    Returns:
        Tuple of (nodes, weights) as 1-D arrays
    """
    w_lo = np.asarray(np.arcsinh(lower / scale))
    w_hi = np.asarray(np.arcsinh(upper / scale))
    w, wt = _panels(w_lo, w_hi, order)
    return scale * np.sinh(w), wt * scale * np.cosh(w)


def refine(
    evaluate: Callable[[int], np.ndarray],
    tol: float,
    label: str,
    max_level: int = 4,
) -> Refined:
    """
    Evaluate at successive refinement levels until two agree to ``tol``.

    Agreement is measured on the largest absolute change relative to the
    largest absolute value, so one call can refine a whole vector of outputs.

    Raises:
        ConvergenceError: if level ``max_level`` is reached without agreement
    """
    previous = np.asarray(evaluate(0), dtype=float)
    achieved = np.inf
    for level in range(1, max_level + 1):
        current = np.asarray(evaluate(level), dtype=float)
        change = float(np.max(np.abs(current - previous))) if current.size else 0.0
        size = float(np.max(np.abs(current))) if current.size else 0.0
        achieved = change / size if size > 0.0 else change
        logger.debug("%s: level %d relative change %.3e", label, level, achieved)
        if change <= tol * size:
            return Refined(current, achieved, level)
        previous = current
    raise ConvergenceError(label, achieved, tol)


def batch_integral(
    integrand: Callable[[np.ndarray, slice], np.ndarray],
    lower,
    upper,
    scale: float,
    tol: float,
    label: str,
    start_order: int = START_ORDER,
    max_order: int = MAX_ORDER,
) -> Refined:
    """
    Many 1-D integrals ∫_lower[n]^upper[n] g_n(t) dt at once.

    ``integrand(t, rows)`` receives nodes of shape (len(rows), K) and the
    slice of rows they belong to, and returns values of the same shape.
    Limits may be given in either order; the integral is signed. Each row is
    split into the same number of sinh-mapped Gauss–Legendre panels and the
    order is doubled until the batch agrees with the previous order.

    Raises:
        ConvergenceError: if ``max_order`` is reached without agreement
    """
    upper = np.asarray(upper, dtype=float).ravel()
    lower = np.broadcast_to(np.asarray(lower, dtype=float), upper.shape).ravel()
    w_lo = np.arcsinh(lower / scale)
    w_hi = np.arcsinh(upper / scale)

    def evaluate(order: int) -> np.ndarray:
        out = np.empty(upper.shape, dtype=float)
        for start in range(0, upper.size, CHUNK_ROWS):
            rows = slice(start, min(start + CHUNK_ROWS, upper.size))
            w, wt = _panels(w_lo[rows], w_hi[rows], order)
            t = scale * np.sinh(w)
            values = integrand(t, rows)
            out[rows] = np.sum(values * wt * scale * np.cosh(w), axis=-1)
        return out

    order = start_order
    previous = evaluate(order)
    achieved = np.inf
    while order < max_order:
        order *= 2
        current = evaluate(order)
        change = float(np.max(np.abs(current - previous))) if current.size else 0.0
        size = float(np.max(np.abs(current))) if current.size else 0.0
        achieved = change / size if size > 0.0 else change
        if change <= tol * size:
            logger.debug("%s: %d rows converged at order %d", label, upper.size, order)
            return Refined(current, achieved, order)
        previous = current
    raise ConvergenceError(label, achieved, tol)
