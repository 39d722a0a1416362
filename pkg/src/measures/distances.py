import logging

import numpy as np
from scipy.stats import wasserstein_distance

from src.core.errors import DomainError, PreconditionError
from .quadrature import QuadratureMeasure

logger = logging.getLogger(__name__)

WASSERSTEIN_LINE = 'wasserstein1-line'
WASSERSTEIN_ANGLE = 'wasserstein1-angle'
MOMENT = 'moment-k'

DISTANCE_MODES = (WASSERSTEIN_LINE, WASSERSTEIN_ANGLE, MOMENT)


def _check_probability(measure: QuadratureMeasure, name: str, tol: float = 1e-9):
    if abs(measure.total_mass - 1.0) > tol:
        raise PreconditionError(f"Measure '{name}' is not a probability measure "
                                f"(mass {measure.total_mass:.12g})")


def _angles_on_circle(measure: QuadratureMeasure, center: complex, radius: float, tol: float):
    offsets = measure.nodes - center
    if np.any(np.abs(np.abs(offsets) - radius) > tol * max(1.0, radius)):
        raise DomainError("wasserstein1-angle needs both measures on one circle")
    return np.mod(np.angle(offsets), 2.0 * np.pi)


def _cdf_on(edges: np.ndarray, angles: np.ndarray, weights: np.ndarray) -> np.ndarray:
    order = np.argsort(angles, kind='stable')
    sorted_angles = angles[order]
    cumulative = np.concatenate(([0.0], np.cumsum(weights[order])))
    return cumulative[np.searchsorted(sorted_angles, edges, side='right')]


def circular_wasserstein(a: QuadratureMeasure, b: QuadratureMeasure, center: complex = 0j,
                         tol: float = 1e-9) -> float:
    """
    W1 between two measures on one circle, in arc length.

    On the circle W1 = min_c int |F_a - F_b - c| dtheta; the minimizing c is
    a weighted median of the CDF difference.
    """
    radius = float(np.abs(a.nodes[0] - center))
    ta = _angles_on_circle(a, center, radius, tol)
    tb = _angles_on_circle(b, center, radius, tol)
    edges = np.unique(np.concatenate(([0.0], ta, tb, [2.0 * np.pi])))
    left = edges[:-1]
    lengths = np.diff(edges)
    difference = _cdf_on(left, ta, a.weights) - _cdf_on(left, tb, b.weights)

    order = np.argsort(difference, kind='stable')
    cumulative = np.cumsum(lengths[order])
    median = difference[order][np.searchsorted(cumulative, 0.5 * cumulative[-1])]
    return float(radius * np.sum(lengths * np.abs(difference - median)))


def moment_distance(a: QuadratureMeasure, b: QuadratureMeasure, k: int = 8) -> float:
    """max over 1 <= j <= k of |int z^j da - int z^j db|"""
    gaps = []
    for j in range(1, int(k) + 1):
        gaps.append(abs(a.integrate(a.nodes ** j) - b.integrate(b.nodes ** j)))
    return float(max(gaps))


def weak_star_distance(a: QuadratureMeasure, b: QuadratureMeasure, mode: str = WASSERSTEIN_LINE,
                       k: int = 8) -> float:
    """
    Distance between two probability measures used as a weak-* proxy.

    Args:
        a, b: Probability measures (mass within 1e-9 of 1)
        mode: 'wasserstein1-line' (supports on the real axis),
            'wasserstein1-angle' (supports on one circle centered at 0),
            'moment-k' (general planar supports)
        k: Highest moment compared in moment-k mode

    Returns:
        Nonnegative distance; 0 for identical measures
    """
    if mode not in DISTANCE_MODES:
        raise DomainError(f"Unknown distance mode '{mode}'")
    _check_probability(a, 'a')
    _check_probability(b, 'b')

    if mode == WASSERSTEIN_LINE:
        if np.any(np.abs(a.nodes.imag) > 1e-12) or np.any(np.abs(b.nodes.imag) > 1e-12):
            raise DomainError("wasserstein1-line needs both supports on the real line")
        return float(wasserstein_distance(a.nodes.real, b.nodes.real, a.weights, b.weights))
    if mode == WASSERSTEIN_ANGLE:
        return circular_wasserstein(a, b)
    return moment_distance(a, b, k)
