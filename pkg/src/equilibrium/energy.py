import logging

import numpy as np

from src.core.errors import PreconditionError
from src.measures.quadrature import QuadratureMeasure
from src.measures.weight import Weight
from src.partition.vandermonde import log_weighted_vdm

logger = logging.getLogger(__name__)

# mean of log 1/|x - y| over a cell of width h against itself is log(1/h) + 3/2
CELL_SELF_ENERGY = 1.5


def discrete_energy(points, w: Weight) -> float:
    """
    (1/(n(n+1))) sum_{k != l} log 1/(|z_k - z_l| w(z_k) w(z_l)) for n+1 points.

    Equal to -2 log(weighted VDM) / (n(n+1)).
    """
    z = np.asarray(points, dtype=complex).reshape(-1)
    if z.size < 2:
        raise PreconditionError("Discrete energy needs at least two points")
    n = z.size - 1
    log_wvdm = log_weighted_vdm(z, w, n)
    if not np.isfinite(log_wvdm):
        raise PreconditionError("Discrete energy needs distinct points with positive weight")
    return -2.0 * log_wvdm / (n * (n + 1))


def energy_matrix(nodes: np.ndarray, widths: np.ndarray) -> np.ndarray:
    """Log kernel log 1/|x_i - x_j| with cell-averaged diagonal log(1/h_i) + 3/2"""
    nodes = np.asarray(nodes, dtype=complex)
    widths = np.asarray(widths, dtype=float)
    distances = np.abs(nodes[:, None] - nodes[None, :])
    np.fill_diagonal(distances, 1.0)
    kernel = -np.log(distances)
    np.fill_diagonal(kernel, -np.log(widths) + CELL_SELF_ENERGY)
    return kernel


def quadratic_energy(masses: np.ndarray, kernel: np.ndarray, field: np.ndarray) -> float:
    """m^T K m + 2 q^T m"""
    return float(masses @ (kernel @ masses) + 2.0 * field @ masses)


def continuous_energy(measure: QuadratureMeasure, w: Weight, cell_widths) -> float:
    """
    Weighted energy I^w of a cell-discretized probability measure.

    Args:
        measure: Probability measure with one atom per cell midpoint
        w: Weight
        cell_widths: Cell widths (length or arc length)

    Raises:
        PreconditionError: measure is not a probability measure
    """
    if not measure.is_probability():
        raise PreconditionError(f"Energy needs a probability measure (mass {measure.total_mass:.12g})")
    widths = np.asarray(cell_widths, dtype=float).reshape(-1)
    if widths.size != measure.size or np.any(widths <= 0):
        raise PreconditionError("Need one positive cell width per node")
    masses = measure.weights
    alive = masses > 0
    field = -w.log_value(measure.nodes[alive])
    kernel = energy_matrix(measure.nodes[alive], widths[alive])
    return quadratic_energy(masses[alive], kernel, field)
