import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.core.errors import PreconditionError
from src.measures.domain import Domain
from src.measures.weight import Weight
from src.partition.vandermonde import log_weighted_vdm

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FeketeConfiguration:
    """Grid-restricted weighted Fekete points of order n"""
    level: int
    points: np.ndarray
    log_wvdm: float
    grid_indices: np.ndarray

    @property
    def diameter_estimate(self) -> float:
        """(weighted VDM)^{2/n^2}"""
        return float(np.exp(2.0 * self.log_wvdm / self.level ** 2))

    def to_dict(self) -> dict:
        return {
            'n': self.level,
            'points': [[float(z.real), float(z.imag)] for z in self.points],
            'log_wvdm': self.log_wvdm,
            'diameter_estimate': self.diameter_estimate,
        }


def _log_distances(grid: np.ndarray, points: np.ndarray) -> np.ndarray:
    with np.errstate(divide='ignore'):
        return np.log(np.abs(grid[:, None] - points[None, :]))


def leja_seed(grid: np.ndarray, log_w: np.ndarray, n: int) -> np.ndarray:
    """
    Weighted Leja sequence of n+1 grid indices.

    Starts at argmax w and adds the node maximizing n log w + sum log|z - z_k|;
    ties go to the smallest index.
    """
    chosen = [int(np.argmax(log_w))]
    score = n * log_w + _log_distances(grid, grid[chosen])[:, 0]
    for _ in range(n):
        score[chosen] = -np.inf
        index = int(np.argmax(score))
        chosen.append(index)
        with np.errstate(divide='ignore'):
            score = score + np.log(np.abs(grid - grid[index]))
    return np.array(chosen)


def exchange_sweeps(grid: np.ndarray, log_w: np.ndarray, indices: np.ndarray, n: int,
                    max_sweeps: int = 50) -> np.ndarray:
    """
    Re-optimize each point over the grid holding the others fixed.

    Points are visited in ascending position order; a move is taken only if
    it improves the score by more than 1e-12 relative. Stops after a sweep
    with no move.
    """
    indices = indices.copy()
    for sweep in range(max_sweeps):
        moved = False
        for i in range(indices.size):
            others = np.delete(indices, i)
            score = n * log_w + np.sum(_log_distances(grid, grid[others]), axis=1)
            current = score[indices[i]]
            best = int(np.argmax(score))
            if score[best] > current + 1e-12 * max(1.0, abs(current)):
                indices[i] = best
                moved = True
        logger.debug(f"Exchange sweep {sweep + 1}: {'moved' if moved else 'stable'}")
        if not moved:
            break
    return indices


def fekete_search(domain: Domain, w: Weight, n: int, grid: Optional[np.ndarray] = None,
                  grid_factor: int = 40, max_sweeps: int = 50) -> FeketeConfiguration:
    """
    Weighted Fekete points of order n restricted to a grid.

    Args:
        domain: Domain; its grid(grid_factor*(n+1)) is used when grid is None
        w: Weight
        n: Order; n+1 points are returned
        grid: Explicit candidate nodes
        grid_factor: Grid nodes per component per point
        max_sweeps: Exchange sweep cap

    Raises:
        PreconditionError: fewer than n+1 grid nodes with positive weight
    """
    if n < 1:
        raise PreconditionError(f"Fekete search needs n >= 1, got {n}")
    if grid is None:
        grid = domain.grid(grid_factor * (n + 1))
    grid = np.atleast_1d(np.asarray(grid, dtype=complex))
    log_w = w.log_value(grid)
    if int(np.sum(np.isfinite(log_w))) < n + 1:
        raise PreconditionError(f"Need at least {n + 1} grid nodes with positive weight")

    indices = exchange_sweeps(grid, log_w, leja_seed(grid, log_w, n), n, max_sweeps)
    points = grid[indices]
    order = np.lexsort((points.imag, points.real))
    points, indices = points[order], indices[order]
    value = log_weighted_vdm(points, w, n)
    logger.debug(f"Fekete search at level {n}: log weighted VDM {value:.12g}")
    return FeketeConfiguration(n, points, float(value), indices)
