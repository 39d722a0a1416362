import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from src.core.errors import DomainError, PreconditionError
from src.core.precision import relative_gap
from src.measures.distances import WASSERSTEIN_ANGLE, WASSERSTEIN_LINE, weak_star_distance
from src.measures.domain import CIRCLE, INTERVAL_UNION, Domain
from src.measures.quadrature import QuadratureMeasure
from src.measures.weight import Weight
from .fekete import FeketeConfiguration, fekete_search
from .solver import EquilibriumMeasure, equilibrium_solve

logger = logging.getLogger(__name__)


def check_increasing(n_list: Sequence[int]) -> List[int]:
    levels = [int(n) for n in n_list]
    if not levels:
        raise PreconditionError("Level list is empty")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise PreconditionError(f"Level list must be strictly increasing, got {levels}")
    if levels[0] < 1:
        raise PreconditionError("Levels must be at least 1")
    return levels


def extrapolate_limit(n_list: Sequence[int], values: Sequence[float]) -> float:
    """
    Limit of a positive sequence with O(log n / n) corrections.

    log v_n is fitted by least squares in {1, log n / n, 1/n}; two levels
    use {1, 1/n} and a single level is returned as is.
    """
    n = np.asarray(n_list, dtype=float)
    logs = np.log(np.asarray(values, dtype=float))
    if n.size == 1:
        return float(np.exp(logs[0]))
    if n.size == 2:
        basis = np.column_stack([np.ones_like(n), 1.0 / n])
    else:
        basis = np.column_stack([np.ones_like(n), np.log(n) / n, 1.0 / n])
    coefficients, *_ = np.linalg.lstsq(basis, logs, rcond=None)
    return float(np.exp(coefficients[0]))


@dataclass(eq=False)
class DiameterReport:
    levels: List[int]
    estimates: List[float]
    log_wvdm: List[float]
    extrapolated: float
    energy_delta: Optional[float]
    relative_gap: Optional[float]
    configurations: List[FeketeConfiguration] = field(default_factory=list, repr=False)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'n': self.levels,
            'log_wvdm': self.log_wvdm,
            'diameter_estimate': self.estimates,
        }, columns=['n', 'log_wvdm', 'diameter_estimate'])

    def to_dict(self) -> dict:
        return {
            'levels': self.levels,
            'estimates': self.estimates,
            'extrapolated': self.extrapolated,
            'energy_delta': self.energy_delta,
            'relative_gap': self.relative_gap,
        }


def transfinite_diameter(domain: Domain, w: Weight, n_list: Sequence[int], grid=None,
                         grid_factor: int = 40, max_sweeps: int = 50,
                         equilibrium: Optional[EquilibriumMeasure] = None,
                         grid_size: int = 800) -> DiameterReport:
    """
    delta^w(E) from Fekete configurations, cross-checked by the energy route.

    The per-n estimates are (weighted VDM)^{2/n^2}. The energy route
    exp(-I^w) runs on one-dimensional domains only; its relative gap to the
    extrapolated Fekete value is reported, never merged.
    """
    levels = check_increasing(n_list)
    configurations = [fekete_search(domain, w, n, grid, grid_factor, max_sweeps) for n in levels]
    estimates = [c.diameter_estimate for c in configurations]
    extrapolated = extrapolate_limit(levels, estimates)

    energy_delta, gap = None, None
    if equilibrium is None and domain.kind in (INTERVAL_UNION, CIRCLE):
        equilibrium = equilibrium_solve(domain, w, grid_size)
    if equilibrium is not None:
        energy_delta = equilibrium.delta_w
        gap = relative_gap(extrapolated, energy_delta)
        logger.info(f"Transfinite diameter: Fekete {extrapolated:.8g}, energy {energy_delta:.8g}, "
                    f"relative gap {gap:.3e}")
    return DiameterReport(levels, estimates, [c.log_wvdm for c in configurations], extrapolated,
                          energy_delta, gap, configurations)


@dataclass(eq=False)
class ConvergenceReport:
    """Weak-* distance of the Fekete empirical measures to the equilibrium measure"""
    levels: List[int]
    distances: List[float]
    mode: str

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'n': self.levels, 'distance': self.distances}, columns=['n', 'distance'])


def fekete_empirical_convergence(domain: Domain, w: Weight, n_list: Sequence[int],
                                 equilibrium: Optional[EquilibriumMeasure] = None,
                                 grid_size: int = 800, grid_factor: int = 40) -> ConvergenceReport:
    """
    Distance of (1/(n+1)) sum delta_{z_k} over Fekete points to mu_eq^w for each n.

    Intervals use W1 on the line, circles W1 in arc length.
    """
    if domain.kind == INTERVAL_UNION:
        mode = WASSERSTEIN_LINE
    elif domain.kind == CIRCLE:
        mode = WASSERSTEIN_ANGLE
    else:
        raise DomainError(f"Empirical convergence needs a one-dimensional domain, got '{domain.kind}'")
    levels = check_increasing(n_list)
    if equilibrium is None:
        equilibrium = equilibrium_solve(domain, w, grid_size)
    target = equilibrium.as_measure()
    if mode == WASSERSTEIN_ANGLE and domain.center != 0:
        target = QuadratureMeasure(target.nodes - domain.center, target.weights)

    distances = []
    for n in levels:
        points = fekete_search(domain, w, n, grid_factor=grid_factor).points
        if mode == WASSERSTEIN_ANGLE:
            points = points - domain.center
        distance = weak_star_distance(QuadratureMeasure.empirical(points), target, mode)
        logger.info(f"Fekete empirical measure at n={n}: distance {distance:.6g}")
        distances.append(distance)
    return ConvergenceReport(levels, distances, mode)
