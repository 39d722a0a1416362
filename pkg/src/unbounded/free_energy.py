import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.special import gammaln

from src.core.errors import PreconditionError
from src.core.parallel import ordered_map
from src.core.precision import log_factorial, relative_gap
from src.equilibrium.diameter import check_increasing, extrapolate_limit
from src.equilibrium.solver import equilibrium_solve
from src.measures.domain import Domain
from src.measures.weight import Weight
from .restriction import RestrictionReport, choose_restriction, restricted_norm_compare, validate_field

logger = logging.getLogger(__name__)


def hermite_log_norm_product(n: int, scale: float = 1.0) -> float:
    """
    Closed-form log Z_n on the line for Q = scale x^2.

    Monic Hermite-type norms for e^{-c x^2}, c = 2n scale:
    ||pi_k||^2 = sqrt(pi/c) k! (2c)^{-k}.
    """
    if scale <= 0:
        raise PreconditionError("Closed-form product needs a positive quadratic coefficient")
    c = 2.0 * n * scale
    k = np.arange(n + 1)
    log_norms_sq = 0.5 * np.log(np.pi / c) + gammaln(k + 1) - k * np.log(2.0 * c)
    return log_factorial(n + 1) + float(np.sum(log_norms_sq))


@dataclass(eq=False)
class FreeEnergySeries:
    """Free energies on the line and on the restriction intervals, per level"""
    levels: List[int]
    half_widths: List[float]
    log_z_full: List[float]
    log_z_restricted: List[float]
    delta_w_energy: Optional[float]
    reports: List[RestrictionReport] = field(default_factory=list, repr=False)

    @property
    def free_energy_full(self) -> List[float]:
        return [float(np.exp(z / n ** 2)) for n, z in zip(self.levels, self.log_z_full)]

    @property
    def free_energy_restricted(self) -> List[float]:
        return [float(np.exp(z / n ** 2)) for n, z in zip(self.levels, self.log_z_restricted)]

    @property
    def gaps(self) -> List[float]:
        """|log Z(R) - log Z(E)| / n^2 per level"""
        return [abs(a - b) / n ** 2 for n, a, b in zip(self.levels, self.log_z_full, self.log_z_restricted)]

    @property
    def limit_full(self) -> float:
        return extrapolate_limit(self.levels, self.free_energy_full)

    @property
    def limit_restricted(self) -> float:
        return extrapolate_limit(self.levels, self.free_energy_restricted)

    @property
    def limit_gap(self) -> Optional[float]:
        if self.delta_w_energy is None:
            return None
        return relative_gap(self.limit_full, self.delta_w_energy)

    def to_frame(self) -> pd.DataFrame:
        columns = ['n', 'A', 'log_Z_fullline', 'log_Z_restricted', 'free_energy_fullline',
                   'free_energy_restricted', 'delta_w_energy_route']
        delta = self.delta_w_energy if self.delta_w_energy is not None else np.nan
        return pd.DataFrame({
            'n': self.levels,
            'A': self.half_widths,
            'log_Z_fullline': self.log_z_full,
            'log_Z_restricted': self.log_z_restricted,
            'free_energy_fullline': self.free_energy_full,
            'free_energy_restricted': self.free_energy_restricted,
            'delta_w_energy_route': [delta] * len(self.levels),
        }, columns=columns)


def free_energy_unbounded(coefficients: Sequence[float], n_list: Sequence[int], tol: float = 1e-12,
                          grid_size: int = 1200, solve_energy: bool = True,
                          threads: Optional[int] = None) -> FreeEnergySeries:
    """
    Free energy of e^{-2nQ} dx on the line by the full-line and restricted norm products.

    Each level uses its own restriction interval from choose_restriction.
    The energy route solves the equilibrium problem on the interval chosen
    for the largest level.
    """
    q = validate_field(coefficients)
    levels = check_increasing(n_list)

    def level_run(n: int):
        a = choose_restriction(q, n, tol)
        report = restricted_norm_compare(q, n, a)
        log_z_full = log_factorial(n + 1) + 2.0 * float(np.sum(report.log_p_full))
        log_z_restricted = log_factorial(n + 1) + 2.0 * float(np.sum(report.log_q_restricted))
        logger.info(f"Level {n}: A={a:g}, log Z(R)={log_z_full:.12g}, log Z(E)={log_z_restricted:.12g}")
        return a, report, log_z_full, log_z_restricted

    runs = ordered_map(level_run, levels, threads)
    delta = None
    if solve_energy:
        a_max = runs[-1][0]
        equilibrium = equilibrium_solve(Domain.interval(-a_max, a_max), Weight.field(q.tolist()), grid_size)
        delta = equilibrium.delta_w
    return FreeEnergySeries(levels, [r[0] for r in runs], [r[2] for r in runs], [r[3] for r in runs],
                            delta, [r[1] for r in runs])
