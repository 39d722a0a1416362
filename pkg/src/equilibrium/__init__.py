"""
Weighted energy, equilibrium measures, Fekete points and the transfinite diameter
"""

from .energy import continuous_energy, discrete_energy, energy_matrix
from .simplex import project_simplex
from .solver import EquilibriumMeasure, equilibrium_solve
from .fekete import FeketeConfiguration, fekete_search
from .diameter import (
    ConvergenceReport,
    DiameterReport,
    extrapolate_limit,
    fekete_empirical_convergence,
    transfinite_diameter,
)

__all__ = [
    'continuous_energy',
    'discrete_energy',
    'energy_matrix',
    'project_simplex',
    'EquilibriumMeasure',
    'equilibrium_solve',
    'FeketeConfiguration',
    'fekete_search',
    'ConvergenceReport',
    'DiameterReport',
    'extrapolate_limit',
    'fekete_empirical_convergence',
    'transfinite_diameter',
]
