"""
The real line with a polynomial external field: restriction intervals and free energy
"""

from .restriction import (
    RestrictionDecay,
    RestrictionReport,
    choose_restriction,
    restricted_norm_compare,
    restriction_decay,
)
from .free_energy import FreeEnergySeries, free_energy_unbounded, hermite_log_norm_product

__all__ = [
    'RestrictionDecay',
    'RestrictionReport',
    'choose_restriction',
    'restricted_norm_compare',
    'restriction_decay',
    'FreeEnergySeries',
    'free_energy_unbounded',
    'hermite_log_norm_product',
]
