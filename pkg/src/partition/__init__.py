"""
Weighted Vandermonde determinants, the partition function Z_n and correlations
"""

from .vandermonde import (
    LiftedPoint,
    homogeneous_vdm,
    lift_to_F,
    log_homogeneous_vdm,
    log_weighted_vdm,
    weighted_vdm,
)
from .partition_function import (
    PartitionResult,
    homogeneous_gram_matrix,
    mu_n_density,
    mu_n_measure,
    partition_hom_gram,
    partition_monte_carlo,
    partition_norm_product,
    r1_norm_formula,
)
from .correlation import CorrelationGrid, m_point_correlation

__all__ = [
    'LiftedPoint',
    'homogeneous_vdm',
    'lift_to_F',
    'log_homogeneous_vdm',
    'log_weighted_vdm',
    'weighted_vdm',
    'PartitionResult',
    'homogeneous_gram_matrix',
    'mu_n_density',
    'mu_n_measure',
    'partition_hom_gram',
    'partition_monte_carlo',
    'partition_norm_product',
    'r1_norm_formula',
    'CorrelationGrid',
    'm_point_correlation',
]
