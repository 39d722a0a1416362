"""
Sampling the ensemble P_n and large-deviation estimates
"""

from .sampler import EnsembleSample, sample_pn
from .deviation import (
    DeviationReport,
    complement_curve,
    deviation_bound,
    indicator_A,
    large_deviation_estimate,
)

__all__ = [
    'EnsembleSample',
    'sample_pn',
    'DeviationReport',
    'complement_curve',
    'deviation_bound',
    'indicator_A',
    'large_deviation_estimate',
]
