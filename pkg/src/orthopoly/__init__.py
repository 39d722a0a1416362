"""
Level-n orthonormal polynomials for varying weights w^{2n} dmu, Christoffel
functions and Bernstein-Markov diagnostics.
"""

from .gram import gram_matrix, cholesky_factor
from .basis import OrthoBasis, orthonormal_basis, orthonormality_residual, stieltjes_recurrence
from .christoffel import (
    ChristoffelField,
    christoffel,
    strong_asymptotic_check,
    bm_constant,
    log_kernel_check,
    arcsine_density,
)

__all__ = [
    'gram_matrix',
    'cholesky_factor',
    'OrthoBasis',
    'orthonormal_basis',
    'orthonormality_residual',
    'stieltjes_recurrence',
    'ChristoffelField',
    'christoffel',
    'strong_asymptotic_check',
    'bm_constant',
    'log_kernel_check',
    'arcsine_density',
]
