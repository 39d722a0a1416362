import math
from typing import Iterable

import mpmath
import numpy as np
from scipy.special import gammaln

from .errors import ConfigurationError

PRECISION_MODES = ('double', 'extended')

# IEEE binary128 carries ~34 significant digits
EXTENDED_BASE_DPS = 34


def validate_mode(mode: str) -> str:
    if mode not in PRECISION_MODES:
        raise ConfigurationError(f"Unknown precision mode '{mode}'", field='precision.mode')
    return mode


def extended_dps(n: int, base: int = EXTENDED_BASE_DPS) -> int:
    """
    Working digits for a level-n factorization in extended precision.

    Monomial Gram matrices on intervals lose roughly 1.5 digits per degree.
    """
    return max(int(base), 2 * int(n) + 20)


def machine_epsilon(dps: int = None) -> float:
    if dps is None:
        return float(np.finfo(float).eps)
    return float(mpmath.mpf(10) ** (-int(dps)))


def log_factorial(k: int) -> float:
    """log(k!)"""
    return float(gammaln(k + 1))


def ordered_sum(values: Iterable[float]) -> float:
    """Left-to-right sum in index order"""
    total = 0.0
    for value in values:
        total += value
    return total


def relative_gap(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    if scale == 0.0:
        return 0.0
    return abs(a - b) / scale


def is_finite_log(value: float) -> bool:
    return not (math.isinf(value) or math.isnan(value))
