import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import mpmath
import numpy as np

from src.core.errors import LiftError, PreconditionError
from src.measures.weight import Weight, eval_weight

logger = logging.getLogger(__name__)


def log_abs_vdm(points) -> float:
    """sum_{j<k} log|z_j - z_k|, -inf if two points coincide"""
    z = np.asarray(points, dtype=complex).reshape(-1)
    upper = np.triu_indices(z.size, k=1)
    distances = np.abs(z[upper[0]] - z[upper[1]])
    if np.any(distances == 0):
        return float('-inf')
    return float(np.sum(np.log(distances)))


def log_weighted_vdm(points, w: Weight, n: int) -> float:
    """
    log(|VDM(z_0..z_n)| prod w(z_i)^n).

    Returns -inf for coincident points or a vanishing weight.
    """
    z = np.asarray(points, dtype=complex).reshape(-1)
    if z.size != n + 1:
        raise PreconditionError(f"Expected {n + 1} points for level {n}, got {z.size}")
    log_w = w.log_value(z)
    if np.any(np.isneginf(log_w)):
        return float('-inf')
    log_vdm = log_abs_vdm(z)
    if np.isneginf(log_vdm):
        return log_vdm
    return float(log_vdm + n * np.sum(log_w))


def weighted_vdm(points, w: Weight, n: int) -> float:
    return float(np.exp(log_weighted_vdm(points, w, n)))


def batch_log_weighted_vdm(configurations: np.ndarray, log_w: np.ndarray, n: int) -> np.ndarray:
    """
    Row-wise log weighted Vandermonde for an array of configurations.

    log_w holds log w at each entry of configurations (same shape).
    """
    upper = np.triu_indices(configurations.shape[1], k=1)
    with np.errstate(divide='ignore'):
        logs = np.log(np.abs(configurations[:, upper[0]] - configurations[:, upper[1]]))
    return np.sum(logs, axis=1) + n * np.sum(log_w, axis=1)


@dataclass(frozen=True)
class LiftedPoint:
    """Point (t, z) of the circled set, |t| = w(lambda), z = lambda t"""
    t: complex
    z: complex

    @property
    def base(self) -> complex:
        return self.z / self.t


def lift_to_F(lam: complex, theta: float, w: Weight) -> LiftedPoint:
    """Lift lambda to the fiber point with phase theta"""
    value = eval_weight(w, lam)
    if not value > 0:
        raise LiftError(f"Cannot lift {lam}: weight vanishes there")
    t = value * np.exp(1j * theta)
    return LiftedPoint(complex(t), complex(lam * t))


def direct_log_homogeneous_det(points: Sequence[LiftedPoint], n: int, dps: Optional[int] = None) -> float:
    """
    log|det[t_i^{n-j} z_i^j]| without factoring.

    LU in double precision, or mpmath's determinant at dps digits.
    """
    if dps is not None:
        with mpmath.workdps(dps):
            matrix = mpmath.matrix(n + 1, n + 1)
            for i, p in enumerate(points):
                t, z = mpmath.mpc(p.t.real, p.t.imag), mpmath.mpc(p.z.real, p.z.imag)
                for j in range(n + 1):
                    matrix[i, j] = t ** (n - j) * z ** j
            value = abs(mpmath.det(matrix))
            return float(mpmath.log(value)) if value != 0 else float('-inf')
    t = np.array([p.t for p in points], dtype=complex)
    z = np.array([p.z for p in points], dtype=complex)
    j = np.arange(n + 1)
    matrix = t[:, None] ** (n - j)[None, :] * z[:, None] ** j[None, :]
    sign, logdet = np.linalg.slogdet(matrix)
    return float(logdet) if sign != 0 else float('-inf')


def log_homogeneous_vdm(points: Sequence[LiftedPoint], n: int, cross_check_cap: int = 12,
                        tolerance: float = 1e-10, dps: Optional[int] = None) -> float:
    """
    log|det[t_i^{n-j} z_i^j]| through the factorization prod|t_i|^n |VDM(lambda)|.

    Up to cross_check_cap the direct determinant is also computed and a
    mismatch beyond tolerance is logged. dps moves the direct determinant
    to mpmath.
    """
    if len(points) != n + 1:
        raise PreconditionError(f"Expected {n + 1} lifted points for level {n}, got {len(points)}")
    t = np.array([p.t for p in points], dtype=complex)
    bases = np.array([p.base for p in points], dtype=complex)
    factorized = log_abs_vdm(bases) + n * float(np.sum(np.log(np.abs(t))))
    if n <= cross_check_cap and np.isfinite(factorized):
        direct = direct_log_homogeneous_det(points, n, dps)
        mismatch = abs(np.expm1(direct - factorized))
        if mismatch > tolerance:
            logger.warning(f"Homogeneous determinant cross-check off by {mismatch:.3e} at level {n}")
    return factorized


def homogeneous_vdm(points: Sequence[LiftedPoint], n: int, cross_check_cap: int = 12) -> float:
    return float(np.exp(log_homogeneous_vdm(points, n, cross_check_cap)))
