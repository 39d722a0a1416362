import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import mpmath
import numpy as np
from scipy.linalg import solve_triangular

from src.core.errors import DegeneracyError, DomainError
from src.core.precision import extended_dps, machine_epsilon
from src.measures.domain import CIRCLE, INTERVAL_UNION, LINE
from src.measures.problem import WeightedProblem, build_problem
from .gram import (
    check_order,
    cholesky_factor,
    gram_matrix,
    mp_cholesky_factor,
    mp_gram_matrix,
    mp_lower_inverse,
)

logger = logging.getLogger(__name__)

CHOLESKY = 'cholesky'
STIELTJES = 'stieltjes'
EXTENDED = 'extended'
AUTO = 'auto'

BASIS_METHODS = (AUTO, CHOLESKY, STIELTJES, EXTENDED)


@dataclass(frozen=True, eq=False)
class OrthoBasis:
    """
    Orthonormal polynomials q_1..q_{n+1} of L^2(w^{2n} mu) at level n.

    Row j of coeffs holds the ascending monomial coefficients of q_{j+1},
    which has degree j. Recurrence-built bases evaluate through their
    three-term recurrence; extended bases through mpmath Horner.
    """
    level: int
    coeffs: np.ndarray
    log_monic_norms: np.ndarray
    gram_condition: float
    method: str
    recurrence: Optional[Tuple[np.ndarray, np.ndarray]] = field(default=None, repr=False)
    mp_coeffs: Optional[List[List]] = field(default=None, repr=False)
    dps: Optional[int] = None

    @property
    def size(self) -> int:
        return self.level + 1

    @property
    def monic_norms(self) -> np.ndarray:
        return np.exp(self.log_monic_norms)

    def evaluate(self, points) -> np.ndarray:
        """Values q_j(z), shape (n+1, len(points))"""
        z = np.atleast_1d(np.asarray(points, dtype=complex))
        if self.mp_coeffs is not None:
            return self._evaluate_extended(z)
        if self.recurrence is not None:
            return evaluate_recurrence(self.recurrence, self.log_monic_norms[0], z, self.level)
        values = np.empty((self.size, z.size), dtype=complex)
        for j in range(self.size):
            values[j] = np.polynomial.polynomial.polyval(z, self.coeffs[j, :j + 1])
        return values

    def _evaluate_extended(self, z: np.ndarray) -> np.ndarray:
        values = np.empty((self.size, z.size), dtype=complex)
        with mpmath.workdps(self.dps):
            for p, point in enumerate(z):
                x = mpmath.mpf(point.real) if point.imag == 0 else mpmath.mpc(point.real, point.imag)
                for j in range(self.size):
                    acc = mpmath.mpf(0)
                    for c in reversed(self.mp_coeffs[j][:j + 1]):
                        acc = acc * x + c
                    values[j, p] = complex(acc)
        return values

    def mp_christoffel(self, point) -> float:
        """K_n at one point evaluated entirely in mpmath"""
        with mpmath.workdps(self.dps):
            x = mpmath.mpf(point.real) if complex(point).imag == 0 else mpmath.mpc(point.real, point.imag)
            total = mpmath.mpf(0)
            for j in range(self.size):
                acc = mpmath.mpf(0)
                for c in reversed(self.mp_coeffs[j][:j + 1]):
                    acc = acc * x + c
                total += abs(acc) ** 2
            return float(total)

    def to_dict(self) -> dict:
        rows = []
        for j in range(self.size):
            row = self.coeffs[j, :j + 1]
            if np.iscomplexobj(row) and np.any(row.imag != 0):
                rows.append([[c.real, c.imag] for c in row])
            else:
                rows.append([float(np.real(c)) for c in row])
        return {
            'level': self.level,
            'method': self.method,
            'coefficients': rows,
            'monic_norms': self.monic_norms.tolist(),
            'gram_condition': self.gram_condition,
        }


def stieltjes_recurrence(x: np.ndarray, v: np.ndarray, n: int):
    """
    Discretized Stieltjes procedure for the measure sum v_k delta_{x_k}.

    Returns (alpha, root_beta, log_monic_norms) of the orthonormal recurrence
    root_beta[k+1] q_{k+1} = (x - alpha[k]) q_k - root_beta[k] q_{k-1};
    root_beta[0] is the square root of the total mass.
    """
    mass = float(np.sum(v))
    if not mass > 0:
        raise DegeneracyError("Measure has zero mass", degree=0)
    scale = max(1.0, float(np.max(np.abs(x))))
    threshold = np.sqrt((n + 1) * machine_epsilon()) * scale
    alpha = np.zeros(n + 1)
    root_beta = np.zeros(n + 1)
    root_beta[0] = np.sqrt(mass)
    log_norms = np.zeros(n + 1)
    log_norms[0] = 0.5 * np.log(mass)
    q_prev = np.zeros_like(x)
    q = np.full_like(x, 1.0 / root_beta[0])
    for k in range(n):
        alpha[k] = np.dot(v * x, q * q)
        r = (x - alpha[k]) * q - (root_beta[k] * q_prev if k > 0 else 0.0)
        correction = np.dot(v * r, q)
        r = r - correction * q
        alpha[k] += correction
        norm = np.sqrt(np.dot(v, r * r))
        if not norm > threshold:
            raise DegeneracyError("Stieltjes recurrence broke down; too few distinct support points",
                                  degree=k + 1)
        root_beta[k + 1] = norm
        log_norms[k + 1] = log_norms[k] + np.log(norm)
        q_prev, q = q, r / norm
    alpha[n] = np.dot(v * x, q * q)
    return alpha, root_beta, log_norms


def evaluate_recurrence(recurrence, log_norm0: float, z: np.ndarray, n: int) -> np.ndarray:
    """Orthonormal values from the three-term recurrence, shape (n+1, len(z))"""
    alpha, root_beta = recurrence
    values = np.empty((n + 1, z.size), dtype=complex)
    values[0] = np.exp(-log_norm0)
    if n >= 1:
        values[1] = (z - alpha[0]) * values[0] / root_beta[1]
    for k in range(1, n):
        values[k + 1] = ((z - alpha[k]) * values[k] - root_beta[k] * values[k - 1]) / root_beta[k + 1]
    return values


def recurrence_coefficients(recurrence, log_norm0: float, n: int) -> np.ndarray:
    """Monomial coefficient rows of the recurrence polynomials"""
    alpha, root_beta = recurrence
    coeffs = np.zeros((n + 1, n + 1))
    coeffs[0, 0] = np.exp(-log_norm0)
    for k in range(n):
        row = np.zeros(n + 1)
        row[1:] = coeffs[k, :-1]
        row -= alpha[k] * coeffs[k]
        if k > 0:
            row -= root_beta[k] * coeffs[k - 1]
        coeffs[k + 1] = row / root_beta[k + 1]
    return coeffs


def condition_estimate(gram: np.ndarray, coeffs: np.ndarray) -> float:
    """||G||_1 ||G^{-1}||_1 with G^{-1} = C^H C"""
    inverse = np.conj(coeffs.T) @ coeffs
    return float(np.linalg.norm(gram, 1) * np.linalg.norm(inverse, 1))


def _select_method(problem: WeightedProblem, method: str) -> str:
    if method not in BASIS_METHODS:
        raise DomainError(f"Unknown basis method '{method}'")
    if problem.extended:
        return EXTENDED
    if method != AUTO:
        return method
    if problem.domain.kind == INTERVAL_UNION or (problem.measure.is_real and problem.restriction is not None):
        return STIELTJES
    return CHOLESKY


def _warn_condition(condition: float, n: int, threshold: float):
    if condition > threshold:
        logger.warning(f"Gram condition {condition:.3e} exceeds {threshold:.0e} at level {n}")


def _cholesky_basis(problem: WeightedProblem, n: int, warn_threshold: float) -> OrthoBasis:
    gram = gram_matrix(problem, n)
    factor = cholesky_factor(gram)
    identity = np.eye(n + 1, dtype=gram.dtype)
    coeffs = solve_triangular(factor, identity, lower=True)
    log_norms = np.log(np.real(np.diag(factor)))
    condition = condition_estimate(gram, coeffs)
    _warn_condition(condition, n, warn_threshold)
    return OrthoBasis(n, coeffs, log_norms, condition, CHOLESKY)


def _stieltjes_basis(problem: WeightedProblem, n: int, warn_threshold: float) -> OrthoBasis:
    check_order(problem, n)
    if not problem.measure.is_real:
        raise DomainError("The Stieltjes path needs real quadrature nodes")
    x = problem.measure.nodes.real
    v = problem.varying_weights(n)
    alpha, root_beta, log_norms = stieltjes_recurrence(x, v, n)
    recurrence = (alpha, root_beta)
    coeffs = recurrence_coefficients(recurrence, log_norms[0], n)
    # condition of the monomial Gram, for reporting only
    gram = gram_matrix(problem, n, enforce_order=False)
    condition = condition_estimate(gram, coeffs)
    _warn_condition(condition, n, warn_threshold)
    return OrthoBasis(n, coeffs, log_norms, condition, STIELTJES, recurrence)


def _extended_basis(problem: WeightedProblem, n: int, base_dps: int) -> OrthoBasis:
    dps = extended_dps(n, base_dps)
    if problem.measure.extended is None or (problem.measure.extended_dps or 0) < dps:
        if problem.domain.kind in (INTERVAL_UNION, CIRCLE, LINE):
            problem = build_problem(problem.domain, problem.weight, problem.order, problem.normalized,
                                    'extended', n, problem.restriction)
    gram = mp_gram_matrix(problem, n, dps)
    factor = mp_cholesky_factor(gram, dps)
    inverse = mp_lower_inverse(factor, dps)
    with mpmath.workdps(dps):
        log_norms = np.array([float(mpmath.log(factor[j][j])) for j in range(n + 1)])
        is_real = problem.measure.is_real
        cast = (lambda c: float(c)) if is_real else (lambda c: complex(c))
        coeffs = np.array([[cast(inverse[i][j]) for j in range(n + 1)] for i in range(n + 1)])
        norm_gram = max(mpmath.fsum(abs(gram[i][j]) for i in range(n + 1)) for j in range(n + 1))
        inverse_gram = [[mpmath.fsum(mpmath.conj(inverse[k][i]) * inverse[k][j] for k in range(n + 1))
                         for j in range(n + 1)] for i in range(n + 1)]
        norm_inverse = max(mpmath.fsum(abs(inverse_gram[i][j]) for i in range(n + 1)) for j in range(n + 1))
        condition = float(norm_gram * norm_inverse)
    logger.debug(f"Extended basis at level {n} with {dps} digits, condition {condition:.3e}")
    return OrthoBasis(n, coeffs, log_norms, condition, EXTENDED, mp_coeffs=inverse, dps=dps)


def orthonormal_basis(problem: WeightedProblem, n: int, method: str = AUTO,
                      condition_warning: float = 1e12, base_dps: int = 34) -> OrthoBasis:
    """
    Build the level-n orthonormal basis of L^2(w^{2n} mu).

    Args:
        problem: Weighted problem
        n: Level; the basis has degrees 0..n
        method: 'auto', 'cholesky', 'stieltjes' or 'extended'. 'auto' picks
            the Stieltjes recurrence for real interval problems and the
            monomial-Gram Cholesky path otherwise; extended-precision
            problems always use mpmath Cholesky.
        condition_warning: Log a warning above this Gram condition
        base_dps: Minimum digits for the extended path

    Raises:
        DegeneracyError: factorization breakdown, with the failing degree
    """
    selected = _select_method(problem, method)
    if selected == EXTENDED:
        basis = _extended_basis(problem, n, base_dps)
    elif selected == STIELTJES:
        basis = _stieltjes_basis(problem, n, condition_warning)
    else:
        basis = _cholesky_basis(problem, n, condition_warning)
    logger.debug(f"Built level-{n} basis by {basis.method}")
    return basis


def orthonormality_residual(basis: OrthoBasis, problem: WeightedProblem) -> float:
    """max |int q_i conj(q_j) w^{2n} dmu - delta_ij|"""
    values = basis.evaluate(problem.measure.nodes)
    v = problem.varying_weights(basis.level)
    inner = (values * v) @ np.conj(values.T)
    return float(np.max(np.abs(inner - np.eye(basis.size))))
