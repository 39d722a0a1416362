import logging
from typing import List

import mpmath
import numpy as np

from src.core.errors import DegeneracyError, PreconditionError
from src.core.precision import machine_epsilon
from src.measures.domain import POINT_CLOUD
from src.measures.problem import WeightedProblem

logger = logging.getLogger(__name__)


def check_order(problem: WeightedProblem, n: int):
    """Quadrature must carry exactness headroom for a degree-n orthogonalization"""
    if problem.domain.kind == POINT_CLOUD:
        return
    if problem.order < 4 * (n + 1):
        raise PreconditionError(f"Quadrature order {problem.order} is below 4(n+1) = {4 * (n + 1)} "
                                f"for level {n}")


def gram_matrix(problem: WeightedProblem, n: int, enforce_order: bool = True) -> np.ndarray:
    """
    Gram matrix G_ij = int z^i conj(z)^j w^{2n} dmu for i, j = 0..n.

    The result is symmetrized as (G + G^H) / 2, so it is exactly Hermitian.
    Real nodes give a real symmetric matrix.
    """
    if enforce_order:
        check_order(problem, n)
    z = problem.measure.nodes
    v = problem.varying_weights(n)
    powers = np.vander(z, n + 1, increasing=True)
    if problem.measure.is_real:
        powers = powers.real
    gram = (powers.T * v) @ np.conj(powers)
    gram = 0.5 * (gram + np.conj(gram.T))
    return gram


def cholesky_factor(gram: np.ndarray, eps: float = None) -> np.ndarray:
    """
    Lower-triangular L with G = L L^H.

    A pivot at or below size * eps * max-diagonal is a breakdown and raises
    DegeneracyError carrying the failing degree.
    """
    size = gram.shape[0]
    eps = machine_epsilon() if eps is None else eps
    threshold = size * eps * float(np.max(np.abs(np.diag(gram))))
    factor = np.zeros_like(gram)
    for j in range(size):
        row = factor[j, :j]
        pivot = float(np.real(gram[j, j] - np.sum(np.abs(row) ** 2)))
        if not pivot > threshold:
            raise DegeneracyError("Gram matrix is not positive definite; quadrature too coarse "
                                  "or too few distinct support points", degree=j)
        factor[j, j] = np.sqrt(pivot)
        if j + 1 < size:
            factor[j + 1:, j] = (gram[j + 1:, j] - factor[j + 1:, :j] @ np.conj(row)) / factor[j, j]
    return factor


def extended_nodes_weights(problem: WeightedProblem, n: int, dps: int):
    """mpmath nodes and w^{2n}-weighted quadrature weights"""
    measure = problem.measure
    with mpmath.workdps(dps):
        if measure.extended is not None:
            nodes, weights = measure.extended
        else:
            nodes = [mpmath.mpc(z.real, z.imag) if z.imag != 0 else mpmath.mpf(z.real)
                     for z in measure.nodes]
            weights = [mpmath.mpf(float(wk)) for wk in measure.weights]
        varying = []
        for z, wk in zip(nodes, weights):
            log_w = problem.weight.mp_log_value(z)
            varying.append(wk * mpmath.exp(2 * n * log_w) if log_w != mpmath.ninf else mpmath.mpf(0))
    return nodes, varying


def mp_gram_matrix(problem: WeightedProblem, n: int, dps: int, enforce_order: bool = True) -> List[List]:
    """Gram matrix in mpmath at dps digits, as nested lists"""
    if enforce_order:
        check_order(problem, n)
    nodes, varying = extended_nodes_weights(problem, n, dps)
    size = n + 1
    with mpmath.workdps(dps):
        if problem.measure.is_real:
            # Hankel structure: G_ij = s_{i+j}
            moments = []
            powers = [mpmath.mpf(1)] * len(nodes)
            xs = [mpmath.re(z) for z in nodes]
            for _ in range(2 * n + 1):
                moments.append(mpmath.fsum(p * v for p, v in zip(powers, varying)))
                powers = [p * x for p, x in zip(powers, xs)]
            return [[moments[i + j] for j in range(size)] for i in range(size)]
        columns = []
        for z, v in zip(nodes, varying):
            row, p = [], mpmath.mpf(1)
            for _ in range(size):
                row.append(p)
                p = p * z
            columns.append((row, v))
        gram = [[None] * size for _ in range(size)]
        for i in range(size):
            for j in range(i, size):
                entry = mpmath.fsum(v * row[i] * mpmath.conj(row[j]) for row, v in columns)
                gram[i][j] = entry
                gram[j][i] = mpmath.conj(entry)
            gram[i][i] = mpmath.re(gram[i][i])
        return gram


def mp_cholesky_factor(gram: List[List], dps: int) -> List[List]:
    """Extended-precision counterpart of cholesky_factor"""
    size = len(gram)
    with mpmath.workdps(dps):
        eps = mpmath.mpf(2) ** (-mpmath.mp.prec)
        threshold = size * eps * max(abs(gram[i][i]) for i in range(size))
        factor = [[mpmath.mpf(0)] * size for _ in range(size)]
        for j in range(size):
            row = factor[j][:j]
            pivot = mpmath.re(gram[j][j]) - mpmath.fsum(abs(x) ** 2 for x in row)
            if not pivot > threshold:
                raise DegeneracyError("Gram matrix is not positive definite in extended precision",
                                      degree=j)
            diag = mpmath.sqrt(pivot)
            factor[j][j] = diag
            for i in range(j + 1, size):
                acc = gram[i][j] - mpmath.fsum(factor[i][k] * mpmath.conj(factor[j][k]) for k in range(j))
                factor[i][j] = acc / diag
        return factor


def mp_lower_inverse(factor: List[List], dps: int) -> List[List]:
    """Inverse of a lower-triangular mpmath matrix by forward substitution"""
    size = len(factor)
    with mpmath.workdps(dps):
        inverse = [[mpmath.mpf(0)] * size for _ in range(size)]
        for col in range(size):
            inverse[col][col] = 1 / factor[col][col]
            for i in range(col + 1, size):
                acc = mpmath.fsum(factor[i][k] * inverse[k][col] for k in range(col, i))
                inverse[i][col] = -acc / factor[i][i]
        return inverse
