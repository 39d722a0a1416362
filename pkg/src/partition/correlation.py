import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from src.core.errors import DomainError, PreconditionError
from src.core.parallel import ordered_map
from src.measures.problem import WeightedProblem
from src.orthopoly.basis import OrthoBasis
from .partition_function import partition_norm_product
from .vandermonde import batch_log_weighted_vdm, log_abs_vdm

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CorrelationGrid:
    """R_m at a list of m-tuples, raw and normalized by Z_n and the weights"""
    m: int
    level: int
    points: List[tuple]
    values: np.ndarray
    normalized_values: np.ndarray

    def to_frame(self) -> pd.DataFrame:
        columns = {}
        for i in range(self.m):
            columns[f'z{i + 1}_re'] = [complex(t[i]).real for t in self.points]
            columns[f'z{i + 1}_im'] = [complex(t[i]).imag for t in self.points]
        columns['R_m'] = self.values
        columns['R_m_normalized'] = self.normalized_values
        return pd.DataFrame(columns)


def _integrate_free_variables(problem: WeightedProblem, n: int, fixed: np.ndarray,
                              threads: Optional[int]) -> float:
    """
    int |VDM(lambda, fixed)|^2 prod w(lambda_i)^{2n} dmu(lambda) over the n+1-m free variables.

    Tensor quadrature, split over the outermost variable.
    """
    free = n + 1 - fixed.size
    if free == 0:
        return float(np.exp(2.0 * log_abs_vdm(fixed)))
    nodes = problem.measure.nodes
    with np.errstate(divide='ignore'):
        node_terms = np.log(problem.measure.weights) + 2.0 * n * problem.log_weight_nodes()
    size = nodes.size
    if free > 1:
        inner = np.indices((size,) * (free - 1)).reshape(free - 1, -1).T
    else:
        inner = np.zeros((1, 0), dtype=int)

    def outer(first: int) -> float:
        index = np.column_stack([np.full(inner.shape[0], first), inner])
        configurations = np.concatenate(
            [nodes[index], np.broadcast_to(fixed, (index.shape[0], fixed.size))], axis=1)
        log_vdm = batch_log_weighted_vdm(configurations, np.zeros(configurations.shape), 0)
        terms = 2.0 * log_vdm + node_terms[index].sum(axis=1)
        return float(np.sum(np.exp(terms)))

    partial = ordered_map(outer, range(size), threads)
    total = 0.0
    for value in partial:
        total += value
    return total


def m_point_correlation(problem: WeightedProblem, basis: OrthoBasis, n: int, m: int,
                        tuples: Sequence[Sequence[complex]], threads: Optional[int] = None,
                        max_level: int = 5) -> CorrelationGrid:
    """
    m-point correlation R_m^{(n)} by direct tensor quadrature.

    Args:
        problem: Weighted problem; its quadrature nodes carry the free variables
        basis: Level-n basis, used for Z_n in the normalization
        n: Level
        m: Number of fixed points, 1 <= m <= n+1
        tuples: m-tuples of points in the domain

    Raises:
        PreconditionError: n above max_level or m out of range
    """
    if n > max_level:
        raise PreconditionError(f"Correlation quadrature is limited to n <= {max_level}, got {n}")
    if not 1 <= m <= n + 1:
        raise PreconditionError(f"Need 1 <= m <= n+1, got m={m} at level {n}")
    if basis.level != n:
        raise PreconditionError(f"Basis level {basis.level} does not match n={n}")
    log_z = partition_norm_product(basis).log_z

    points, values, normalized = [], [], []
    for entry in tuples:
        fixed = np.asarray(entry, dtype=complex).reshape(-1)
        if fixed.size != m:
            raise PreconditionError(f"Expected {m}-tuples, got one of length {fixed.size}")
        if not np.all(problem.domain.contains(fixed, tol=1e-9)):
            raise DomainError(f"Tuple {tuple(entry)} is not in the domain")
        value = _integrate_free_variables(problem, n, fixed, threads)
        with np.errstate(divide='ignore'):
            log_weights = 2.0 * n * float(np.sum(problem.weight.log_value(fixed)))
            scaled = np.exp(np.log(value) - log_z + log_weights) if value > 0 else 0.0
        points.append(tuple(complex(z) for z in fixed))
        values.append(value)
        normalized.append(float(scaled))
    logger.debug(f"Computed R_{m} at {len(points)} tuples for level {n}")
    return CorrelationGrid(m, n, points, np.array(values), np.array(normalized))
