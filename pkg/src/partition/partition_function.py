import logging
from dataclasses import dataclass
from typing import Optional

import mpmath
import numpy as np
from scipy.special import logsumexp

from src.core.errors import DegeneracyError, PreconditionError
from src.core.parallel import ordered_map, substream
from src.core.precision import extended_dps, log_factorial
from src.measures.quadrature import QuadratureMeasure
from src.measures.problem import WeightedProblem, build_problem
from src.measures.domain import CIRCLE, INTERVAL_UNION, LINE
from src.orthopoly.basis import OrthoBasis
from src.orthopoly.christoffel import christoffel
from src.orthopoly.gram import (
    check_order,
    cholesky_factor,
    gram_matrix,
    mp_cholesky_factor,
    mp_gram_matrix,
)
from .vandermonde import batch_log_weighted_vdm

logger = logging.getLogger(__name__)

NORM_PRODUCT = 'norm-product'
HOM_GRAM = 'hom-gram'
MONTE_CARLO = 'monte-carlo'


@dataclass(frozen=True)
class PartitionResult:
    """
    log Z_n from one route.

    Exact routes have stderr 0. Monte Carlo also reports the estimate and
    its absolute standard error in value space.
    """
    level: int
    log_z: float
    route: str
    stderr_log: float = 0.0
    value: Optional[float] = None
    stderr: float = 0.0

    @property
    def free_energy(self) -> float:
        """Z_n^{1/n^2}"""
        if self.level < 1:
            raise PreconditionError("Free energy needs level n >= 1")
        return float(np.exp(self.log_z / self.level ** 2))


def partition_norm_product(basis: OrthoBasis) -> PartitionResult:
    """log Z_n = log((n+1)!) + 2 sum log ||p_j||"""
    n = basis.level
    log_z = log_factorial(n + 1) + 2.0 * float(np.sum(basis.log_monic_norms))
    return PartitionResult(n, log_z, NORM_PRODUCT)


def homogeneous_gram_matrix(problem: WeightedProblem, n: int, fiber_nodes: Optional[int] = None) -> np.ndarray:
    """
    Gram matrix of the homogeneous monomials t^j z^{n-j} in L^2(nu), nu = m_lambda x mu.

    By default each entry is reduced analytically to the planar moment
    int lambda^{n-i} conj(lambda)^{n-j} w^{2n} dmu. With fiber_nodes the
    fiber circles |t| = w(lambda) are integrated with that many
    equispaced phases instead.
    """
    if fiber_nodes is None:
        gram = gram_matrix(problem, n)
        return gram[::-1, ::-1].copy()
    check_order(problem, n)
    lam = problem.measure.nodes
    log_w = problem.log_weight_nodes()
    alive = np.isfinite(log_w)
    lam, log_w = lam[alive], log_w[alive]
    mu = problem.measure.weights[alive]
    phases = np.exp(2j * np.pi * np.arange(fiber_nodes) / fiber_nodes)
    j = np.arange(n + 1)
    gram = np.zeros((n + 1, n + 1), dtype=complex)
    for phase in phases:
        t = np.exp(log_w) * phase
        z = lam * t
        monomials = t[:, None] ** j[None, :] * z[:, None] ** (n - j)[None, :]
        gram += (monomials.T * (mu / fiber_nodes)) @ np.conj(monomials)
    gram = 0.5 * (gram + np.conj(gram.T))
    if problem.measure.is_real:
        gram = gram.real
    return gram


def _mp_log_det(problem: WeightedProblem, n: int, base_dps: int) -> float:
    dps = extended_dps(n, base_dps)
    if (problem.measure.extended_dps or 0) < dps and problem.domain.kind in (INTERVAL_UNION, CIRCLE, LINE):
        problem = build_problem(problem.domain, problem.weight, problem.order, problem.normalized,
                                'extended', n, problem.restriction)
    gram = mp_gram_matrix(problem, n, dps)
    reversed_gram = [row[::-1] for row in gram[::-1]]
    factor = mp_cholesky_factor(reversed_gram, dps)
    with mpmath.workdps(dps):
        return float(2 * mpmath.fsum(mpmath.log(factor[k][k]) for k in range(n + 1)))


def partition_hom_gram(problem: WeightedProblem, n: int, fiber_nodes: Optional[int] = None,
                       base_dps: int = 34) -> PartitionResult:
    """
    log Z_n = log((n+1)!) + log det of the homogeneous Gram matrix.

    Extended-precision problems factor the Gram matrix in mpmath.

    Raises:
        DegeneracyError: determinant not positive to working precision
    """
    if problem.extended and fiber_nodes is None:
        log_det = _mp_log_det(problem, n, base_dps)
    else:
        gram = homogeneous_gram_matrix(problem, n, fiber_nodes)
        try:
            factor = cholesky_factor(gram)
        except DegeneracyError as e:
            raise DegeneracyError("Homogeneous Gram determinant is not positive", degree=e.degree)
        log_det = 2.0 * float(np.sum(np.log(np.real(np.diag(factor)))))
    return PartitionResult(n, log_factorial(n + 1) + log_det, HOM_GRAM)


def partition_monte_carlo(problem: WeightedProblem, n: int, samples: int, seed: int,
                          block_size: int = 50_000, threads: Optional[int] = None,
                          max_level: int = 8, min_samples: int = 10_000) -> PartitionResult:
    """
    Monte Carlo estimate of Z_n over the discretized measure.

    Tuples are drawn i.i.d. from mu/|mu| as categorical draws over the
    quadrature nodes, one seeded substream per block; blocks are reduced in
    order so the estimate only depends on (seed, samples, block_size).
    """
    if n > max_level:
        raise PreconditionError(f"Monte Carlo partition function is limited to n <= {max_level}")
    if samples < min_samples:
        raise PreconditionError(f"Monte Carlo needs at least {min_samples} samples, got {samples}")
    mass = problem.measure.total_mass
    if not mass > 0:
        raise PreconditionError("Measure has zero mass")
    nodes = problem.measure.nodes
    probabilities = problem.measure.weights / mass
    log_w = problem.log_weight_nodes()
    log_scale = (n + 1) * np.log(mass)

    blocks = [(b, min(block_size, samples - b * block_size))
              for b in range((samples + block_size - 1) // block_size)]

    def run_block(block):
        index, count = block
        rng = substream(seed, index)
        draws = rng.choice(nodes.size, size=(count, n + 1), p=probabilities)
        log_values = 2.0 * batch_log_weighted_vdm(nodes[draws], log_w[draws], n) + log_scale
        values = np.exp(log_values)
        return count, float(np.sum(values)), float(np.sum(values * values))

    total_count, total, total_sq = 0, 0.0, 0.0
    for count, block_sum, block_sq in ordered_map(run_block, blocks, threads):
        total_count += count
        total += block_sum
        total_sq += block_sq
    mean = total / total_count
    variance = max(total_sq / total_count - mean * mean, 0.0) * total_count / (total_count - 1)
    stderr = float(np.sqrt(variance / total_count))
    if not mean > 0:
        raise DegeneracyError("Monte Carlo estimate of Z_n vanished")
    logger.info(f"Monte Carlo Z_{n} = {mean:.6g} +/- {stderr:.2g} from {total_count} samples")
    return PartitionResult(n, float(np.log(mean)), MONTE_CARLO, stderr / mean, float(mean), stderr)


def mu_n_density(basis: OrthoBasis, problem: WeightedProblem, points) -> np.ndarray:
    """Density of mu_n with respect to mu: K_n(z) w(z)^{2n} / (n+1)"""
    n = basis.level
    points = np.atleast_1d(np.asarray(points, dtype=complex))
    kernel = christoffel(basis, points).values
    with np.errstate(divide='ignore'):
        log_density = np.log(kernel) + 2.0 * n * problem.weight.log_value(points) - np.log(n + 1)
    return np.exp(log_density)


def mu_n_measure(basis: OrthoBasis, problem: WeightedProblem) -> QuadratureMeasure:
    """mu_n on the quadrature nodes of mu"""
    density = mu_n_density(basis, problem, problem.measure.nodes)
    return QuadratureMeasure(problem.measure.nodes, problem.measure.weights * density)


def r1_norm_formula(basis: OrthoBasis, points) -> np.ndarray:
    """
    log R_1(z) = log( n! sum_j prod_{i != j} ||p_i||^2 |p_j(z)|^2 ).

    Evaluated with a log-sum-exp over j.
    """
    n = basis.level
    points = np.atleast_1d(np.asarray(points, dtype=complex))
    log_norms = basis.log_monic_norms
    total = float(np.sum(log_norms))
    with np.errstate(divide='ignore'):
        # |p_j(z)| = |q_j(z)| ||p_j||
        log_monic = np.log(np.abs(basis.evaluate(points))) + log_norms[:, None]
    terms = 2.0 * (total - log_norms)[:, None] + 2.0 * log_monic
    return log_factorial(n) + logsumexp(terms, axis=0)
