import itertools
import logging
from dataclasses import dataclass
from math import comb
from typing import List, Optional

import numpy as np
from scipy.linalg import null_space, qr

from src.core.errors import DegeneracyError, DomainError, NumericError, PreconditionError
from src.core.parallel import ordered_map, substream
from src.equilibrium.fekete import fekete_search
from src.measures.problem import WeightedProblem
from src.orthopoly.basis import OrthoBasis
from src.partition.vandermonde import batch_log_weighted_vdm

logger = logging.getLogger(__name__)

KERNEL_CHAIN = 'kernel-chain'
REJECTION = 'rejection'
SAMPLING_METHODS = (KERNEL_CHAIN, REJECTION)


@dataclass(frozen=True, eq=False)
class EnsembleSample:
    """count x (n+1) array of configurations drawn from P_n"""
    level: int
    configurations: np.ndarray
    seed: int
    method: str

    @property
    def count(self) -> int:
        return int(self.configurations.shape[0])

    def log_weighted_vdm(self, log_w_fn) -> np.ndarray:
        """Row-wise log weighted VDM; log_w_fn maps points to log w"""
        return batch_log_weighted_vdm(self.configurations, log_w_fn(self.configurations), self.level)

    def to_lines(self) -> List[str]:
        """One configuration per line, points as re,im pairs"""
        return [' '.join(f"{float(z.real)!r},{float(z.imag)!r}" for z in row) for row in self.configurations]


def _chain_frame(problem: WeightedProblem, basis: OrthoBasis, n: int) -> np.ndarray:
    """Orthonormal columns spanning sqrt(mu w^{2n}) q_j on the nodes"""
    v = problem.varying_weights(n)
    frame = np.sqrt(v)[:, None] * basis.evaluate(problem.measure.nodes).T
    q, _ = qr(frame, mode='economic')
    return q


def _chain_draw(frame: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """
    One projection-DPP draw by the sequential chain.

    Each step samples a node from the diagonal of the current projection
    kernel and removes the direction through that node.
    """
    v = frame
    chosen = []
    for _ in range(frame.shape[1]):
        p = np.sum(np.abs(v) ** 2, axis=1)
        p[chosen] = 0.0
        cumulative = np.cumsum(p)
        u = rng.random() * cumulative[-1]
        item = min(int(np.searchsorted(cumulative, u, side='right')), p.size - 1)
        chosen.append(item)
        if v.shape[1] > 1:
            complement = null_space(v[item][None, :])
            v = v @ complement[:, :v.shape[1] - 1]
    return np.array(chosen)


def _ceiling(problem: WeightedProblem, n: int, exhaustive_cap: int = 200_000) -> float:
    """log of max |VDM|^2 prod w^{2n} over tuples of quadrature nodes"""
    nodes = problem.measure.nodes
    log_w = problem.log_weight_nodes()
    if comb(nodes.size, n + 1) <= exhaustive_cap:
        index = np.array(list(itertools.combinations(range(nodes.size), n + 1)))
        return float(2.0 * np.max(batch_log_weighted_vdm(nodes[index], log_w[index], n)))
    configuration = fekete_search(problem.domain, problem.weight, n, grid=nodes)
    return 2.0 * configuration.log_wvdm


def _rejection_draw(nodes, probabilities, log_w, n, log_ceiling, rng, batch: int = 1000) -> np.ndarray:
    while True:
        index = rng.choice(nodes.size, size=(batch, n + 1), p=probabilities)
        log_target = 2.0 * batch_log_weighted_vdm(nodes[index], log_w[index], n)
        if np.any(log_target > log_ceiling):
            raise NumericError("Rejection proposal exceeded the density ceiling")
        accept = np.log(rng.random(batch)) < log_target - log_ceiling
        hits = np.nonzero(accept)[0]
        if hits.size:
            return index[hits[0]]


def _distinct(points: np.ndarray) -> bool:
    return np.unique(points).size == points.size


def sample_pn(problem: WeightedProblem, basis: Optional[OrthoBasis], n: int, count: int, seed: int,
              method: str = KERNEL_CHAIN, threads: Optional[int] = None,
              rejection_max_level: int = 4) -> EnsembleSample:
    """
    Draw configurations from the discretized P_n.

    Args:
        problem: Weighted problem; the quadrature nodes are the state space
        basis: Level-n orthonormal basis (kernel-chain only)
        n: Level; each configuration has n+1 points
        count: Number of configurations
        seed: Configuration i uses the substream (seed, i)
        method: 'kernel-chain' or 'rejection'

    Raises:
        PreconditionError: rejection above rejection_max_level, or a missing basis
        DegeneracyError: rejection ceiling is zero
    """
    if method not in SAMPLING_METHODS:
        raise DomainError(f"Unknown sampling method '{method}'")
    if count < 1:
        raise PreconditionError("Sample count must be positive")
    nodes = problem.measure.nodes

    if method == KERNEL_CHAIN:
        if basis is None or basis.level != n:
            raise PreconditionError("Kernel-chain sampling needs an orthonormal basis at level n")
        frame = _chain_frame(problem, basis, n)

        def draw(i: int) -> np.ndarray:
            attempt = 0
            while True:
                rng = substream(seed, i, attempt)
                points = nodes[rng.permutation(_chain_draw(frame, rng))]
                if _distinct(points):
                    return points
                attempt += 1
    else:
        if n > rejection_max_level:
            raise PreconditionError(f"Rejection sampling is limited to n <= {rejection_max_level}")
        log_ceiling = _ceiling(problem, n)
        if not np.isfinite(log_ceiling):
            raise DegeneracyError("Rejection ceiling is zero; the weight kills all mass")
        log_ceiling += np.log1p(1e-6)
        mass = problem.measure.total_mass
        if not mass > 0:
            raise PreconditionError("Measure has zero mass")
        probabilities = problem.measure.weights / mass
        log_w = problem.log_weight_nodes()

        def draw(i: int) -> np.ndarray:
            rng = substream(seed, i)
            return nodes[_rejection_draw(nodes, probabilities, log_w, n, log_ceiling, rng)]

    configurations = np.array(ordered_map(draw, range(count), threads))
    logger.info(f"Sampled {count} configurations at level {n} by {method}")
    return EnsembleSample(n, configurations, seed, method)
