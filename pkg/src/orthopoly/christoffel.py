import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd

from src.core.errors import DomainError, PreconditionError
from src.core.parallel import ordered_map
from src.core.precision import relative_gap
from src.measures.domain import CIRCLE, INTERVAL_UNION, Domain
from src.measures.problem import WeightedProblem
from .basis import OrthoBasis

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ChristoffelField:
    """K_n(z) = sum_j |q_j(z)|^2 at a list of points"""
    level: int
    points: np.ndarray
    values: np.ndarray

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'z_re': self.points.real,
            'z_im': self.points.imag,
            'K_n': self.values,
        }, columns=['z_re', 'z_im', 'K_n'])


@dataclass
class StrongAsymptoticResult:
    level: int
    point: complex
    computed: float
    reference: float
    relative_gap: float


@dataclass
class LogKernelResult:
    level: int
    points: np.ndarray
    values: np.ndarray
    reference: Optional[np.ndarray]
    gap: Optional[np.ndarray]


def christoffel(basis: OrthoBasis, points, threads: Optional[int] = None) -> ChristoffelField:
    """
    Evaluate K_n at points.

    Squared moduli are summed in degree order j = 1..n+1. Extended bases
    accumulate in mpmath point by point.
    """
    points = np.atleast_1d(np.asarray(points, dtype=complex))
    if basis.mp_coeffs is not None:
        values = np.array(ordered_map(basis.mp_christoffel, list(points), threads))
    else:
        squares = np.abs(basis.evaluate(points)) ** 2
        values = np.zeros(points.size)
        for row in squares:
            values = values + row
    return ChristoffelField(basis.level, points, values)


def arcsine_density(x: float, a: float = -1.0, b: float = 1.0) -> float:
    """Equilibrium density of [a, b] with respect to dx"""
    return float(1.0 / (np.pi * np.sqrt((x - a) * (b - x))))


def _reference_density(problem: WeightedProblem, point: complex, equilibrium=None) -> float:
    domain = problem.domain
    if problem.weight.is_unit and domain.kind == INTERVAL_UNION and len(domain.intervals) == 1:
        a, b = domain.intervals[0]
        return arcsine_density(point.real, a, b)
    if problem.weight.is_unit and domain.kind == CIRCLE:
        return 1.0
    if equilibrium is None:
        from src.equilibrium.solver import equilibrium_solve
        equilibrium = equilibrium_solve(domain, problem.weight)
    return equilibrium.density_at(point)


def strong_asymptotic_check(problem: WeightedProblem, x, n: int, basis: Optional[OrthoBasis] = None,
                            equilibrium=None) -> StrongAsymptoticResult:
    """
    Compare the density of (1/(n+1)) K_n w^{2n} dmu at x with the equilibrium density.

    Densities are taken with respect to dx on intervals and normalized arc
    length on circles. The reference is the arcsine or uniform law for unit
    weights and a solved equilibrium measure otherwise.
    """
    point = complex(x)
    domain = problem.domain
    if domain.kind == INTERVAL_UNION:
        if point.imag != 0 or domain.interior_interval(point.real) is None:
            raise DomainError(f"Point {x} is not interior to the support")
    elif domain.kind == CIRCLE:
        if not domain.contains(point, tol=1e-9)[0]:
            raise DomainError(f"Point {x} is not on the circle")
    else:
        raise DomainError(f"Strong asymptotics need an interval union or a circle, got '{domain.kind}'")
    if problem.measure.reference_density is None:
        raise PreconditionError("Measure has no density with respect to the reference measure")
    if basis is None:
        from .basis import orthonormal_basis
        basis = orthonormal_basis(problem, n)

    kernel = christoffel(basis, [point]).values[0]
    log_w = float(problem.weight.log_value(point))
    computed = kernel / (n + 1) * problem.measure.reference_density * np.exp(2.0 * n * log_w)
    reference = _reference_density(problem, point, equilibrium)
    gap = relative_gap(computed, reference)
    logger.info(f"Strong asymptotics at x={x}, n={n}: computed {computed:.6g}, reference {reference:.6g}")
    return StrongAsymptoticResult(n, point, float(computed), float(reference), float(gap))


def bm_constant(basis: OrthoBasis, problem: WeightedProblem, grid=None, oversampling: int = 20) -> float:
    """
    Empirical Bernstein-Markov constant M_n = max over grid of w^{2n} K_n.

    The default grid has oversampling*n equispaced points per interval or
    circle, endpoints included. Ties resolve to the smallest grid index.
    """
    n = basis.level
    if grid is None:
        grid = problem.domain.grid(max(oversampling * n, 1))
    grid = np.atleast_1d(np.asarray(grid, dtype=complex))
    if grid.size < 10 * n:
        raise PreconditionError(f"Grid of {grid.size} points is too coarse for level {n}")
    if not np.all(problem.domain.contains(grid, tol=1e-9)):
        raise DomainError("Bernstein-Markov grid must lie in the domain")
    kernel = christoffel(basis, grid).values
    with np.errstate(divide='ignore'):
        log_values = np.log(kernel) + 2.0 * n * problem.weight.log_value(grid)
    index = int(np.argmax(log_values))
    value = float(np.exp(log_values[index]))
    logger.debug(f"Bernstein-Markov M_{n} = {value:.6g} at {grid[index]}")
    return value


def green_reference(domain: Domain, z: np.ndarray) -> Optional[np.ndarray]:
    """Green function with pole at infinity, where a closed form exists"""
    if domain.kind == INTERVAL_UNION and len(domain.intervals) == 1:
        a, b = domain.intervals[0]
        u = (2.0 * z - a - b) / (b - a)
        root = np.sqrt(u - 1.0) * np.sqrt(u + 1.0)
        return np.log(np.abs(u + root))
    if domain.kind == CIRCLE:
        return np.maximum(0.0, np.log(np.abs(z - domain.center) / domain.radius))
    return None


def log_kernel_check(basis: OrthoBasis, problem: WeightedProblem, points) -> LogKernelResult:
    """
    (1/2n) log K_n(z) + log w(z), the weighted extremal function estimate.

    For unit weights on one interval or a circle the Green function is
    returned as reference, with the pointwise gap.
    """
    n = basis.level
    if n < 1:
        raise PreconditionError("Level must be at least 1")
    points = np.atleast_1d(np.asarray(points, dtype=complex))
    kernel = christoffel(basis, points).values
    values = np.log(kernel) / (2.0 * n) + problem.weight.log_value(points)
    reference = green_reference(problem.domain, points) if problem.weight.is_unit else None
    gap = None if reference is None else values - reference
    return LogKernelResult(n, points, values, reference, gap)
