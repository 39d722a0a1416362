import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import mpmath
import numpy as np
import pandas as pd
from numpy.polynomial.hermite import hermgauss
from numpy.polynomial.legendre import leggauss

from src.core.errors import ConfigurationError, PreconditionError
from .domain import CIRCLE, DISK, INTERVAL_UNION, LINE, POINT_CLOUD, Domain

logger = logging.getLogger(__name__)

CONTINUOUS_RULE = 'continuous-rule'
EMPIRICAL = 'empirical'


@dataclass(frozen=True, eq=False)
class QuadratureMeasure:
    """
    Positive measure represented by nodes and weights.

    reference_density is the density of the represented measure with respect
    to the domain's reference measure (dx on intervals, normalized arc length
    on circles), when one exists. `extended` optionally carries the same rule
    as mpmath numbers for extended-precision work.
    """
    nodes: np.ndarray
    weights: np.ndarray
    tag: str = CONTINUOUS_RULE
    reference_density: Optional[float] = None
    extended: Optional[Tuple[List, List]] = field(default=None, repr=False)
    extended_dps: Optional[int] = None

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=complex).reshape(-1)
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if nodes.shape != weights.shape:
            raise PreconditionError("Quadrature nodes and weights must have equal length")
        if np.any(weights < 0):
            raise PreconditionError("Quadrature weights must be nonnegative")
        object.__setattr__(self, 'nodes', nodes)
        object.__setattr__(self, 'weights', weights)

    @property
    def size(self) -> int:
        return int(self.nodes.size)

    @property
    def total_mass(self) -> float:
        # sequential accumulation in index order
        return float(np.cumsum(self.weights)[-1]) if self.size else 0.0

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.nodes.imag == 0.0))

    def is_probability(self, tol: float = 1e-9) -> bool:
        return abs(self.total_mass - 1.0) <= tol

    def integrate(self, values) -> complex:
        values = np.asarray(values)
        return np.cumsum(self.weights * values)[-1]

    def normalized(self) -> 'QuadratureMeasure':
        mass = self.total_mass
        if mass <= 0:
            raise PreconditionError("Cannot normalize a zero-mass measure")
        extended = None
        if self.extended is not None:
            with mpmath.workdps(self.extended_dps or 34):
                total = mpmath.fsum(self.extended[1])
                extended = (self.extended[0], [wk / total for wk in self.extended[1]])
        density = None if self.reference_density is None else self.reference_density / mass
        return QuadratureMeasure(self.nodes, self.weights / mass, self.tag, density,
                                 extended, self.extended_dps)

    def reweighted(self, weights) -> 'QuadratureMeasure':
        return QuadratureMeasure(self.nodes, weights, CONTINUOUS_RULE)

    @classmethod
    def empirical(cls, points: Sequence[complex]) -> 'QuadratureMeasure':
        points = np.asarray(points, dtype=complex).reshape(-1)
        if points.size == 0:
            raise PreconditionError("Empirical measure needs at least one point")
        return cls(points, np.full(points.size, 1.0 / points.size), EMPIRICAL)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'node_re': self.nodes.real,
            'node_im': self.nodes.imag,
            'weight': self.weights,
        }, columns=['node_re', 'node_im', 'weight'])


def _mp_legendre(m: int, x):
    """P_m(x) and P_m'(x) by the three-term recurrence"""
    p_prev, p = mpmath.mpf(1), x
    for k in range(2, m + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    if m == 0:
        return mpmath.mpf(1), mpmath.mpf(0)
    dp = m * (x * p - p_prev) / (x * x - 1)
    return p, dp


def mp_gauss_legendre(m: int, dps: int) -> Tuple[List, List]:
    """
    Gauss-Legendre rule on [-1, 1] at dps digits.

    Double-precision nodes are refined by Newton's method on P_m.
    """
    guesses, _ = leggauss(m)
    nodes, weights = [], []
    with mpmath.workdps(dps + 10):
        stop = mpmath.mpf(10) ** (-(dps + 5))
        for guess in guesses:
            x = mpmath.mpf(float(guess))
            for _ in range(60):
                p, dp = _mp_legendre(m, x)
                step = p / dp
                x -= step
                if abs(step) < stop:
                    break
            _, dp = _mp_legendre(m, x)
            nodes.append(+x)
            weights.append(2 / ((1 - x * x) * dp * dp))
    return nodes, weights


def _interval_rule(domain: Domain, m: int):
    x, w = leggauss(m)
    nodes, weights = [], []
    for a, b in domain.intervals:
        half, mid = 0.5 * (b - a), 0.5 * (a + b)
        nodes.append(half * x + mid)
        weights.append(half * w)
    return np.concatenate(nodes).astype(complex), np.concatenate(weights)


def _interval_rule_extended(domain: Domain, m: int, dps: int):
    x, w = mp_gauss_legendre(m, dps)
    nodes, weights = [], []
    with mpmath.workdps(dps):
        for a, b in domain.intervals:
            half = (mpmath.mpf(b) - mpmath.mpf(a)) / 2
            mid = (mpmath.mpf(b) + mpmath.mpf(a)) / 2
            nodes.extend(half * xk + mid for xk in x)
            weights.extend(half * wk for wk in w)
    return nodes, weights


def _circle_rule(domain: Domain, m: int, normalize: bool):
    theta = 2.0 * np.pi * np.arange(m) / m
    nodes = domain.center + domain.radius * np.exp(1j * theta)
    weight = 1.0 / m if normalize else 2.0 * np.pi * domain.radius / m
    return nodes, np.full(m, weight)


def _circle_rule_extended(domain: Domain, m: int, normalize: bool, dps: int):
    with mpmath.workdps(dps):
        r = mpmath.mpf(domain.radius)
        c = mpmath.mpc(domain.center.real, domain.center.imag)
        nodes = [c + r * mpmath.expjpi(mpmath.mpf(2 * k) / m) for k in range(m)]
        weight = mpmath.mpf(1) / m if normalize else 2 * mpmath.pi * r / m
        return nodes, [weight] * m


def _disk_rule(domain: Domain, m: int):
    x, w = leggauss(m)
    rho = 0.5 * domain.radius * (x + 1.0)
    w_rho = 0.5 * domain.radius * w * rho
    theta = 2.0 * np.pi * np.arange(m) / m
    nodes = domain.center + (rho[:, None] * np.exp(1j * theta)[None, :]).reshape(-1)
    weights = (w_rho[:, None] * np.full(m, 2.0 * np.pi / m)[None, :]).reshape(-1)
    return nodes, weights


def build_quadrature(domain: Domain, m: int, normalize: bool = False,
                     extended_dps: Optional[int] = None) -> QuadratureMeasure:
    """
    Discretize the reference measure of a domain.

    Args:
        domain: Domain to discretize
        m: Nodes per interval, circle angles, or per polar direction on a disk
        normalize: Rescale to a probability measure
        extended_dps: Also build the rule in mpmath at this many digits
            (interval unions and circles only)

    Returns:
        QuadratureMeasure for dx (intervals), arc length (circle), area
        (disk) or counting measure (point cloud)
    """
    if int(m) < 1:
        raise PreconditionError(f"Quadrature order must be at least 1, got {m}")
    m = int(m)
    extended = None
    density = None
    tag = CONTINUOUS_RULE

    if domain.kind == INTERVAL_UNION:
        nodes, weights = _interval_rule(domain, m)
        density = 1.0
        if extended_dps is not None:
            extended = _interval_rule_extended(domain, m, extended_dps)
    elif domain.kind == CIRCLE:
        nodes, weights = _circle_rule(domain, m, normalize)
        density = 1.0 if normalize else float(2.0 * np.pi * domain.radius)
        if extended_dps is not None:
            extended = _circle_rule_extended(domain, m, normalize, extended_dps)
    elif domain.kind == DISK:
        nodes, weights = _disk_rule(domain, m)
    elif domain.kind == POINT_CLOUD:
        nodes = np.asarray(domain.points, dtype=complex)
        weights = np.ones(nodes.size)
    elif domain.kind == LINE:
        raise ConfigurationError("The real line has no finite quadrature; supply a restriction interval",
                                 field='measure.restriction')
    else:
        raise ConfigurationError(f"Unsupported domain kind '{domain.kind}'", field='domain.kind')

    measure = QuadratureMeasure(nodes, weights, tag, density, extended, extended_dps)
    if normalize and domain.kind != CIRCLE:
        measure = measure.normalized()
        if domain.kind == POINT_CLOUD:
            measure = QuadratureMeasure(measure.nodes, measure.weights, EMPIRICAL)
    logger.debug(f"Built {domain.kind} rule with {measure.size} nodes, mass {measure.total_mass:.6g}")
    return measure


def gauss_hermite_measure(n: int, scale: float, m: int, offset: float = 0.0) -> QuadratureMeasure:
    """
    Rule for the measure exp(-2n(scale x^2 + offset)) dx on the real line.

    Nodes are rescaled Gauss-Hermite nodes; the weights already include the
    Gaussian factor.
    """
    if scale <= 0:
        raise PreconditionError("Gauss-Hermite rescaling needs a positive quadratic coefficient")
    y, wy = hermgauss(int(m))
    c = 2.0 * n * scale
    nodes = y / np.sqrt(c)
    weights = wy / np.sqrt(c) * np.exp(-2.0 * n * offset)
    return QuadratureMeasure(nodes.astype(complex), weights, CONTINUOUS_RULE)
