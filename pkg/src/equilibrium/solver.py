import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import pandas as pd
from scipy.linalg import LinAlgError, solve

from src.core.errors import ConvergenceError, DegeneracyError, DomainError, PreconditionError
from src.measures.domain import CIRCLE, INTERVAL_UNION, Domain
from src.measures.quadrature import QuadratureMeasure
from src.measures.weight import Weight
from .energy import energy_matrix
from .simplex import project_simplex

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class EquilibriumMeasure:
    """
    Discretized weighted equilibrium measure on cell midpoints.

    density is taken with respect to dx on intervals and normalized arc
    length on circles, matching QuadratureMeasure.reference_density.
    """
    domain: Domain
    nodes: np.ndarray
    widths: np.ndarray
    masses: np.ndarray
    energy: float
    support: np.ndarray
    potential: np.ndarray
    residual: float
    variational_spread: float
    iterations: int
    energy_history: List[float] = field(default_factory=list, repr=False)

    @property
    def delta_w(self) -> float:
        return float(np.exp(-self.energy))

    @property
    def reference_widths(self) -> np.ndarray:
        if self.domain.kind == CIRCLE:
            return self.widths / (2.0 * np.pi * self.domain.radius)
        return self.widths

    @property
    def density(self) -> np.ndarray:
        return self.masses / self.reference_widths

    @property
    def support_nodes(self) -> np.ndarray:
        return self.nodes[self.support]

    def support_hull(self):
        """(min, max) of the real support estimate"""
        points = self.support_nodes.real
        return float(points.min()), float(points.max())

    def density_at(self, point) -> float:
        """Density interpolated linearly between cell midpoints"""
        z = complex(point)
        if self.domain.kind == CIRCLE:
            angles = np.mod(np.angle(self.nodes - self.domain.center), 2.0 * np.pi)
            order = np.argsort(angles)
            target = np.mod(np.angle(z - self.domain.center), 2.0 * np.pi)
            return float(np.interp(target, angles[order], self.density[order], period=2.0 * np.pi))
        x = self.nodes.real
        order = np.argsort(x)
        return float(np.interp(z.real, x[order], self.density[order]))

    def as_measure(self) -> QuadratureMeasure:
        return QuadratureMeasure(self.nodes, self.masses)

    def to_frame(self) -> pd.DataFrame:
        columns = ['node', 'mass', 'density', 'potential']
        node = self.nodes.real if self.domain.kind == INTERVAL_UNION else np.mod(
            np.angle(self.nodes - self.domain.center), 2.0 * np.pi)
        return pd.DataFrame({
            'node': node,
            'mass': self.masses,
            'density': self.density,
            'potential': self.potential,
        }, columns=columns)


def projected_gradient_residual(masses: np.ndarray, gradient: np.ndarray) -> float:
    """||m - P(m - g)||_inf, zero exactly at a KKT point"""
    return float(np.max(np.abs(masses - project_simplex(masses - gradient))))


def _curvature_bound(kernel: np.ndarray, passes: int = 60) -> float:
    """
    Power-iteration estimate of the largest eigenvalue of 2K on zero-sum vectors.

    Differences of simplex points sum to zero, so this bounds the curvature
    the descent steps see.
    """
    size = kernel.shape[0]
    if size < 2:
        return 1.0
    vector = np.random.default_rng(0).standard_normal(size)
    vector -= vector.mean()
    vector /= np.linalg.norm(vector)
    value = 0.0
    for _ in range(passes):
        image = kernel @ vector
        image -= image.mean()
        value = float(np.linalg.norm(image))
        if value == 0.0:
            break
        vector = image / value
    return max(2.0 * value, 1e-12)


def _kkt_polish(kernel: np.ndarray, field: np.ndarray, active: np.ndarray, passes: int = 10):
    """
    Solve the equality-constrained problem on an active set.

    Nodes that come out negative are dropped and the system re-solved;
    returns None when no nonnegative solution is found.
    """
    active = active.copy()
    for _ in range(passes):
        index = np.nonzero(active)[0]
        size = index.size
        if size == 0:
            return None
        system = np.zeros((size + 1, size + 1))
        system[:size, :size] = 2.0 * kernel[np.ix_(index, index)]
        system[:size, size] = -1.0
        system[size, :size] = 1.0
        rhs = np.concatenate((-2.0 * field[index], [1.0]))
        try:
            solution = solve(system, rhs)
        except (LinAlgError, ValueError):
            return None
        masses = solution[:size]
        if np.all(masses >= 0):
            full = np.zeros(field.size)
            full[index] = masses
            return full
        active[index[masses < 0]] = False
    return None


def equilibrium_solve(domain: Domain, w: Weight, grid_size: int = 800, max_iter: int = 20000,
                      tol: float = 1e-8, armijo: float = 1e-4, support_threshold: float = 1e-6,
                      polish_every: Optional[int] = 25) -> EquilibriumMeasure:
    """
    Minimize the discretized weighted energy over the probability simplex.

    Accelerated projected gradient: steps of length 1/L from an
    extrapolated anchor, L from a power-iteration curvature bound and
    doubled until the Armijo condition holds. A step that would raise the
    energy restarts the momentum and is retried from the current iterate,
    so the accepted energies never increase. Every polish_every iterations
    an active-set KKT solve on the current support is tried and kept only
    if it lowers the energy; polish_every of 0 or None turns it off.

    Args:
        domain: Interval union or circle
        w: Weight
        grid_size: Number of cells M
        max_iter: Iteration cap
        tol: Projected-gradient residual at convergence
        armijo: Sufficient-decrease constant
        support_threshold: Support estimate is {mass > support_threshold / M}
        polish_every: Iterations between active-set polish attempts

    Raises:
        DomainError: domain is not one-dimensional
        PreconditionError: grid_size below 100
        DegeneracyError: weight vanishes on the whole grid
        ConvergenceError: residual above tol after max_iter iterations
    """
    if domain.kind not in (INTERVAL_UNION, CIRCLE):
        raise DomainError(f"Equilibrium solving needs an interval union or a circle, got '{domain.kind}'")
    if grid_size < 100:
        raise PreconditionError(f"Equilibrium grid needs at least 100 cells, got {grid_size}")

    nodes, widths = domain.energy_cells(grid_size)
    log_w = w.log_value(nodes)
    free = np.isfinite(log_w)
    if not np.any(free):
        raise DegeneracyError("Weight vanishes on the entire equilibrium grid")
    kernel_free = energy_matrix(nodes[free], widths[free])
    field_free = -log_w[free]
    count = int(np.sum(free))
    cutoff = support_threshold / grid_size
    polish_period = int(polish_every) if polish_every else 0
    logger.info(f"=== Equilibrium solve: {domain.kind}, M={grid_size}, {count} admissible cells ===")

    def energy_of(m, km):
        return float(m @ km + 2.0 * field_free @ m)

    masses = np.full(count, 1.0 / count)
    kernel_masses = kernel_free @ masses
    energy = energy_of(masses, kernel_masses)
    gradient = 2.0 * kernel_masses + 2.0 * field_free
    residual = projected_gradient_residual(masses, gradient)
    lipschitz = 1.5 * _curvature_bound(kernel_free)
    momentum = 1.0
    # anchor = masses + push; anchor_gap = energy(anchor) - energy(masses)
    push, kernel_push, anchor_gap = np.zeros(count), np.zeros(count), 0.0
    history = [energy]
    iteration = 0

    while iteration < max_iter and residual > tol:
        if polish_period and iteration and iteration % polish_period == 0:
            polished = _kkt_polish(kernel_free, field_free, masses > cutoff)
            if polished is not None:
                kernel_polished = kernel_free @ polished
                polished_energy = energy_of(polished, kernel_polished)
                if polished_energy <= energy:
                    masses, kernel_masses, energy = polished, kernel_polished, polished_energy
                    gradient = 2.0 * kernel_masses + 2.0 * field_free
                    push, kernel_push, anchor_gap, momentum = np.zeros(count), np.zeros(count), 0.0, 1.0
                    history.append(energy)
                    residual = projected_gradient_residual(masses, gradient)
                    logger.debug(f"Active-set polish accepted at iteration {iteration}, "
                                 f"residual {residual:.3e}")
                    if residual <= tol:
                        break

        anchor = masses + push
        anchor_gradient = gradient + 2.0 * kernel_push
        # energy changes come from the quadratic expansion, not from differences of totals
        for _ in range(60):
            candidate = project_simplex(anchor - anchor_gradient / lipschitz)
            step = candidate - anchor
            kernel_step = kernel_free @ step
            slope = float(anchor_gradient @ step)
            change = slope + float(step @ kernel_step)
            if change <= armijo * slope:
                break
            lipschitz *= 2.0
        else:
            logger.debug(f"Line search stalled at iteration {iteration}")
            break
        iteration += 1

        gain = anchor_gap + change
        if gain > 0.0:
            # momentum overshot: restart from the current iterate
            push, kernel_push, anchor_gap, momentum = np.zeros(count), np.zeros(count), 0.0, 1.0
            continue
        if not np.any(candidate != masses):
            break

        next_momentum = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * momentum * momentum))
        beta = (momentum - 1.0) / next_momentum
        previous = masses
        masses = candidate
        kernel_masses = (kernel_free @ masses if iteration % 200 == 0
                         else kernel_masses + kernel_push + kernel_step)
        gradient = 2.0 * kernel_masses + 2.0 * field_free
        energy += gain
        history.append(energy)
        residual = projected_gradient_residual(masses, gradient)

        push = beta * (masses - previous)
        kernel_push = kernel_free @ push if beta > 0.0 else np.zeros(count)
        anchor_gap = float(gradient @ push + push @ kernel_push)
        momentum = next_momentum
        if iteration % 1000 == 0:
            logger.debug(f"Iteration {iteration}: energy {energy:.12g}, residual {residual:.3e}")

    if residual > tol:
        raise ConvergenceError(f"Equilibrium solver did not converge in {max_iter} iterations",
                               residual=residual)

    kernel_masses = kernel_free @ masses
    energy = energy_of(masses, kernel_masses)
    full = np.zeros(nodes.size)
    full[free] = masses
    support = full > cutoff
    potential = np.full(nodes.size, np.inf)
    potential[free] = kernel_masses + field_free
    on_support = potential[support]
    spread = float((on_support.max() - on_support.min()) / max(1.0, abs(float(on_support.mean()))))
    logger.info(f"Equilibrium converged after {iteration} iterations: energy {energy:.10g}, "
                f"delta_w {np.exp(-energy):.10g}, {int(support.sum())} support cells")
    return EquilibriumMeasure(domain, nodes, widths, full, float(energy), support, potential,
                              residual, spread, iteration, history)
