import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from src.core.errors import PreconditionError
from src.measures.problem import WeightedProblem
from src.measures.weight import Weight
from src.orthopoly.basis import OrthoBasis
from src.partition.vandermonde import log_weighted_vdm
from .sampler import KERNEL_CHAIN, EnsembleSample, sample_pn

logger = logging.getLogger(__name__)


def _threshold_log(n: int, eta: float, delta_w: float) -> float:
    if not 0.0 < eta < delta_w:
        raise PreconditionError(f"Need 0 < eta < delta_w, got eta={eta}, delta_w={delta_w}")
    return n * n * float(np.log(delta_w - eta))


def indicator_A(points, w: Weight, n: int, eta: float, delta_w: float) -> bool:
    """True iff |VDM|^2 prod w^{2n} >= (delta_w - eta)^{n^2}"""
    threshold = _threshold_log(n, eta, delta_w)
    return bool(2.0 * log_weighted_vdm(points, w, n) >= threshold)


@dataclass
class DeviationReport:
    """Estimated P_n-probability of the complement of A_{n,eta} against the bound"""
    level: int
    eta: float
    delta_w: float
    threshold_log: float
    estimate: float
    stderr: float
    bound: float
    count: int

    @property
    def passed(self) -> bool:
        return self.estimate - 3.0 * self.stderr <= self.bound

    def to_row(self) -> dict:
        return {
            'n': self.level,
            'eta': self.eta,
            'estimate': self.estimate,
            'stderr': self.stderr,
            'bound': self.bound,
            'pass': self.passed,
        }


def deviation_bound(n: int, eta: float, delta_w: float) -> float:
    """(1 - eta / (2 delta_w))^{n^2}"""
    return float((1.0 - eta / (2.0 * delta_w)) ** (n * n))


def _report(log_wvdm: np.ndarray, n: int, eta: float, delta_w: float) -> DeviationReport:
    threshold = _threshold_log(n, eta, delta_w)
    outside = 2.0 * log_wvdm < threshold
    count = int(log_wvdm.size)
    estimate = float(np.mean(outside))
    stderr = float(np.sqrt(estimate * (1.0 - estimate) / count))
    return DeviationReport(n, eta, delta_w, threshold, estimate, stderr,
                           deviation_bound(n, eta, delta_w), count)


def _sample_log_wvdm(sample: EnsembleSample, w: Weight) -> np.ndarray:
    return sample.log_weighted_vdm(w.log_value)


def large_deviation_estimate(problem: WeightedProblem, basis: Optional[OrthoBasis], n: int, eta: float,
                             count: int, seed: int, delta_w: Optional[float] = None,
                             method: str = KERNEL_CHAIN, sample: Optional[EnsembleSample] = None,
                             min_count: int = 10_000, threads: Optional[int] = None) -> DeviationReport:
    """
    Monte Carlo estimate of P_n(E^{n+1} minus A_{n,eta}) with its binomial stderr.

    delta_w defaults to exp(-I^w) from the equilibrium solver.
    """
    if count < min_count:
        raise PreconditionError(f"Deviation estimates need at least {min_count} samples, got {count}")
    if delta_w is None:
        from src.equilibrium.solver import equilibrium_solve
        delta_w = equilibrium_solve(problem.domain, problem.weight).delta_w
    _threshold_log(n, eta, delta_w)
    if sample is None:
        sample = sample_pn(problem, basis, n, count, seed, method, threads)
    report = _report(_sample_log_wvdm(sample, problem.weight), n, eta, delta_w)
    logger.info(f"Large deviation n={n}, eta={eta}: estimate {report.estimate:.5g} "
                f"+/- {report.stderr:.2g}, bound {report.bound:.5g}")
    return report


def complement_curve(sample: EnsembleSample, w: Weight, etas: Sequence[float],
                     delta_w: float) -> List[DeviationReport]:
    """Complement estimates for several eta on one fixed sample set"""
    log_wvdm = _sample_log_wvdm(sample, w)
    return [_report(log_wvdm, sample.level, float(eta), delta_w) for eta in etas]
