import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad

from src.core.errors import NumericError, PreconditionError
from src.measures.domain import Domain
from src.measures.quadrature import QuadratureMeasure, build_quadrature, gauss_hermite_measure
from src.orthopoly.basis import evaluate_recurrence, stieltjes_recurrence

logger = logging.getLogger(__name__)

CHAIN_TOLERANCE = 1e-8
FIT_FLOOR = 1e-15


def validate_field(coefficients: Sequence[float]) -> np.ndarray:
    """
    Q as ascending coefficients: even degree >= 2, positive leading
    coefficient and Q >= 0 on the real line.
    """
    q = np.trim_zeros(np.asarray(coefficients, dtype=float), 'b')
    degree = q.size - 1
    if degree < 2 or degree % 2:
        raise PreconditionError(f"External field must have even degree >= 2, got degree {degree}")
    if q[-1] <= 0:
        raise PreconditionError("External field needs a positive leading coefficient")
    critical = np.polynomial.polynomial.polyroots(np.polynomial.polynomial.polyder(q))
    real = critical[np.abs(critical.imag) < 1e-9].real
    if real.size and np.min(np.polynomial.polynomial.polyval(real, q)) < -1e-12:
        raise PreconditionError("External field must be nonnegative on the real line")
    return q


def is_pure_quadratic(q: np.ndarray) -> bool:
    return q.size == 3 and q[1] == 0.0


def _log_moment_integrand(q: np.ndarray, n: int, k: int, x):
    """2k log|x| - 2nQ(x), taking x^0 = 1 at the origin"""
    exponent = -2.0 * n * np.polynomial.polynomial.polyval(x, q)
    if k == 0:
        return exponent
    with np.errstate(divide='ignore'):
        return exponent + 2.0 * k * np.log(np.abs(x))


def _log_peak(q: np.ndarray, n: int, k: int, span: float = 64.0) -> Tuple[float, np.ndarray]:
    """Max of 2k log|x| - 2nQ(x) on a fine grid and the peak abscissae"""
    x = np.linspace(-span, span, 40001)
    exponent = _log_moment_integrand(q, n, k, x)
    top = float(np.max(exponent))
    peaks = x[exponent >= top - 1e-9]
    return top, peaks


def tail_ratio(q: np.ndarray, n: int, k: int, a: float) -> float:
    """int_{|x|>A} x^{2k} e^{-2nQ} / int_R x^{2k} e^{-2nQ}, in scaled form"""
    shift, peaks = _log_peak(q, n, k)

    def integrand(x):
        return float(np.exp(_log_moment_integrand(q, n, k, x) - shift))

    options = dict(epsabs=0.0, epsrel=1e-10, limit=200)
    inner_points = [float(p) for p in peaks if -a < p < a] + [0.0]
    core, _ = quad(integrand, -a, a, points=sorted(set(inner_points)), **options)
    right, _ = quad(integrand, a, np.inf, **options)
    left, _ = quad(integrand, -np.inf, -a, **options)
    tails = right + left
    return float(tails / (core + tails))


def choose_restriction(coefficients: Sequence[float], n: int, tol: float = 1e-12,
                       max_doublings: int = 20) -> float:
    """
    Smallest A in 1, 2, 4, ... whose monomial tail ratios are all <= tol.

    Raises:
        PreconditionError: Q not admissible, or tol not positive
        NumericError: no A accepted within max_doublings
    """
    q = validate_field(coefficients)
    if not tol > 0:
        raise PreconditionError(f"Restriction tolerance must be positive, got {tol}")
    a = 1.0
    for _ in range(max_doublings + 1):
        worst = max(tail_ratio(q, n, k, a) for k in range(n + 1))
        logger.debug(f"Restriction A={a:g} at level {n}: worst tail ratio {worst:.3e}")
        if worst <= tol:
            logger.info(f"Accepted restriction interval [-{a:g}, {a:g}] at level {n}")
            return a
        a *= 2.0
    raise NumericError(f"No restriction interval found up to A={a / 2:g} for tol {tol:g}")


def full_line_rule(q: np.ndarray, n: int, a: float, order: int, wide_factor: float = 3.0):
    """
    (nodes, weights of e^{-2nQ} dx) on the real line.

    Pure quadratic fields use rescaled Gauss-Hermite; other fields a wide
    Gauss-Legendre rule on [-wide_factor A, wide_factor A].
    """
    if is_pure_quadratic(q):
        measure = gauss_hermite_measure(n, float(q[2]), order, offset=float(q[0]))
        return measure.nodes.real, measure.weights
    measure = build_quadrature(Domain.interval(-wide_factor * a, wide_factor * a), order)
    x = measure.nodes.real
    return x, measure.weights * np.exp(-2.0 * n * np.polynomial.polynomial.polyval(x, q))


def restricted_rule(q: np.ndarray, n: int, a: float, order: int):
    measure: QuadratureMeasure = build_quadrature(Domain.interval(-a, a), order)
    x = measure.nodes.real
    return x, measure.weights * np.exp(-2.0 * n * np.polynomial.polynomial.polyval(x, q))


def _cross_log_norms(recurrence, log_norms, n, x, v) -> np.ndarray:
    """log norms of one monic family measured with another rule"""
    values = evaluate_recurrence(recurrence, log_norms[0], x.astype(complex), n).real
    with np.errstate(divide='ignore'):
        return log_norms + 0.5 * np.log(np.sum(v * values * values, axis=1))


@dataclass
class RestrictionReport:
    """
    Monic norms of the full-line family p_j and the restricted family q_j.

    Index j = 0..n is the polynomial degree. ratios are ||q_j||_R / ||q_j||_E.
    """
    level: int
    half_width: float
    log_p_full: np.ndarray
    log_p_restricted: np.ndarray
    log_q_restricted: np.ndarray
    log_q_full: np.ndarray
    ratios: np.ndarray
    fit: Optional[Tuple[float, float]] = None
    notes: List[str] = field(default_factory=list)

    @property
    def log_gap_bound(self) -> float:
        """Bound on log Z(R) - log Z(E): 2 sum log ratio_j"""
        return float(2.0 * np.sum(np.log(self.ratios)))

    def to_rows(self) -> List[dict]:
        return [{
            'degree': j,
            'norm_p_full': float(np.exp(self.log_p_full[j])),
            'norm_p_restricted': float(np.exp(self.log_p_restricted[j])),
            'norm_q_restricted': float(np.exp(self.log_q_restricted[j])),
            'norm_q_full': float(np.exp(self.log_q_full[j])),
            'ratio': float(self.ratios[j]),
        } for j in range(self.level + 1)]


def exponential_fit(x: np.ndarray, excess: np.ndarray) -> Optional[Tuple[float, float]]:
    """(a, b) with excess ~ a e^{-b x}; points under the noise floor are dropped"""
    keep = excess > FIT_FLOOR
    if int(np.sum(keep)) < 2:
        return None
    slope, intercept = np.polyfit(x[keep], np.log(excess[keep]), 1)
    return float(np.exp(intercept)), float(-slope)


def restricted_norm_compare(coefficients: Sequence[float], n: int, a: float,
                            full_order: Optional[int] = None, restricted_order: int = 200,
                            wide_factor: float = 3.0) -> RestrictionReport:
    """
    Compare the orthogonal families of e^{-2nQ} dx over R and over [-A, A].

    Raises:
        NumericError: the norm chain ||q_j||_E <= ||p_j||_E <= ||p_j||_R <= ||q_j||_R
            fails beyond 1e-8 in log
    """
    q = validate_field(coefficients)
    if not a > 0:
        raise PreconditionError(f"Restriction half-width must be positive, got {a}")
    if full_order is None:
        full_order = max(4 * (n + 1), 100) if is_pure_quadratic(q) else max(8 * (n + 1), 400)
    x_full, v_full = full_line_rule(q, n, a, full_order, wide_factor)
    x_rest, v_rest = restricted_rule(q, n, a, max(restricted_order, 4 * (n + 1)))

    alpha_p, beta_p, log_p_full = stieltjes_recurrence(x_full, v_full, n)
    alpha_q, beta_q, log_q_rest = stieltjes_recurrence(x_rest, v_rest, n)
    log_p_rest = _cross_log_norms((alpha_p, beta_p), log_p_full, n, x_rest, v_rest)
    log_q_full = _cross_log_norms((alpha_q, beta_q), log_q_rest, n, x_full, v_full)

    chain = np.vstack([log_q_rest, log_p_rest, log_p_full, log_q_full])
    violations = np.nonzero(np.any(np.diff(chain, axis=0) < -CHAIN_TOLERANCE, axis=0))[0]
    if violations.size:
        j = int(violations[0])
        raise NumericError(f"Restricted norm chain violated at degree {j}: "
                           f"{np.exp(chain[:, j]).tolist()}")

    ratios = np.exp(log_q_full - log_q_rest)
    fit = exponential_fit(np.arange(n + 1, dtype=float), ratios - 1.0)
    report = RestrictionReport(n, float(a), log_p_full, log_p_rest, log_q_rest, log_q_full, ratios, fit)
    if fit is None:
        report.notes.append("ratio - 1 below the noise floor at almost every degree; no fit")
    logger.debug(f"Restriction report n={n}, A={a:g}: max ratio {ratios.max():.16g}")
    return report


@dataclass
class RestrictionDecay:
    """max_j (ratio_j - 1) against the level for a fixed interval"""
    half_width: float
    levels: List[int]
    excess: List[float]
    fit: Optional[Tuple[float, float]]


def restriction_decay(coefficients: Sequence[float], a: float, n_list: Sequence[int]) -> RestrictionDecay:
    """Level-wise decay max_j(ratio_j - 1) ~ a e^{-b n} on [-A, A]"""
    levels = [int(n) for n in n_list]
    excess = [float(np.max(restricted_norm_compare(coefficients, n, a).ratios) - 1.0) for n in levels]
    fit = exponential_fit(np.asarray(levels, dtype=float), np.asarray(excess))
    if fit is not None:
        logger.info(f"Restriction decay on [-{a:g}, {a:g}]: a={fit[0]:.4g}, b={fit[1]:.4g}")
    return RestrictionDecay(float(a), levels, excess, fit)
