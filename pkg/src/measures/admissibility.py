import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from src.core.errors import AdmissibilityError
from .domain import DISK, LINE, POINT_CLOUD, Domain
from .weight import FIELD, Weight

logger = logging.getLogger(__name__)

DECAY_RADII = tuple(2.0 ** k for k in range(0, 7))


@dataclass
class AdmissibilityReport:
    """Outcome of the admissibility heuristics for a weight on a domain"""
    nonnegative: bool
    positivity_fraction: float
    positivity_measure: float
    decay: List[Tuple[float, float]] = field(default_factory=list)
    peak_location: Optional[float] = None
    admissible: bool = True
    notes: List[str] = field(default_factory=list)


def _positivity_measure(domain: Domain, fraction: float, positive_count: int) -> float:
    if domain.kind == POINT_CLOUD:
        return float(positive_count)
    if domain.kind == DISK:
        return float(fraction * np.pi * domain.radius ** 2)
    return float(fraction * domain.length)


def _line_decay(w: Weight, samples: int):
    """Shell maxima of |x| w(x) over [R_{k-1}, R_k] for doubling radii, both signs"""
    shells = []
    inner = 0.0
    for outer in DECAY_RADII:
        x = np.linspace(inner, outer, samples)
        x = np.concatenate((x, -x))
        with np.errstate(divide='ignore'):
            log_values = np.log(np.abs(x)) + w.log_value(x)
        shells.append((float(outer), float(np.exp(np.max(log_values)))))
        inner = outer
    return shells


def _peak_location(w: Weight, samples: int) -> float:
    """Positive maximizer of x w(x), refined by a bounded scalar search"""
    x = np.linspace(0.0, DECAY_RADII[-1], samples * len(DECAY_RADII))
    with np.errstate(divide='ignore'):
        log_values = np.log(x) + w.log_value(x)
    k = int(np.argmax(log_values))
    lo, hi = x[max(k - 1, 0)], x[min(k + 1, x.size - 1)]
    if hi <= lo:
        return float(x[k])
    result = minimize_scalar(lambda t: -(np.log(t) + float(w.log_value(t))) if t > 0 else np.inf,
                             bounds=(max(lo, 1e-300), hi), method='bounded',
                             options={'xatol': 1e-12})
    return float(result.x)


def check_admissible(w: Weight, domain: Domain, samples: int = 2001) -> AdmissibilityReport:
    """
    Heuristic admissibility check.

    Bounded domains are sampled on their search grid; on the real line the
    decay |x| w(x) -> 0 is checked on doubling shells. Polarity of the
    positivity set is approximated by positive linear measure.

    Raises:
        AdmissibilityError: positivity set empty or decay violated
    """
    notes = []
    if domain.kind == LINE:
        x = np.linspace(-DECAY_RADII[-1], DECAY_RADII[-1], samples * len(DECAY_RADII))
        values = w.value(x)
        nonnegative = bool(np.all(values >= 0))
        positive = values > 0
        fraction = float(np.mean(positive))
        measure = float(fraction * 2.0 * DECAY_RADII[-1])
        decay = _line_decay(w, samples)
        maxima = np.array([m for _, m in decay])
        peak = float(np.max(maxima))
        decaying = peak > 0 and maxima[-1] <= 1e-3 * peak and np.all(np.diff(maxima[-3:]) <= 0)
        if w.kind == FIELD and (w.field_degree % 2 == 1 or w.coefficients[w.field_degree] <= 0):
            notes.append("field must have even degree and positive leading coefficient on the line")
            decaying = False
        if not np.any(positive):
            raise AdmissibilityError("Weight is not admissible: positivity set empty")
        if not decaying:
            raise AdmissibilityError(f"Weight is not admissible: |x|w(x) does not decay "
                                     f"(shell maxima {maxima.tolist()})")
        report = AdmissibilityReport(nonnegative, fraction, measure, decay, _peak_location(w, samples),
                                     True, notes)
        logger.info(f"Weight admissible on the line, |x|w(x) peaks at {report.peak_location:.6g}")
        return report

    grid = domain.grid(samples)
    values = w.value(grid)
    nonnegative = bool(np.all(values >= 0))
    positive = values > 0
    fraction = float(np.mean(positive))
    if not np.any(positive):
        raise AdmissibilityError("Weight is not admissible: positivity set empty")
    if domain.kind == POINT_CLOUD:
        notes.append("finite point sets are polar; positivity is counted, not measured")
    measure = _positivity_measure(domain, fraction, int(np.sum(positive)))
    logger.debug(f"Weight positive on {fraction:.3%} of the {domain.kind} grid")
    return AdmissibilityReport(nonnegative, fraction, measure, [], None, nonnegative, notes)
