import json
import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np

from src.core.errors import ConfigurationError, DomainError, PreconditionError
from src.core.precision import extended_dps as default_extended_dps
from src.core.precision import validate_mode
from .domain import CIRCLE, DISK, INTERVAL_UNION, LINE, POINT_CLOUD, Domain
from .quadrature import QuadratureMeasure, build_quadrature
from .weight import FIELD, TABULATED, UNIT, Weight

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class WeightedProblem:
    """
    The triple (E, w, mu) with the quadrature order used for mu.

    For the real line the measure lives on a restriction interval; membership
    is still checked against the line.
    """
    domain: Domain
    weight: Weight
    measure: QuadratureMeasure
    order: int
    precision: str = 'double'
    normalized: bool = False
    restriction: Optional[float] = None

    def __post_init__(self):
        if int(self.order) < 1:
            raise PreconditionError(f"Quadrature order must be at least 1, got {self.order}")
        validate_mode(self.precision)
        inside = self.domain.contains(self.measure.nodes, tol=1e-12)
        if not np.all(inside):
            bad = self.measure.nodes[~inside][0]
            raise DomainError(f"Measure node {bad} lies outside the {self.domain.kind} domain")

    @property
    def extended(self) -> bool:
        return self.precision == 'extended'

    @property
    def field(self) -> np.ndarray:
        """Q at the quadrature nodes"""
        return self.weight.field_value(self.measure.nodes)

    def log_weight_nodes(self) -> np.ndarray:
        return self.weight.log_value(self.measure.nodes)

    def varying_weights(self, n: int) -> np.ndarray:
        """Quadrature weights of w^{2n} dmu"""
        if n == 0:
            return self.measure.weights.copy()
        return self.measure.weights * np.exp(2.0 * n * self.log_weight_nodes())

    def with_precision(self, precision: str, n: Optional[int] = None) -> 'WeightedProblem':
        if precision == self.precision:
            return self
        return build_problem(self.domain, self.weight, self.order, self.normalized, precision, n,
                             self.restriction)


def build_problem(domain: Domain, weight: Weight, order: int, normalize: bool = False,
                  precision: str = 'double', n: Optional[int] = None,
                  restriction: Optional[float] = None) -> WeightedProblem:
    """
    Assemble a WeightedProblem with a freshly built quadrature.

    Extended precision also builds the mpmath rule, at enough digits for
    level n when n is given.
    """
    validate_mode(precision)
    dps = default_extended_dps(n or 0) if precision == 'extended' else None
    if domain.kind == LINE:
        if restriction is None:
            raise ConfigurationError("Problems on the real line need a restriction interval",
                                     field='measure.restriction')
        measure = build_quadrature(Domain.interval(-restriction, restriction), order, normalize, dps)
    else:
        measure = build_quadrature(domain, order, normalize, dps)
    return WeightedProblem(domain, weight, measure, int(order), precision, bool(normalize), restriction)


def _require(mapping: Dict[str, Any], key: str, path: str):
    if not isinstance(mapping, dict) or key not in mapping:
        raise ConfigurationError("Missing required field", field=f"{path}.{key}" if path else key)
    return mapping[key]


def _complex(value, path: str) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigurationError("Complex numbers are written as [re, im]", field=path)
        return complex(float(value[0]), float(value[1]))
    try:
        return complex(float(value), 0.0)
    except (TypeError, ValueError):
        raise ConfigurationError(f"Expected a number, got {value!r}", field=path)


def parse_domain(spec: Dict[str, Any]) -> Domain:
    kind = _require(spec, 'kind', 'domain')
    params = spec.get('params', {}) or {}
    try:
        if kind == INTERVAL_UNION:
            intervals = _require(params, 'intervals', 'domain.params')
            return Domain.interval_union([(float(a), float(b)) for a, b in intervals])
        if kind in (CIRCLE, DISK):
            radius = float(params.get('radius', 1.0))
            center = _complex(params.get('center', 0.0), 'domain.params.center')
            return Domain.circle(radius, center) if kind == CIRCLE else Domain.disk(radius, center)
        if kind == POINT_CLOUD:
            points = _require(params, 'points', 'domain.params')
            return Domain.point_cloud([_complex(p, f'domain.params.points[{i}]')
                                       for i, p in enumerate(points)])
        if kind == LINE:
            return Domain.real_line()
    except (TypeError, ValueError) as e:
        if isinstance(e, ConfigurationError):
            raise
        raise ConfigurationError(f"Malformed domain parameters: {e}", field='domain.params')
    raise ConfigurationError(f"Unsupported domain kind '{kind}'", field='domain.kind')


def parse_weight(spec: Optional[Dict[str, Any]]) -> Weight:
    if spec is None:
        return Weight.unit()
    kind = _require(spec, 'kind', 'weight')
    params = spec.get('params', {}) or {}
    if kind == UNIT:
        return Weight.unit()
    if kind == FIELD:
        coefficients = _require(params, 'coefficients', 'weight.params')
        try:
            return Weight.field([float(c) for c in coefficients], params.get('argument', 'real'))
        except (TypeError, ValueError) as e:
            if isinstance(e, ConfigurationError):
                raise
            raise ConfigurationError(f"Malformed field coefficients: {e}", field='weight.params.coefficients')
    if kind == TABULATED:
        nodes = _require(params, 'nodes', 'weight.params')
        values = _require(params, 'values', 'weight.params')
        return Weight.tabulated([_complex(z, f'weight.params.nodes[{i}]') for i, z in enumerate(nodes)],
                                values)
    raise ConfigurationError(f"Unsupported weight kind '{kind}'", field='weight.kind')


def problem_from_dict(spec: Dict[str, Any], n: Optional[int] = None) -> WeightedProblem:
    """Build a problem from the parsed JSON problem file"""
    if not isinstance(spec, dict):
        raise ConfigurationError("Problem file must hold a JSON object")
    domain = parse_domain(_require(spec, 'domain', ''))
    weight = parse_weight(spec.get('weight'))
    measure = spec.get('measure', {}) or {}
    precision = (spec.get('precision', {}) or {}).get('mode', 'double')
    rule = measure.get('rule', 'gauss')
    if rule not in ('gauss', 'equispaced', 'counting'):
        raise ConfigurationError(f"Unknown measure rule '{rule}'", field='measure.rule')
    order = measure.get('order')
    if order is None:
        order = 4 * ((n or 0) + 1) if domain.kind != POINT_CLOUD else len(domain.points)
    if not isinstance(order, int) or isinstance(order, bool):
        raise ConfigurationError(f"Quadrature order must be an integer, got {order!r}", field='measure.order')
    restriction = measure.get('restriction')
    if restriction is not None:
        restriction = float(restriction)
    return build_problem(domain, weight, order, bool(measure.get('normalize', False)), precision, n,
                         restriction)


def read_problem_file(path: str) -> Dict[str, Any]:
    """
    Parse a JSON problem file without building the quadrature.

    Syntax errors report line and column.
    """
    try:
        with open(path, 'r') as file:
            text = file.read()
    except FileNotFoundError:
        raise ConfigurationError(f"Problem file not found: {path}")
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"Malformed problem file {path}: {e.msg}", line=e.lineno, column=e.colno)
    logger.info(f"Loaded problem file {path}")
    return spec


def load_problem(path: str, n: Optional[int] = None) -> WeightedProblem:
    """
    Read a JSON problem file and build the problem at level n.

    Schema errors report the dotted field path.
    """
    return problem_from_dict(read_problem_file(path), n)
