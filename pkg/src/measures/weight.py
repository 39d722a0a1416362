import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import mpmath
import numpy as np

from src.core.errors import ConfigurationError

logger = logging.getLogger(__name__)

UNIT = 'unit'
FIELD = 'field'
TABULATED = 'tabulated'

WEIGHT_KINDS = (UNIT, FIELD, TABULATED)
FIELD_ARGUMENTS = ('real', 'modulus')


@dataclass(frozen=True, eq=False)
class Weight:
    """
    Admissible weight w on a planar set.

    Field weights store the external field Q by ascending polynomial
    coefficients, w = exp(-Q); Q is evaluated at Re z by default or at |z|
    with argument='modulus'. Tabulated weights take the value of the
    nearest node (lowest index on ties).
    """
    kind: str = UNIT
    coefficients: Tuple[float, ...] = ()
    argument: str = 'real'
    nodes: Tuple[complex, ...] = ()
    values: Tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in WEIGHT_KINDS:
            raise ConfigurationError(f"Unsupported weight kind '{self.kind}'", field='weight.kind')
        if self.kind == FIELD:
            if len(self.coefficients) == 0:
                raise ConfigurationError("Field weight needs coefficients",
                                         field='weight.params.coefficients')
            object.__setattr__(self, 'coefficients', tuple(float(c) for c in self.coefficients))
            if self.argument not in FIELD_ARGUMENTS:
                raise ConfigurationError(f"Unknown field argument '{self.argument}'",
                                         field='weight.params.argument')
        if self.kind == TABULATED:
            if len(self.nodes) == 0 or len(self.nodes) != len(self.values):
                raise ConfigurationError("Tabulated weight needs matching nonempty nodes and values",
                                         field='weight.params.values')
            values = tuple(float(v) for v in self.values)
            if any(v < 0 for v in values):
                raise ConfigurationError("Tabulated weight values must be nonnegative",
                                         field='weight.params.values')
            object.__setattr__(self, 'values', values)
            object.__setattr__(self, 'nodes', tuple(complex(z) for z in self.nodes))

    @classmethod
    def unit(cls) -> 'Weight':
        return cls(UNIT)

    @classmethod
    def field(cls, coefficients: Sequence[float], argument: str = 'real') -> 'Weight':
        return cls(FIELD, coefficients=tuple(coefficients), argument=argument)

    @classmethod
    def gaussian(cls, scale: float = 1.0) -> 'Weight':
        """w(x) = exp(-scale * x^2)"""
        return cls.field([0.0, 0.0, scale])

    @classmethod
    def tabulated(cls, nodes: Sequence[complex], values: Sequence[float]) -> 'Weight':
        return cls(TABULATED, nodes=tuple(nodes), values=tuple(values))

    @property
    def is_unit(self) -> bool:
        return self.kind == UNIT

    @property
    def field_degree(self) -> int:
        coeffs = np.trim_zeros(np.asarray(self.coefficients, dtype=float), 'b')
        return max(len(coeffs) - 1, 0)

    def _field_argument(self, z: np.ndarray) -> np.ndarray:
        return np.abs(z) if self.argument == 'modulus' else z.real

    def field_value(self, z) -> np.ndarray:
        """External field Q(z); +inf where w vanishes"""
        return -self.log_value(z)

    def log_value(self, z) -> np.ndarray:
        """log w(z), -inf where w(z) = 0"""
        z = np.asarray(z, dtype=complex)
        if self.kind == UNIT:
            return np.zeros(z.shape)
        if self.kind == FIELD:
            x = self._field_argument(z)
            return -np.polynomial.polynomial.polyval(x, np.asarray(self.coefficients))
        with np.errstate(divide='ignore'):
            return np.log(self._tabulated_value(z))

    def _tabulated_value(self, z: np.ndarray) -> np.ndarray:
        nodes = np.asarray(self.nodes)
        flat = z.reshape(-1)
        nearest = np.argmin(np.abs(flat[:, None] - nodes[None, :]), axis=1)
        return np.asarray(self.values)[nearest].reshape(z.shape)

    def value(self, z) -> np.ndarray:
        if self.kind == TABULATED:
            return self._tabulated_value(np.asarray(z, dtype=complex))
        return np.exp(self.log_value(z))

    def __call__(self, z):
        return self.value(z)

    def mp_log_value(self, z):
        """log w(z) in the current mpmath precision"""
        if self.kind == UNIT:
            return mpmath.mpf(0)
        if self.kind == FIELD:
            x = abs(z) if self.argument == 'modulus' else mpmath.re(z)
            total = mpmath.mpf(0)
            for c in reversed(self.coefficients):
                total = total * x + c
            return -total
        value = float(self.value(complex(z)))
        return mpmath.log(value) if value > 0 else mpmath.ninf

    def to_dict(self) -> dict:
        if self.kind == UNIT:
            return {'kind': UNIT, 'params': {}}
        if self.kind == FIELD:
            return {'kind': FIELD, 'params': {'coefficients': list(self.coefficients),
                                              'argument': self.argument}}
        return {'kind': TABULATED, 'params': {'nodes': [[z.real, z.imag] for z in self.nodes],
                                              'values': list(self.values)}}


def eval_weight(w: Weight, z) -> float:
    """w(z) >= 0 at a single point"""
    return float(w.value(complex(z)))
