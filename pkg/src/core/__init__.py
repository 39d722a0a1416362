"""
Core utilities shared by every potlab component: exceptions, precision
helpers and the deterministic parallel map.
"""

from .errors import (
    PotlabError,
    ConfigurationError,
    PreconditionError,
    DomainError,
    AdmissibilityError,
    NumericError,
    DegeneracyError,
    ConvergenceError,
    LiftError,
)
from .parallel import thread_count, ordered_map, substream

__all__ = [
    'PotlabError',
    'ConfigurationError',
    'PreconditionError',
    'DomainError',
    'AdmissibilityError',
    'NumericError',
    'DegeneracyError',
    'ConvergenceError',
    'LiftError',
    'thread_count',
    'ordered_map',
    'substream',
]
