"""
Planar domains, admissible weights and measures represented as quadrature
rules, together with weak-* distances between measures.
"""

from .domain import Domain
from .weight import Weight, eval_weight
from .quadrature import QuadratureMeasure, build_quadrature, gauss_hermite_measure
from .distances import weak_star_distance
from .problem import WeightedProblem, build_problem, load_problem, problem_from_dict, read_problem_file
from .admissibility import AdmissibilityReport, check_admissible

__all__ = [
    'Domain',
    'Weight',
    'eval_weight',
    'QuadratureMeasure',
    'build_quadrature',
    'gauss_hermite_measure',
    'weak_star_distance',
    'WeightedProblem',
    'build_problem',
    'load_problem',
    'problem_from_dict',
    'read_problem_file',
    'AdmissibilityReport',
    'check_admissible',
]
