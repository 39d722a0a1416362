from typing import Optional


class PotlabError(Exception):
    """Base class for every error raised by potlab"""


class ConfigurationError(PotlabError, ValueError):
    """Invalid domain, weight, problem file or unsupported kind"""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None,
                 column: Optional[int] = None):
        self.field = field
        self.line = line
        self.column = column
        location = []
        if line is not None:
            location.append(f"line {line}" + (f", column {column}" if column is not None else ""))
        if field is not None:
            location.append(f"field '{field}'")
        if location:
            message = f"{message} ({'; '.join(location)})"
        super().__init__(message)


class PreconditionError(PotlabError, ValueError):
    """An operation was called outside its documented preconditions"""


class DomainError(PotlabError, ValueError):
    """Points or measures do not live where the operation needs them"""


class AdmissibilityError(PotlabError):
    """Weight fails the admissibility requirements"""


class NumericError(PotlabError, ArithmeticError):
    """Generic numerical failure"""


class DegeneracyError(NumericError):
    """Factorization breakdown or degenerate data"""

    def __init__(self, message: str, degree: Optional[int] = None):
        self.degree = degree
        if degree is not None:
            message = f"{message} (degree {degree})"
        super().__init__(message)


class ConvergenceError(NumericError):
    """Iterative solver did not reach its tolerance"""

    def __init__(self, message: str, residual: Optional[float] = None):
        self.residual = residual
        if residual is not None:
            message = f"{message} (last residual {residual:.3e})"
        super().__init__(message)


class LiftError(NumericError):
    """Point cannot be lifted to the circled set"""
