"""Rigorous numerical evaluation of D-finite functions.

A D-finite function is a solution of a linear differential equation with
polynomial coefficients.  Given such an operator, initial values and a path
of exact points, the functions below continue the solution analytically and
return certified enclosures (complex balls) of the results.

>>> from holomnum import parse_operator, numerical_solution
>>> dop = parse_operator("Dx - 1")
>>> print(numerical_solution(dop, [1], [0, 1], eps=1e-20))  # doctest: +SKIP
[2.71828182845904523536 +/- ...]
"""

from .balls import BranchCutError, PrecisionError, working_precision
from .cli import format_ball, format_matrix, parse_ball
from .exact import ConstantExpr, DomainError, ExactPoint, parse_point
from .local import (IrregularPointError, LogSeries, expand_local_solution,
                    local_basis_monomials)
from .numberfield import QQ, QQI, NFElem, NumberField
from .operators import (DiffOperator, UnsupportedExponentError, indicial_polynomial,
                        is_regular_singular, parse_operator, singular_points,
                        singularities, theta_form)
from .path import (CertificationError, Path, PathError, TransitionMatrix,
                   numerical_solution, numerical_transition_matrix)
from .summation import SummationPlan, summation, tail_bound
from .syntax import ParseError

__version__ = "0.1.0"

__all__ = [
    "DiffOperator", "parse_operator", "theta_form", "indicial_polynomial",
    "singular_points", "singularities", "is_regular_singular",
    "local_basis_monomials", "expand_local_solution", "LogSeries",
    "numerical_solution", "numerical_transition_matrix", "Path", "TransitionMatrix",
    "SummationPlan", "summation", "tail_bound",
    "ExactPoint", "ConstantExpr", "parse_point", "NumberField", "NFElem", "QQ", "QQI",
    "format_ball", "format_matrix", "parse_ball", "working_precision",
    "PrecisionError", "BranchCutError", "DomainError", "ParseError", "PathError",
    "CertificationError", "IrregularPointError", "UnsupportedExponentError",
]
