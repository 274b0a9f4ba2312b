"""Multiprecision multipoint root finding: an optimal eighth-order family and friends."""

__version__ = "0.1.0"

from .numerics import Precision
from .expr import ScalarFunction, builtin, from_expression, parse
from .solvers import (
    FamilyParams,
    FixedIterations,
    MethodSpec,
    SolveConfig,
    SolveResult,
    Status,
    Tolerance,
    solve,
    validate_weights,
    weights_from_params,
)
from .analysis import coc, efficiency_index, measure_coc

__all__ = [
    "FamilyParams",
    "FixedIterations",
    "MethodSpec",
    "Precision",
    "ScalarFunction",
    "SolveConfig",
    "SolveResult",
    "Status",
    "Tolerance",
    "builtin",
    "coc",
    "efficiency_index",
    "from_expression",
    "measure_coc",
    "parse",
    "solve",
    "validate_weights",
    "weights_from_params",
]
