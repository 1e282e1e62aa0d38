"""Numerical laboratory for local Hardy spaces h^p on 1-D grids."""

from .errors import (
    HardyLabError,
    ResolutionError,
    ConditioningError,
    ParameterError,
    TruncationError,
    TailDivergenceError,
    NyquistError,
    ConfigError,
)
from .grid import Ball, GridFunction, integrate, moment, ls_norm, weighted_tail
from .params import HardyParams, derive_exponents, phi_p

__all__ = [
    "HardyLabError",
    "ResolutionError",
    "ConditioningError",
    "ParameterError",
    "TruncationError",
    "TailDivergenceError",
    "NyquistError",
    "ConfigError",
    "Ball",
    "GridFunction",
    "integrate",
    "moment",
    "ls_norm",
    "weighted_tail",
    "HardyParams",
    "derive_exponents",
    "phi_p",
]
