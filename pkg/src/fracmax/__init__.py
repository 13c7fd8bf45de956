"""Fractional operators, fractional ODE/PDE solvers and numerical checks of their extremum principles."""

from .errors import (
    AccuracyError,
    DivergenceError,
    DomainError,
    FracmaxError,
    SolverError,
    UsageError,
    ValidationError,
)
from .fracops import FracLaplacianSpec, Grid1D, OrderSpec, SampledFn
from .report import ExtremumReport, VerificationReport
from .rng import Xoshiro256

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "DivergenceError",
    "DomainError",
    "ExtremumReport",
    "FracLaplacianSpec",
    "FracmaxError",
    "Grid1D",
    "OrderSpec",
    "SampledFn",
    "SolverError",
    "UsageError",
    "ValidationError",
    "VerificationReport",
    "Xoshiro256",
]
