"""PGV^2 image denoising with bilevel learning of the regularizer.

The regularizer replaces the symmetrized gradient of TGV^2 by a first-order
operator ``B``; the two-parameter family ``B_{s,t}`` interpolates between the
symmetric (TGV) and the non-symmetric gradient. Level 2 denoises for fixed
parameters, Level 1 grid-searches (alpha0, alpha1, s, t) against a clean
image.
"""

from .core import (
    Alpha, GridSpec, OperatorCoefficients, ScalarImage, SkewParams, SolverConfig,
    TrainingPair, TrainingResult,
)
from .diffops import (
    apply_B, apply_B_adjoint, div, grad, operator_distance, operator_norm_linf, skew_operator,
)
from .seminorm import pgv2, pgv2_continuity_probe, tv
from .solver import solve_level2
from .training import cost_landscape, evaluate_cost, grid_search

__version__ = "0.1.0"

__all__ = [
    "Alpha", "GridSpec", "OperatorCoefficients", "ScalarImage", "SkewParams", "SolverConfig",
    "TrainingPair", "TrainingResult", "apply_B", "apply_B_adjoint", "cost_landscape", "div",
    "evaluate_cost", "grad", "grid_search", "operator_distance", "operator_norm_linf", "pgv2",
    "pgv2_continuity_probe", "skew_operator", "solve_level2", "tv",
]
