"""Total variation and the PGV^2 seminorm of a fixed image.

``pgv2`` minimizes over the auxiliary field v only::

    alpha0 * sum |grad u - v|_2 + alpha1 * sum |B v|_F

reusing the Level-2 primal-dual kernel with the image block frozen.
"""

from __future__ import annotations

import numpy as np

from . import diffops
from .core import Alpha, OperatorCoefficients, SkewParams, SolverConfig, as_array
from .solver import SaddleState, SolveDiagnostics, regularizer_value, run_primal_dual


def tv(u) -> float:
    """Isotropic discrete total variation, ``sum_pixels |grad u|_2``."""
    g = diffops.grad(u)
    return float(np.sum(np.sqrt(np.sum(g * g, axis=0))))


def pgv2(u, alpha: Alpha, coeffs: OperatorCoefficients, cfg: SolverConfig | None = None,
         *, return_diagnostics: bool = False):
    """Value of PGV^2_{alpha,B}(u) and the minimizing field v.

    The iteration starts from v = 0, whose objective is ``alpha0 * tv(u)``,
    and returns the checked iterate of lowest objective, so the value never
    exceeds that bound.
    """
    cfg = cfg or SolverConfig()
    if not isinstance(alpha, Alpha):
        alpha = Alpha(*alpha)
    a = np.ascontiguousarray(as_array(u), dtype=np.float64)
    h, w = a.shape
    state = SaddleState(a.copy(), np.zeros((2, h, w)), np.zeros((2, h, w)),
                        np.zeros((2, 2, h, w)), a.copy(), np.zeros((2, h, w)))
    start = alpha.alpha0 * tv(a)
    if start == 0.0:
        diag = SolveDiagnostics(0, 0.0, [0.0], True)
        value, v = 0.0, state.v
    else:
        diag = run_primal_dual(a, alpha, coeffs, cfg, state, freeze_u=True, keep_best=True)
        v = state.v
        value = regularizer_value(a, v, alpha, coeffs)
        if value > start:
            # every checked iterate was worse than the v = 0 start
            v = np.zeros_like(v)
            value = start
    out = (value, v.copy())
    return out + (diag,) if return_diagnostics else out


def pgv2_continuity_probe(u, alpha: Alpha, params_seq, cfg: SolverConfig | None = None):
    """``pgv2`` along a sequence of (s, t) parameters of the interpolating family."""
    params_seq = [p if isinstance(p, SkewParams) else SkewParams(*p) for p in params_seq]
    if not params_seq:
        raise ValueError("params_seq must be non-empty")
    return [pgv2(u, alpha, diffops.skew_operator(p), cfg)[0] for p in params_seq]
