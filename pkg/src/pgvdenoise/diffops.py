"""Discrete first-order operators on unit-spaced grids.

All derivatives are forward differences with a replicate (Neumann) boundary:
the difference across the last row/column is zero. Every adjoint below is the
exact algebraic transpose of its forward operator, which the primal-dual
solver relies on.
"""

from __future__ import annotations

import numpy as np

from .core import OperatorCoefficients, SkewParams, as_array


def forward_diff(u: np.ndarray, axis: int) -> np.ndarray:
    """``d[x] = u[x+1] - u[x]`` along ``axis``, zero on the last slice."""
    d = np.zeros_like(u)
    n = u.shape[axis]
    hi = [slice(None)] * u.ndim
    lo = [slice(None)] * u.ndim
    hi[axis] = slice(1, n)
    lo[axis] = slice(0, n - 1)
    d[tuple(lo)] = u[tuple(hi)] - u[tuple(lo)]
    return d


def forward_diff_adjoint(p: np.ndarray, axis: int) -> np.ndarray:
    """Transpose of :func:`forward_diff` (a negated backward difference)."""
    out = np.zeros_like(p)
    n = p.shape[axis]

    def sl(a, b):
        s = [slice(None)] * p.ndim
        s[axis] = slice(a, b)
        return tuple(s)

    # rows 0..n-2 of D^T p receive -p[x]; rows 1..n-1 receive +p[x-1]
    out[sl(0, n - 1)] -= p[sl(0, n - 1)]
    out[sl(1, n)] += p[sl(0, n - 1)]
    return out


def grad(u) -> np.ndarray:
    """Forward-difference gradient, returns a vector field of shape (2, H, W)."""
    u = as_array(u)
    return np.stack([forward_diff(u, 0), forward_diff(u, 1)])


def div(p: np.ndarray) -> np.ndarray:
    """Discrete divergence, ``div = -grad^T``."""
    p = np.asarray(p, dtype=np.float64)
    return -(forward_diff_adjoint(p[0], 0) + forward_diff_adjoint(p[1], 1))


def jacobian(v: np.ndarray) -> np.ndarray:
    """``J[i, k] = d_i v_k``, shape (2, 2, H, W)."""
    v = np.asarray(v, dtype=np.float64)
    return np.stack([forward_diff(v, 1), forward_diff(v, 2)])


def jacobian_adjoint(g: np.ndarray) -> np.ndarray:
    """Transpose of :func:`jacobian`: maps (2, 2, H, W) to a vector field."""
    g = np.asarray(g, dtype=np.float64)
    return forward_diff_adjoint(g[0], 1) + forward_diff_adjoint(g[1], 2)


def skew_operator(params: SkewParams) -> OperatorCoefficients:
    """Coefficients of the interpolating family ``B_{s,t} v = B_t d_1 v + B_s d_2 v``.

    Applied to ``v`` this gives the matrix field::

        [[d1 v1,               (1-t) d1 v2 + (1-s) d2 v1],
         [t d1 v2 + s d2 v1,   d2 v2                    ]]

    ``s = t = 1/2`` is the symmetrized gradient (TGV), ``t = 0, s = 1`` the
    full gradient transpose (non-symmetric TGV).
    """
    if not isinstance(params, SkewParams):
        params = SkewParams(*params)
    s, t = params.s, params.t
    b1 = np.zeros((2, 2, 2))
    b2 = np.zeros((2, 2, 2))
    b1[0, 0, 0] = 1.0
    b1[0, 1, 1] = 1.0 - t
    b1[1, 0, 1] = t
    b2[1, 1, 1] = 1.0
    b2[0, 1, 0] = 1.0 - s
    b2[1, 0, 0] = s
    return OperatorCoefficients(b1, b2)


def symmetric_gradient_operator() -> OperatorCoefficients:
    return skew_operator(SkewParams(0.5, 0.5))


def apply_B(coeffs: OperatorCoefficients, v: np.ndarray) -> np.ndarray:
    """``(Bv)_lj = sum_{i,k} b^i_ljk d_i v_k``, shape (2, 2, H, W)."""
    return np.einsum("iljk,ik...->lj...", coeffs.tensor, jacobian(v))


def apply_B_adjoint(coeffs: OperatorCoefficients, q: np.ndarray) -> np.ndarray:
    """Exact transpose of :func:`apply_B`."""
    g = np.einsum("iljk,lj...->ik...", coeffs.tensor, np.asarray(q, dtype=np.float64))
    return jacobian_adjoint(g)


def operator_distance(a: OperatorCoefficients, b: OperatorCoefficients) -> float:
    """Sum over directions of the Frobenius norm of the coefficient difference."""
    return float(np.linalg.norm((a.b1 - b.b1).ravel()) + np.linalg.norm((a.b2 - b.b2).ravel()))


def operator_norm_linf(a: OperatorCoefficients) -> float:
    return operator_distance(a, OperatorCoefficients.zeros())


def rigid_motion_field(height: int, width: int, rotation: float = 1.0, shift=(0.0, 0.0)):
    """Sample ``v(x) = rotation * (x2, -x1) + shift`` on the pixel grid."""
    x1, x2 = np.meshgrid(np.arange(height, dtype=float), np.arange(width, dtype=float),
                         indexing="ij")
    return np.stack([rotation * x2 + shift[0], -rotation * x1 + shift[1]])
