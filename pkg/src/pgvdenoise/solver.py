"""Primal-dual solver for the Level-2 denoising problem.

Minimizes over (u, v)::

    F(u, v) = sum (u - u_eta)^2 + alpha0 * sum |grad u - v|_2 + alpha1 * sum |B v|_F

through the saddle-point form

    min_{u,v} max_{|p|<=alpha0, |q|_F<=alpha1}  <grad u - v, p> + <B v, q> + ||u - u_eta||^2

with the plain first-order primal-dual iteration (extrapolation 1,
tau = sigma = step_safety / L). The fidelity term carries no 1/2 factor.

The iteration and the periodic residual/objective evaluation run in fused
numba loops; :func:`apply_K`, :func:`primal_dual_residual` and
:func:`level2_objective` are the numpy references they are tested against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numba
import numpy as np

from . import diffops
from .core import Alpha, OperatorCoefficients, ScalarImage, SolverConfig, as_array
from .errors import DimensionMismatch, NonFiniteIterate

POWER_ITERATIONS = 200
POWER_SEED = 0
NORM_SAFETY = 1.01


@dataclass
class SaddleState:
    """Mutable iterate of the primal-dual method (arrays are updated in place)."""

    u: np.ndarray
    v: np.ndarray
    p: np.ndarray
    q: np.ndarray
    u_bar: np.ndarray
    v_bar: np.ndarray

    def copy(self) -> "SaddleState":
        return SaddleState(*(a.copy() for a in (self.u, self.v, self.p, self.q,
                                                  self.u_bar, self.v_bar)))


@dataclass
class SolveDiagnostics:
    iterations: int
    final_residual: float
    objective_history: list = field(default_factory=list)
    converged: bool = False


# ---------------------------------------------------------------------------
# projections and proximal maps


def project_ball_2(field: np.ndarray, radius: float) -> np.ndarray:
    """Pixelwise projection of a (2, H, W) field onto the Euclidean ball of ``radius``."""
    field = np.asarray(field, dtype=np.float64)
    norm = np.sqrt(np.sum(field * field, axis=0))
    scale = radius / np.maximum(norm, radius)
    return field * scale


def project_ball_frobenius(field: np.ndarray, radius: float) -> np.ndarray:
    """Pixelwise projection of a (2, 2, H, W) field onto the Frobenius ball."""
    field = np.asarray(field, dtype=np.float64)
    norm = np.sqrt(np.sum(field * field, axis=(0, 1)))
    scale = radius / np.maximum(norm, radius)
    return field * scale


def prox_data(u, u_eta, tau: float) -> np.ndarray:
    """Proximal map of ``tau * ||. - u_eta||^2`` (unscaled square)."""
    u = np.asarray(u, dtype=np.float64)
    u_eta = np.asarray(u_eta, dtype=np.float64)
    if u.shape != u_eta.shape:
        raise DimensionMismatch(f"{u.shape} vs {u_eta.shape}")
    return u_eta + (u - u_eta) / (1.0 + 2.0 * tau)


# ---------------------------------------------------------------------------
# the stacked linear map K(u, v) = (grad u - v, B v)


def apply_K(coeffs: OperatorCoefficients, u: np.ndarray, v: np.ndarray):
    return diffops.grad(u) - v, diffops.apply_B(coeffs, v)


def apply_K_adjoint(coeffs: OperatorCoefficients, p: np.ndarray, q: np.ndarray):
    return -diffops.div(p), -p + diffops.apply_B_adjoint(coeffs, q)


def power_norm(forward, adjoint, shapes, iterations=POWER_ITERATIONS, seed=POWER_SEED) -> float:
    """Power iteration on ``A^T A`` for a map on a tuple of arrays; returns sqrt(lambda).

    ``forward`` and ``adjoint`` take and return tuples of arrays; ``shapes``
    gives the domain blocks. The result approaches ``||A||`` from below.
    """
    rng = np.random.default_rng(seed)
    x = tuple(rng.standard_normal(shape) for shape in shapes)
    lam = 0.0
    for _ in range(iterations):
        nrm = math.sqrt(sum(float(np.vdot(a, a)) for a in x))
        x = tuple(a / nrm for a in x)
        y = forward(*x)
        lam = sum(float(np.vdot(b, b)) for b in y)
        x = adjoint(*y)
    return math.sqrt(lam)


@lru_cache(maxsize=256)
def _operator_norm_cached(key: bytes, height: int, width: int) -> float:
    b = np.frombuffer(key, dtype=np.float64)
    coeffs = OperatorCoefficients(b[:8].reshape(2, 2, 2), b[8:].reshape(2, 2, 2))
    est = power_norm(lambda u, v: apply_K(coeffs, u, v),
                     lambda p, q: apply_K_adjoint(coeffs, p, q),
                     [(height, width), (2, height, width)])
    return est * NORM_SAFETY


def estimate_operator_norm(coeffs: OperatorCoefficients, height: int, width: int) -> float:
    """Upper estimate of ``||K||`` by power iteration on ``K^T K`` (fixed seed) times 1.01."""
    return _operator_norm_cached(coeffs.key(), int(height), int(width))


# ---------------------------------------------------------------------------
# fused iteration kernel


def _b_matrix(coeffs: OperatorCoefficients) -> np.ndarray:
    """``M[2l+j, 2i+k] = b^i_ljk`` so that ``vec(Bv) = M vec(J)``."""
    return np.ascontiguousarray(coeffs.tensor.transpose(1, 2, 0, 3).reshape(4, 4))


@numba.njit(cache=True, error_model="numpy", fastmath={"contract"})
def _iterate(u, v, p, q, ub, vb, ueta, M, a0, a1, tau, sigma, n_iter, freeze_u):
    H, W = u.shape
    # scalar copies so the compiler need not assume M aliases q
    m00, m01, m02, m03 = M[0, 0], M[0, 1], M[0, 2], M[0, 3]
    m10, m11, m12, m13 = M[1, 0], M[1, 1], M[1, 2], M[1, 3]
    m20, m21, m22, m23 = M[2, 0], M[2, 1], M[2, 2], M[2, 3]
    m30, m31, m32, m33 = M[3, 0], M[3, 1], M[3, 2], M[3, 3]
    inv = 1.0 / (1.0 + 2.0 * tau)
    for _ in range(n_iter):
        # dual ascent + projection
        for x in range(H):
            for y in range(W):
                g0 = 0.0
                g1 = 0.0
                j00 = 0.0
                j01 = 0.0
                j10 = 0.0
                j11 = 0.0
                if x < H - 1:
                    g0 = ub[x + 1, y] - ub[x, y]
                    j00 = vb[0, x + 1, y] - vb[0, x, y]
                    j01 = vb[1, x + 1, y] - vb[1, x, y]
                if y < W - 1:
                    g1 = ub[x, y + 1] - ub[x, y]
                    j10 = vb[0, x, y + 1] - vb[0, x, y]
                    j11 = vb[1, x, y + 1] - vb[1, x, y]
                p0 = p[0, x, y] + sigma * (g0 - vb[0, x, y])
                p1 = p[1, x, y] + sigma * (g1 - vb[1, x, y])
                n = math.sqrt(p0 * p0 + p1 * p1)
                if n > a0:
                    f = a0 / n
                    p0 *= f
                    p1 *= f
                p[0, x, y] = p0
                p[1, x, y] = p1
                w0 = q[0, 0, x, y] + sigma * (m00 * j00 + m01 * j01 + m02 * j10 + m03 * j11)
                w1 = q[0, 1, x, y] + sigma * (m10 * j00 + m11 * j01 + m12 * j10 + m13 * j11)
                w2 = q[1, 0, x, y] + sigma * (m20 * j00 + m21 * j01 + m22 * j10 + m23 * j11)
                w3 = q[1, 1, x, y] + sigma * (m30 * j00 + m31 * j01 + m32 * j10 + m33 * j11)
                nn = math.sqrt(w0 * w0 + w1 * w1 + w2 * w2 + w3 * w3)
                if nn > a1:
                    f = a1 / nn
                    w0 *= f
                    w1 *= f
                    w2 *= f
                    w3 *= f
                q[0, 0, x, y] = w0
                q[0, 1, x, y] = w1
                q[1, 0, x, y] = w2
                q[1, 1, x, y] = w3
        # primal descent; divp = div p = -grad^T p, (at0, at1) = B^T q
        for x in range(H):
            for y in range(W):
                divp = 0.0
                at0 = 0.0
                at1 = 0.0
                if x < H - 1:
                    q0, q1, q2, q3 = q[0, 0, x, y], q[0, 1, x, y], q[1, 0, x, y], q[1, 1, x, y]
                    divp += p[0, x, y]
                    at0 -= m00 * q0 + m10 * q1 + m20 * q2 + m30 * q3
                    at1 -= m01 * q0 + m11 * q1 + m21 * q2 + m31 * q3
                if x > 0:
                    q0, q1, q2, q3 = (q[0, 0, x - 1, y], q[0, 1, x - 1, y],
                                      q[1, 0, x - 1, y], q[1, 1, x - 1, y])
                    divp -= p[0, x - 1, y]
                    at0 += m00 * q0 + m10 * q1 + m20 * q2 + m30 * q3
                    at1 += m01 * q0 + m11 * q1 + m21 * q2 + m31 * q3
                if y < W - 1:
                    q0, q1, q2, q3 = q[0, 0, x, y], q[0, 1, x, y], q[1, 0, x, y], q[1, 1, x, y]
                    divp += p[1, x, y]
                    at0 -= m02 * q0 + m12 * q1 + m22 * q2 + m32 * q3
                    at1 -= m03 * q0 + m13 * q1 + m23 * q2 + m33 * q3
                if y > 0:
                    q0, q1, q2, q3 = (q[0, 0, x, y - 1], q[0, 1, x, y - 1],
                                      q[1, 0, x, y - 1], q[1, 1, x, y - 1])
                    divp -= p[1, x, y - 1]
                    at0 += m02 * q0 + m12 * q1 + m22 * q2 + m32 * q3
                    at1 += m03 * q0 + m13 * q1 + m23 * q2 + m33 * q3
                if not freeze_u:
                    un = ueta[x, y] + (u[x, y] + tau * divp - ueta[x, y]) * inv
                    ub[x, y] = 2.0 * un - u[x, y]
                    u[x, y] = un
                v0 = v[0, x, y] + tau * (p[0, x, y] - at0)
                v1 = v[1, x, y] + tau * (p[1, x, y] - at1)
                vb[0, x, y] = 2.0 * v0 - v[0, x, y]
                vb[1, x, y] = 2.0 * v1 - v[1, x, y]
                v[0, x, y] = v0
                v[1, x, y] = v1


@numba.njit(cache=True, error_model="numpy")
def _check_stats(u, v, p, q, uo, vo, po, qo, ubo, vbo, ueta, M, a0, a1, tau, sigma, freeze_u):
    """One pass computing the relative residual of ``old -> new`` and F(new).

    Mirrors :func:`primal_dual_residual` and :func:`level2_objective`.
    """
    H, W = u.shape
    primal = 0.0
    dual = 0.0
    xnorm = 0.0
    ynorm = 0.0
    fid = 0.0
    tv_part = 0.0
    b_part = 0.0
    for x in range(H):
        for y in range(W):
            # K applied to (ubar_old - u, vbar_old - v), and to (u, v) for the objective
            g0 = 0.0
            g1 = 0.0
            e00 = 0.0
            e01 = 0.0
            e10 = 0.0
            e11 = 0.0
            h0 = 0.0
            h1 = 0.0
            k00 = 0.0
            k01 = 0.0
            k10 = 0.0
            k11 = 0.0
            eu = 0.0 if freeze_u else ubo[x, y] - u[x, y]
            ev0 = vbo[0, x, y] - v[0, x, y]
            ev1 = vbo[1, x, y] - v[1, x, y]
            if x < H - 1:
                if not freeze_u:
                    g0 = (ubo[x + 1, y] - u[x + 1, y]) - eu
                e00 = (vbo[0, x + 1, y] - v[0, x + 1, y]) - ev0
                e01 = (vbo[1, x + 1, y] - v[1, x + 1, y]) - ev1
                h0 = u[x + 1, y] - u[x, y]
                k00 = v[0, x + 1, y] - v[0, x, y]
                k01 = v[1, x + 1, y] - v[1, x, y]
            if y < W - 1:
                if not freeze_u:
                    g1 = (ubo[x, y + 1] - u[x, y + 1]) - eu
                e10 = (vbo[0, x, y + 1] - v[0, x, y + 1]) - ev0
                e11 = (vbo[1, x, y + 1] - v[1, x, y + 1]) - ev1
                h1 = u[x, y + 1] - u[x, y]
                k10 = v[0, x, y + 1] - v[0, x, y]
                k11 = v[1, x, y + 1] - v[1, x, y]
            r0 = (po[0, x, y] - p[0, x, y]) / sigma + g0 - ev0
            r1 = (po[1, x, y] - p[1, x, y]) / sigma + g1 - ev1
            dual += r0 * r0 + r1 * r1
            d0 = h0 - v[0, x, y]
            d1 = h1 - v[1, x, y]
            tv_part += math.sqrt(d0 * d0 + d1 * d1)
            bsq = 0.0
            for r in range(4):
                rr = (qo[r // 2, r % 2, x, y] - q[r // 2, r % 2, x, y]) / sigma + (
                    M[r, 0] * e00 + M[r, 1] * e01 + M[r, 2] * e10 + M[r, 3] * e11)
                dual += rr * rr
                bv = M[r, 0] * k00 + M[r, 1] * k01 + M[r, 2] * k10 + M[r, 3] * k11
                bsq += bv * bv
                ynorm += q[r // 2, r % 2, x, y] ** 2
            b_part += math.sqrt(bsq)
            dv0 = vo[0, x, y] - v[0, x, y]
            dv1 = vo[1, x, y] - v[1, x, y]
            primal += dv0 * dv0 + dv1 * dv1
            xnorm += v[0, x, y] ** 2 + v[1, x, y] ** 2
            ynorm += p[0, x, y] ** 2 + p[1, x, y] ** 2
            if not freeze_u:
                du = uo[x, y] - u[x, y]
                primal += du * du
                xnorm += u[x, y] ** 2
                rf = u[x, y] - ueta[x, y]
                fid += rf * rf
    residual = (math.sqrt(primal) / tau + math.sqrt(dual)) / (
        1.0 + math.sqrt(xnorm) + math.sqrt(ynorm))
    return residual, fid + a0 * tv_part + a1 * b_part


# ---------------------------------------------------------------------------


def level2_objective(u, u_eta, v, alpha: Alpha, coeffs: OperatorCoefficients) -> float:
    """``sum (u - u_eta)^2 + alpha0 sum |grad u - v| + alpha1 sum |Bv|_F``."""
    u = np.asarray(u, dtype=np.float64)
    r = u - np.asarray(u_eta, dtype=np.float64)
    return float(np.sum(r * r)) + regularizer_value(u, v, alpha, coeffs)


def regularizer_value(u, v, alpha: Alpha, coeffs: OperatorCoefficients) -> float:
    """``alpha0 sum |grad u - v|_2 + alpha1 sum |Bv|_F`` for a given pair (u, v)."""
    d = diffops.grad(u) - v
    bv = diffops.apply_B(coeffs, v)
    return float(
        alpha.alpha0 * np.sum(np.sqrt(np.sum(d * d, axis=0)))
        + alpha.alpha1 * np.sum(np.sqrt(np.sum(bv * bv, axis=(0, 1))))
    )


def initial_state(u_eta: np.ndarray, alpha: Alpha, dual_seed: int | None = None) -> SaddleState:
    """Start at (u, v) = (u_eta, 0); duals zero or, with ``dual_seed``, random feasible."""
    h, w = u_eta.shape
    if dual_seed is None:
        p = np.zeros((2, h, w))
        q = np.zeros((2, 2, h, w))
    else:
        rng = np.random.default_rng(dual_seed)
        p = project_ball_2(rng.uniform(-1, 1, (2, h, w)) * alpha.alpha0, alpha.alpha0)
        q = project_ball_frobenius(rng.uniform(-1, 1, (2, 2, h, w)) * alpha.alpha1, alpha.alpha1)
    u = np.array(u_eta, dtype=np.float64, copy=True)
    v = np.zeros((2, h, w))
    return SaddleState(u, v, p, q, u.copy(), v.copy())


def run_primal_dual(u_eta: np.ndarray, alpha: Alpha, coeffs: OperatorCoefficients,
                    cfg: SolverConfig, state: SaddleState, freeze_u: bool = False,
                    keep_best: bool = False) -> SolveDiagnostics:
    """Iterate on ``state`` in place until the residual test passes.

    With ``freeze_u`` the u-block stays at ``state.u`` and the sampled
    objective is the regularizer alone (seminorm evaluation). With
    ``keep_best`` the state is reset to the checked iterate of lowest
    objective before returning.
    """
    h, w = u_eta.shape
    L = estimate_operator_norm(coeffs, h, w)
    tau = sigma = cfg.step_safety / L
    M = _b_matrix(coeffs)
    a0, a1 = alpha.alpha0, alpha.alpha1
    ueta = np.ascontiguousarray(u_eta, dtype=np.float64)

    history = []
    best = None
    best_val = math.inf
    it = 0
    residual = math.inf
    converged = False
    while it < cfg.max_iters:
        n = min(cfg.check_interval, cfg.max_iters - it)
        if n > 1:
            _iterate(state.u, state.v, state.p, state.q, state.u_bar, state.v_bar,
                     ueta, M, a0, a1, tau, sigma, n - 1, freeze_u)
        old = state.copy()
        _iterate(state.u, state.v, state.p, state.q, state.u_bar, state.v_bar,
                 ueta, M, a0, a1, tau, sigma, 1, freeze_u)
        it += n
        residual, val = _check_stats(state.u, state.v, state.p, state.q, old.u, old.v,
                                     old.p, old.q, old.u_bar, old.v_bar, ueta, M,
                                     a0, a1, tau, sigma, freeze_u)
        if not (math.isfinite(residual) and math.isfinite(val)):
            raise NonFiniteIterate(f"non-finite iterate after {it} iterations")
        history.append(val)
        if keep_best and val < best_val:
            best_val = val
            best = state.copy()
        if residual <= cfg.tolerance:
            converged = True
            break
    if keep_best and best is not None and best_val < history[-1]:
        for name in ("u", "v", "p", "q", "u_bar", "v_bar"):
            getattr(state, name)[...] = getattr(best, name)
    return SolveDiagnostics(it, residual, history, converged)


def primal_dual_residual(coeffs, old: SaddleState, new: SaddleState, tau, sigma,
                         freeze_u=False) -> float:
    """Relative primal-dual residual of the step ``old -> new`` (numpy reference).

    primal: (x_k - x_{k+1}) / tau
    dual:   (y_k - y_{k+1}) / sigma + K (xbar_k - x_{k+1})

    normalised by ``1 + ||x_{k+1}|| + ||y_{k+1}||``. With ``freeze_u`` the
    u-block is excluded from x.
    """
    dv = old.v - new.v
    du = np.zeros_like(new.u) if freeze_u else old.u - new.u
    primal = math.sqrt(np.vdot(du, du) + np.vdot(dv, dv)) / tau
    ku, kv = apply_K(coeffs, du if freeze_u else old.u_bar - new.u, old.v_bar - new.v)
    rp = (old.p - new.p) / sigma + ku
    rq = (old.q - new.q) / sigma + kv
    dual = math.sqrt(np.vdot(rp, rp) + np.vdot(rq, rq))
    xnorm = math.sqrt(np.vdot(new.v, new.v) + (0.0 if freeze_u else np.vdot(new.u, new.u)))
    ynorm = math.sqrt(np.vdot(new.p, new.p) + np.vdot(new.q, new.q))
    return (primal + dual) / (1.0 + xnorm + ynorm)


def solve_level2(u_eta, alpha: Alpha, coeffs: OperatorCoefficients,
                 cfg: SolverConfig | None = None, *, dual_seed: int | None = None,
                 init: SaddleState | None = None, return_state: bool = False):
    """Denoise ``u_eta`` with the PGV^2 regularizer given by ``coeffs``.

    Returns ``(u, v, diagnostics)`` and, with ``return_state``, the final
    :class:`SaddleState` as a fourth element (usable as ``init`` for a warm
    start at a neighbouring parameter).
    """
    cfg = cfg or SolverConfig()
    if not isinstance(alpha, Alpha):
        alpha = Alpha(*alpha)
    ueta = as_array(u_eta)
    if init is None:
        state = initial_state(ueta, alpha, dual_seed)
    else:
        if init.u.shape != ueta.shape:
            raise DimensionMismatch(f"warm start {init.u.shape} vs image {ueta.shape}")
        state = init.copy()
        # re-project duals in case alpha changed
        state.p[...] = project_ball_2(state.p, alpha.alpha0)
        state.q[...] = project_ball_frobenius(state.q, alpha.alpha1)
    diag = run_primal_dual(ueta, alpha, coeffs, cfg, state)
    out = (ScalarImage(state.u), state.v.copy(), diag)
    return out + (state,) if return_state else out
