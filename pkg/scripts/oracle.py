"""Independent reference solvers for the Level-2 objective on small images.

Nothing here imports the package: the difference matrices are built from
Kronecker products of 1-D forward-difference matrices, and the operator
coefficients are written out from the 2x2 matrix formula of B_{s,t}.

Two routes:

* ``conic_solve``: the problem as a second-order cone program (cvxpy, Clarabel
  interior point).
* ``subgradient_solve``: plain subgradient descent with diminishing steps and
  best-value tracking.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp


def diff_1d(n):
    """Forward difference with a zero last row (replicate boundary)."""
    d = sp.lil_matrix((n, n))
    for i in range(n - 1):
        d[i, i] = -1.0
        d[i, i + 1] = 1.0
    return d.tocsr()


def difference_matrices(h, w):
    """Row-major vectorized d/dx1 (axis 0) and d/dx2 (axis 1) on an h x w grid."""
    d1 = sp.kron(diff_1d(h), sp.identity(w), format="csr")
    d2 = sp.kron(sp.identity(h), diff_1d(w), format="csr")
    return d1, d2


def skew_blocks(h, w, s, t):
    """Sparse maps v = (v1, v2) -> four entries of B_{s,t} v, entry order 11, 12, 21, 22."""
    d1, d2 = difference_matrices(h, w)
    z = sp.csr_matrix((h * w, h * w))
    rows = [
        [d1, z],                            # d1 v1
        [(1 - s) * d2, (1 - t) * d1],       # (1-t) d1 v2 + (1-s) d2 v1
        [s * d2, t * d1],                   # t d1 v2 + s d2 v1
        [z, d2],                            # d2 v2
    ]
    return [sp.hstack(r, format="csr") for r in rows]


def objective(u_eta, u, v1, v2, a0, a1, s, t):
    h, w = u_eta.shape
    d1, d2 = difference_matrices(h, w)
    uf, ef = u.ravel(), u_eta.ravel()
    vv = np.concatenate([v1.ravel(), v2.ravel()])
    r = d1 @ uf - v1.ravel(), d2 @ uf - v2.ravel()
    bv = [blk @ vv for blk in skew_blocks(h, w, s, t)]
    return (
        float(np.sum((uf - ef) ** 2))
        + a0 * float(np.sum(np.sqrt(r[0] ** 2 + r[1] ** 2)))
        + a1 * float(np.sum(np.sqrt(sum(b ** 2 for b in bv))))
    )


def conic_solve(u_eta, a0, a1, s, t):
    import cvxpy as cp

    h, w = u_eta.shape
    n = h * w
    d1, d2 = difference_matrices(h, w)
    blocks = skew_blocks(h, w, s, t)
    u = cp.Variable(n)
    v = cp.Variable(2 * n)
    g = cp.vstack([d1 @ u - v[:n], d2 @ u - v[n:]])
    b = cp.vstack([blk @ v for blk in blocks])
    obj = (
        cp.sum_squares(u - u_eta.ravel())
        + a0 * cp.sum(cp.norm(g, 2, axis=0))
        + a1 * cp.sum(cp.norm(b, 2, axis=0))
    )
    prob = cp.Problem(cp.Minimize(obj))
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-10, tol_gap_rel=1e-10, tol_feas=1e-10)
    uu = u.value.reshape(h, w)
    vv = v.value
    return objective(u_eta, uu, vv[:n].reshape(h, w), vv[n:].reshape(h, w), a0, a1, s, t)


def subgradient_solve(u_eta, a0, a1, s, t, iters=1_000_000, step0=None):
    """Subgradient descent from (u_eta, 0) with steps step0 / sqrt(k+1)."""
    h, w = u_eta.shape
    n = h * w
    d1, d2 = difference_matrices(h, w)
    blocks = skew_blocks(h, w, s, t)
    # stacked operators: G x = (d1 u - v1, d2 u - v2), Bm x = B v, x = (u, v1, v2)
    z = sp.csr_matrix((n, n))
    eye = sp.identity(n, format="csr")
    G1 = sp.hstack([d1, -eye, z], format="csr")
    G2 = sp.hstack([d2, z, -eye], format="csr")
    Bs = [sp.hstack([sp.csr_matrix((n, n)), blk], format="csr") for blk in blocks]
    G = sp.vstack([G1, G2], format="csr")
    Bm = sp.vstack(Bs, format="csr")
    GT, BT = G.T.tocsr(), Bm.T.tocsr()
    e = u_eta.ravel()
    x = np.concatenate([e, np.zeros(2 * n)])
    if step0 is None:
        step0 = 0.5
    best = np.inf

    def value(x):
        g = (G @ x).reshape(2, n)
        b = (Bm @ x).reshape(4, n)
        return (float(np.sum((x[:n] - e) ** 2)) + a0 * float(np.sum(np.sqrt((g * g).sum(0))))
                + a1 * float(np.sum(np.sqrt((b * b).sum(0)))))

    for k in range(iters):
        g = (G @ x).reshape(2, n)
        b = (Bm @ x).reshape(4, n)
        ng = np.sqrt((g * g).sum(0))
        nb = np.sqrt((b * b).sum(0))
        sg = np.divide(g, ng, out=np.zeros_like(g), where=ng > 0)
        sb = np.divide(b, nb, out=np.zeros_like(b), where=nb > 0)
        sub = a0 * (GT @ sg.ravel()) + a1 * (BT @ sb.ravel())
        sub[:n] += 2.0 * (x[:n] - e)
        if k % 100 == 0 or k == iters - 1:
            val = value(x)
            if val < best:
                best = val
        nrm = np.linalg.norm(sub)
        if nrm == 0:
            break
        x = x - step0 / np.sqrt(k + 1.0) * sub / nrm
    return min(best, value(x))
