import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pgvdenoise.core import Alpha, SkewParams, SolverConfig
from pgvdenoise.diffops import skew_operator, symmetric_gradient_operator
from pgvdenoise.seminorm import pgv2, pgv2_continuity_probe, tv
from pgvdenoise.solver import regularizer_value

unit = st.floats(0, 1)
seeds = st.integers(0, 2**32 - 1)
CFG = SolverConfig(tolerance=1e-6, max_iters=20000)


def eps(alpha, u, cfg=CFG):
    return cfg.tolerance * (1 + alpha.alpha0 * tv(u))


def test_tv_constant():
    assert tv(np.full((5, 4), 3.0)) == 0


def test_tv_two_jumps():
    assert tv(np.array([[0.0, 1.0], [0.0, 1.0]])) == 2.0


@given(st.floats(-20, 20), seeds)
def test_tv_homogeneous(lam, seed):
    u = np.random.default_rng(seed).normal(size=(6, 6))
    assert math.isclose(tv(lam * u), abs(lam) * tv(u), rel_tol=1e-12, abs_tol=1e-12)


def test_pgv2_constant_image():
    value, v = pgv2(np.full((6, 6), 42.0), Alpha(1, 1), symmetric_gradient_operator())
    assert value == 0 and np.all(v == 0)


@given(unit, unit, st.floats(0.1, 10), st.floats(0.1, 10), seeds)
def test_pgv2_elementary_bounds(s, t, a0, a1, seed):
    u = np.random.default_rng(seed).uniform(0, 255, (10, 10))
    alpha = Alpha(a0, a1)
    value, _ = pgv2(u, alpha, skew_operator(SkewParams(s, t)), CFG)
    assert 0 <= value <= a0 * tv(u) + eps(alpha, u)


def test_pgv2_returns_consistent_field(rng):
    u = rng.uniform(0, 255, (10, 10))
    alpha = Alpha(2, 1)
    c = skew_operator(SkewParams(0.1, 0.7))
    value, v, diag = pgv2(u, alpha, c, CFG, return_diagnostics=True)
    assert value == regularizer_value(u, v, alpha, c)
    assert diag.iterations > 0


def test_pgv2_affine_ramp_beats_constant_field_competitor():
    x1, x2 = np.meshgrid(np.arange(16.0), np.arange(16.0), indexing="ij")
    u = 3.0 * x1 - 2.0 * x2 + 10.0
    alpha = Alpha(1.0, 1.0)
    c = symmetric_gradient_operator()
    v_const = np.stack([np.full_like(u, 3.0), np.full_like(u, -2.0)])
    competitor = regularizer_value(u, v_const, alpha, c)
    value, _ = pgv2(u, alpha, c, CFG)
    assert competitor < tv(u)
    assert value <= competitor + eps(alpha, u)


@pytest.mark.parametrize("lam", [0.5, 2.0, -3.0])
def test_pgv2_positive_homogeneity(rng, lam):
    u = rng.uniform(0, 255, (12, 12))
    alpha = Alpha(1.0, 2.0)
    c = skew_operator(SkewParams(0.3, 0.6))
    base, _ = pgv2(u, alpha, c, CFG)
    scaled, _ = pgv2(lam * u, alpha, c, CFG)
    assert abs(scaled - abs(lam) * base) <= 2 * eps(alpha, lam * u) * max(1, abs(lam))


def test_probe_constant_sequence(rng):
    u = rng.uniform(0, 255, (10, 10))
    vals = pgv2_continuity_probe(u, Alpha(1, 1), [(0.3, 0.3)] * 3, CFG)
    assert vals[0] == vals[1] == vals[2]


def test_probe_permutation(rng):
    u = rng.uniform(0, 255, (10, 10))
    seq = [(0.1, 0.2), (0.5, 0.5), (0.9, 0.4)]
    fwd = pgv2_continuity_probe(u, Alpha(1, 1), seq, CFG)
    rev = pgv2_continuity_probe(u, Alpha(1, 1), seq[::-1], CFG)
    assert fwd == rev[::-1]


def test_probe_empty():
    with pytest.raises(ValueError):
        pgv2_continuity_probe(np.zeros((3, 3)), Alpha(1, 1), [])


def test_pgv2_reflection_symmetry(rng):
    u = rng.uniform(0, 255, (12, 12))
    alpha = Alpha(1.0, 1.0)
    a, _ = pgv2(u, alpha, skew_operator(SkewParams(0.2, 0.9)), CFG)
    b, _ = pgv2(u, alpha, skew_operator(SkewParams(0.8, 0.1)), CFG)
    assert abs(a - b) <= 2 * eps(alpha, u)
