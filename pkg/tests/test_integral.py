import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cubiclines.integral import (
    GAMMA_ENVELOPE,
    QuadratureError,
    _conditional_volume,
    _nodes_for,
    sigma_check,
    singular_integral_mc,
    singular_integral_quad,
    u_eval,
    u_on_grid,
    v_direct,
    v_eval,
)

g = st.floats(-2, 2, allow_nan=False)
gamma4 = st.tuples(g, g, g, g)


def test_u_at_zero():
    assert abs(u_eval((0, 0, 0, 0)) - 4) < 1e-12


@settings(max_examples=20, deadline=None)
@given(gamma4)
def test_u_conjugation_and_bound(gamma):
    a = u_eval(gamma)
    b = u_eval(tuple(-x for x in gamma))
    assert abs(a - b.conjugate()) < 1e-9
    assert abs(a) <= 4 + 1e-9


def test_u_one_axis_against_1d_rule():
    t = 1.0
    x, w = np.polynomial.legendre.leggauss(400)
    ref = 2 * np.sum(w * np.exp(2j * np.pi * t * x**3))
    assert abs(u_eval((t, 0, 0, 0)) - ref) < 1e-10


def test_u_envelope_and_tolerance():
    with pytest.raises(QuadratureError):
        u_eval((2 * GAMMA_ENVELOPE, 0, 0, 0))
    with pytest.raises(ValueError):
        u_eval((0, 0, 0, 0), tol=0)
    with pytest.raises(ValueError):
        u_eval((0, 0, 0))


def test_v_examples():
    assert abs(v_eval((0, 0, 0, 0), 3.0) - 36.0) < 1e-10
    gam = (0.3, -0.2, 0.1, 0.25)
    assert abs(v_eval(gam, 1.0) - u_eval(gam)) < 1e-12
    assert abs(v_eval(gam, 2.0) - v_direct(gam, 2.0)) < 1e-8


@settings(max_examples=6, deadline=None)
@given(st.tuples(*[st.floats(-0.2, 0.2)] * 4), st.sampled_from([1.0, 2.0, 5.0]))
def test_v_scaling_identity(gamma, P):
    assert abs(v_eval(gamma, P) - v_direct(gamma, P)) < 1e-6


def test_grid_table_matches_adaptive():
    vals = np.linspace(-1.5, 1.5, 7)
    table = u_on_grid(vals, _nodes_for(1.5))
    rng = np.random.default_rng(0)
    for idx in rng.integers(0, 7, size=(6, 4)):
        ref = u_eval([vals[i] for i in idx], tol=1e-12)
        assert abs(table[tuple(idx)] - ref.real) < 1e-9
        assert abs(ref.imag) < 1e-10


def test_mc_huge_slab_is_exact():
    s, sig = 3, 10.0
    est = singular_integral_mc((1, -2, 1), sigma=sig, n=5000, seed=1)
    assert abs(est.value - 2 ** (2 * s) / (2 * sig) ** 4) < 1e-9
    assert est.standard_error < 1e-9


def test_mc_matches_plain_slab_sampling():
    c = np.array([1.0, 1.0, -1.0])
    sig = 0.3
    rng = np.random.default_rng(11)
    n = 400_000
    z = rng.uniform(-1, 1, size=(n, 6))
    x, y = z[:, :3], z[:, 3:]
    vals = np.stack([(c * x**3).sum(1), (c * x * x * y).sum(1), (c * x * y * y).sum(1), (c * y**3).sum(1)], 1)
    hit = np.all(np.abs(vals) <= sig, axis=1)
    plain = hit.mean() * 2**6 / (2 * sig) ** 4
    plain_se = hit.std() / math.sqrt(n) * 2**6 / (2 * sig) ** 4
    est = singular_integral_mc(c.astype(int), sigma=sig, n=200_000, seed=5)
    assert abs(est.value - plain) < 4 * math.hypot(plain_se, est.standard_error)


def test_mc_seeds_agree_and_error_scales():
    c = (1,) * 6
    a = singular_integral_mc(c, sigma=0.2, n=40_000, seed=1)
    b = singular_integral_mc(c, sigma=0.2, n=40_000, seed=2)
    assert abs(a.value - b.value) < 3 * math.hypot(a.standard_error, b.standard_error)
    big = singular_integral_mc(c, sigma=0.2, n=80_000, seed=1)
    ratio = a.standard_error / big.standard_error
    assert abs(ratio - math.sqrt(2)) < 0.2 * math.sqrt(2)


def test_mc_independent_of_workers():
    c = (1, 2, -1, 1)
    ref = singular_integral_mc(c, sigma=0.1, n=150_000, seed=4, workers=1)
    other = singular_integral_mc(c, sigma=0.1, n=150_000, seed=4, workers=3)
    assert ref.value == other.value and ref.standard_error == other.standard_error


@settings(max_examples=30)
@given(st.lists(st.floats(-3, 3), min_size=4, max_size=4), st.floats(0.01, 0.99), st.sampled_from([-2.0, 1.0, 3.0]))
def test_conditional_volume_sign_symmetry(A, u, ci):
    # (x, y) -> (-x, -y) negates every form value
    A = np.array([A])
    a = _conditional_volume(A, ci, np.array([u]), 0.2)
    b = _conditional_volume(-A, ci, np.array([1 - u]), 0.2)
    assert abs(a[0] - b[0]) < 1e-9


def test_sigma_check_reports_both():
    full, half, rel = sigma_check((1,) * 16, sigma=0.05, n=100_000, seed=3)
    assert full.sigma == 0.05 and half.sigma == 0.025
    assert rel == pytest.approx(abs(full.value - half.value) / max(full.value, half.value))


def test_quad_vanishing_domain():
    assert singular_integral_quad((1,) * 16, R=0.0) == 0.0
    small = singular_integral_quad((1,) * 16, R=1e-3, grid=3)
    # the integrand is flat to first order near the origin
    assert abs(small - 4.0**16 * (2e-3) ** 4) < 1e-3 * 4.0**16 * (2e-3) ** 4


def test_quad_agrees_with_mc():
    c = (1,) * 16
    quad = singular_integral_quad(c, R=2.0, grid=41)
    mc = singular_integral_mc(c, sigma=0.05, n=10**6, seed=0)
    assert mc.value > 0 and quad > 0
    assert abs(quad - mc.value) / quad < 0.15
