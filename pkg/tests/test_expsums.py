import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cubiclines.expsums import (
    LocalObstructionWarning,
    PhasePoint,
    complete_sum,
    complete_sum_direct,
    complete_sum_table,
    local_average,
    local_factor,
    local_identity_check,
    singular_series,
    weyl_sum_F,
    weyl_sum_F_batch,
    weyl_sum_full,
)

phase = st.floats(-3, 3, allow_nan=False)
alpha4 = st.tuples(phase, phase, phase, phase)


def test_weyl_sum_examples():
    assert weyl_sum_F((0, 0, 0, 0), 5) == 25
    assert abs(weyl_sum_F((0.5, 0, 0, 0), 2)) < 1e-12
    assert weyl_sum_F((0, 0, 0, 0), 3, box="symmetric") == 49


@given(alpha4)
def test_weyl_sum_conjugation_and_bound(alpha):
    f = weyl_sum_F(alpha, 5)
    g = weyl_sum_F(tuple(-a for a in alpha), 5)
    assert abs(f - g.conjugate()) < 1e-9
    assert abs(f) <= 25 + 1e-9


@given(alpha4, st.tuples(*[st.integers(-5, 5)] * 4))
def test_weyl_sum_periodic(alpha, shift):
    moved = tuple(a + k for a, k in zip(alpha, shift))
    assert abs(weyl_sum_F(alpha, 4) - weyl_sum_F(moved, 4)) < 1e-8


def test_weyl_sum_coefficient_scales_phases():
    a = (0.13, 0.7, 0.21, 0.05)
    assert abs(weyl_sum_F(a, 4, c=-2) - weyl_sum_F(tuple(-2 * v for v in a), 4)) < 1e-10


def test_weyl_batch_matches_scalar():
    rng = np.random.default_rng(3)
    pts = rng.random((7, 4))
    batch = weyl_sum_F_batch(pts, 6, "symmetric", c=3)
    for p, b in zip(pts, batch):
        assert abs(weyl_sum_F(p, 6, "symmetric", 3) - b) < 1e-9


def test_weyl_sum_full_examples():
    a = (0.3, 0.1, 0.77, 0.4)
    assert abs(weyl_sum_full(a, (0, 0, 0), (0, 0), 5) - weyl_sum_F(a, 5)) < 1e-12
    assert weyl_sum_full((0,) * 4, (0,) * 3, (0, 0), 4) == 16
    assert abs(weyl_sum_full((0,) * 4, (0,) * 3, (0.5, 0), 2)) < 1e-12


def test_phase_point_reduces():
    p = PhasePoint((1.25, -0.25, 3.0, 0.5), beta=(2.5, 0, 0))
    assert p.alpha == (0.25, 0.75, 0.0, 0.5) and p.beta == (0.5, 0.0, 0.0)
    with pytest.raises(ValueError):
        PhasePoint((0, 0, 0))


def test_complete_sum_examples():
    assert complete_sum(1, (5, 1, 2, 3)) == 1
    assert abs(complete_sum(2, (1, 0, 0, 1))) < 1e-12
    assert abs(complete_sum(3, (1, 0, 0, 0))) < 1e-12


@settings(max_examples=40)
@given(st.integers(1, 9), st.tuples(*[st.integers(-50, 50)] * 4))
def test_complete_sum_matches_direct(q, a):
    assert abs(complete_sum(q, a) - complete_sum_direct(q, a)) < 1e-9


@settings(max_examples=40)
@given(st.integers(2, 12), st.tuples(*[st.integers(0, 200)] * 4))
def test_complete_sum_laws(q, a):
    s = complete_sum(q, a)
    assert abs(complete_sum(q, [-v for v in a]) - s.conjugate()) < 1e-9
    assert abs(s) <= q * q + 1e-9
    assert abs(complete_sum(q, (0, 0, 0, 0)) - q * q) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([(q1, q2) for q1 in range(2, 13) for q2 in range(q1 + 1, 13) if math.gcd(q1, q2) == 1]),
       st.tuples(*[st.integers(0, 10**4)] * 4))
def test_complete_sum_crt(pair, a):
    # x = q2 u + q1 v turns the phase a f(x)/(q1 q2) into q2^2 a f(u)/q1 + q1^2 a f(v)/q2
    q1, q2 = pair
    lhs = complete_sum(q1 * q2, a)
    rhs = complete_sum(q1, [q2**2 * v for v in a]) * complete_sum(q2, [q1**2 * v for v in a])
    assert abs(lhs - rhs) <= 1e-8 * max(abs(lhs), abs(rhs), 1.0)


def test_crt_with_cubed_twist_is_not_an_identity():
    a = (0, 1, 0, 1)
    lhs = complete_sum(35, a)
    cubed = complete_sum(5, [343 * v for v in a]) * complete_sum(7, [125 * v for v in a])
    squared = complete_sum(5, [49 * v for v in a]) * complete_sum(7, [25 * v for v in a])
    assert abs(lhs - squared) < 1e-9
    assert abs(lhs - cubed) > 1.0


@pytest.mark.parametrize("q", [2, 3, 4, 6])
def test_table_matches_pointwise(q):
    table = complete_sum_table(q)
    other = complete_sum_table(q, method="multiplicity")
    for a in itertools.product(range(q), repeat=4):
        ref = complete_sum(q, a)
        assert abs(table[a] - ref) < 1e-9
        assert abs(other[a] - ref) < 1e-9
    assert abs(table[(2, 2, 2, 2)] - q * q) < 1e-9 if q == 2 else True


def test_table_scaled_permutes():
    t = complete_sum_table(5)
    sc = t.scaled(3)
    assert abs(sc[1, 2, 0, 4] - t[(3, 6, 0, 12)]) < 1e-12


def test_local_average_examples():
    assert local_average(1, (1,)) == 1.0
    assert abs(local_average(2, (1,)) - 3.0) < 1e-12
    contents = [a for a in itertools.product(range(2), repeat=4) if any(a)]
    assert len(contents) == 15
    expected = sum(complete_sum(2, a) ** 2 for a in contents) / 16
    assert abs(local_average(2, (1, 1)) - expected.real) < 1e-12
    assert abs(local_average(2, (1, 1)) - 3.0) < 1e-12


@pytest.mark.parametrize("c", [(1,), (1, -1), (1, 2, 2)])
def test_local_average_multiplicative(c):
    for q1, q2 in [(2, 3), (3, 4), (2, 5)]:
        assert abs(local_average(q1 * q2, c) - local_average(q1, c) * local_average(q2, c)) < 1e-9


def test_local_factor_and_series_examples():
    f = local_factor(2, 1, (1,))
    assert f.S_values[0] == 1.0 and abs(f.partial_factor - 4.0) < 1e-12
    assert singular_series((1, 1), P_max=1).value == 1.0
    ss = singular_series((1,) * 16)
    assert all(f.partial_factor > 0 for f in ss.factors)
    assert [f.p for f in ss.factors] == [2, 3, 5, 7, 11, 13]
    assert [f.h_max for f in ss.factors] == [2, 2, 2, 2, 1, 1]


def test_series_p13_term_matches_direct_oracle():
    # S(13) for sixteen unit coefficients from an explicit q^2 sum per a
    q = 13
    x, y = np.meshgrid(np.arange(q), np.arange(q), indexing="ij")
    mons = np.stack([x**3, x * x * y, x * y * y, y**3]).reshape(4, -1)
    total = 0j
    for a in itertools.product(range(q), repeat=4):
        if math.gcd(q, *a) != 1:
            continue
        ph = (np.array(a) @ mons) % q
        total += (np.exp(2j * np.pi * ph / q).sum() / q**2) ** 16
    ss = singular_series((1,) * 16)
    assert abs(ss.factors[-1].S_values[1] - total.real) < 1e-12
    assert abs(ss.stability - total.real) < 1e-12


def test_nonpositive_factor_warns(monkeypatch):
    from cubiclines import expsums

    real = expsums.local_factor

    def fake(p, h_max, c, s=None, limits=None):
        f = real(p, h_max, c, s)
        if p == 3:
            f.partial_factor = -0.5
        return f

    monkeypatch.setattr(expsums, "local_factor", fake)
    with pytest.warns(LocalObstructionWarning):
        ss = expsums.singular_series((1, 1), P_max=5, h_max=1)
    assert ss.nonpositive == [3]


@pytest.mark.parametrize("p,h,c", [(2, 1, (1,)), (3, 1, (1,)), (2, 2, (1, -1)), (5, 1, (1, 1)), (3, 2, (1, 2))])
def test_local_identity(p, h, c):
    chk = local_identity_check(p, h, c)
    assert chk.passed, (chk.lhs, chk.rhs)


def test_local_identity_anchor_values():
    chk = local_identity_check(2, 1, (1,))
    assert chk.lhs == 4.0 and chk.rhs == 4.0
    chk = local_identity_check(3, 1, (1,))
    assert abs(chk.rhs - 9.0) < 1e-12 and abs(chk.lhs - 9.0) < 1e-9


def test_grid_orthogonality_small():
    k = np.arange(17) / 17
    grid = np.stack(np.meshgrid(k, k, k, k, indexing="ij"), axis=-1).reshape(-1, 4)
    F = weyl_sum_F_batch(grid, 2)
    assert abs(np.mean(np.abs(F) ** 2) - 4.0) < 1e-9


def test_local_average_is_real():
    for q, c in [(7, (1, 2, 3)), (9, (1, 1, 1)), (8, (1, -2))]:
        v = local_average(q, c)
        assert isinstance(v, float) and math.isfinite(v)
