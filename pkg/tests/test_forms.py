from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cubiclines.forms import (
    CoefficientVector,
    RangeOverflow,
    SolutionPair,
    check_int64_range,
    form_bound,
    linear_forms,
    shift_correction,
    sigma,
    system_values,
    veronese,
    veronese_array,
)

small = st.integers(-20, 20)
rationals = st.fractions(min_value=-5, max_value=5, max_denominator=50)


def test_veronese_examples():
    assert veronese(3, 2, 3) == (8, 12, 18, 27)
    assert veronese(1, 5, -7) == (5, -7)
    assert veronese(2, -1, 1) == (1, -1, 1)


def test_veronese_rejects_degree():
    with pytest.raises(ValueError):
        veronese(4, 1, 1)


def test_veronese_array_matches_scalar():
    xs = np.array([-3, 0, 2, 7])
    ys = np.array([5, -1, 2, 0])
    arr = veronese_array(3, xs, ys)
    assert [tuple(r) for r in arr.tolist()] == [veronese(3, x, y) for x, y in zip(xs, ys)]


def test_sigma_examples():
    assert sigma(1, 3, 2, (2, 2), (3, 3)) == 0
    assert sigma(1, 2, 3, (1, 1), (4, 1)) == 15
    assert sigma(2, 1, 1, (1, 2, 3, 4), (9, -9, 0, 5)) == -4


def test_sigma_bad_index():
    with pytest.raises(IndexError):
        sigma(1, 2, 4, (1, 1), (1, 1))


def test_system_values_examples():
    assert system_values((1, -1), (3, 3), (5, 5)) == (0, 0, 0, 0)
    assert system_values((1,), (1,), (2,)) == (1, 2, 4, 8)
    assert system_values((2, 1), (1, -2), (0, 1)) == (-6, 4, -2, 1)
    assert system_values((1, -1), (3, 3), (5, 5)).is_zero()


def test_coefficient_vector_validation():
    with pytest.raises(ValueError):
        CoefficientVector((1, 0))
    with pytest.raises(ValueError):
        CoefficientVector(())
    c = CoefficientVector.parse("1,-2, 3")
    assert c.entries == (1, -2, 3) and c.s == 3 and c.max_abs == 3 and str(c) == "1,-2,3"


def test_solution_pair_range_tag():
    SolutionPair((0, -2), (2, 1), 2, "symmetric")
    with pytest.raises(ValueError):
        SolutionPair((0, 1), (1, 1), 2, "positive")
    with pytest.raises(ValueError):
        SolutionPair((3,), (1,), 2)


def test_overflow_guard():
    check_int64_range(form_bound((1, 1), 1000))
    with pytest.raises(RangeOverflow):
        check_int64_range(form_bound((3,) * 8, 10**6))


def test_wide_integers_do_not_wrap():
    big = 10**7
    v = system_values((1,), (big,), (big,))
    assert v.v1 == big**3 and v.v1 > 2**63


def test_linear_forms_examples():
    assert linear_forms((1, 1, 1), (1, 1, 1, 1), (7, 7, 7))[0] == 6
    assert linear_forms((0, 0, 0), (0.3, 0.1, 0.2, 0.9), (1, 2, 3)) == (0, 0, 0)
    assert linear_forms((1, 0, 0), (0, 1, 0, 0), (1, 0, 0)) == (0, 1, 1)


def test_shift_correction_examples():
    assert shift_correction((4, -1, 2), 0, 0, (0.1, 0.2, 0.3, 0.4)) == 0
    assert shift_correction((1, 0, 0), 1, 0, (1, 0, 0, 0)) == 3


@given(st.tuples(small, small, small), small, small, st.tuples(rationals, rationals, rationals, rationals))
def test_shift_correction_is_z_combination_of_linear_forms(h, z1, z2, alpha):
    L1, L2, _ = linear_forms(h, alpha, (0, 0, 0))
    assert shift_correction(h, z1, z2, alpha) == z1 * L1 + z2 * L2


def _pairs(max_s=4):
    return st.integers(1, max_s).flatmap(
        lambda s: st.tuples(st.just(s), st.lists(small, min_size=2 * s, max_size=2 * s),
                            st.lists(small, min_size=2 * s, max_size=2 * s)))


@given(_pairs(), st.integers(1, 3), small, small)
def test_sigma_antisymmetric(data, d, z1, z2):
    s, x, y = data
    xs, ys = x[s:] + x[:s], y[s:] + y[:s]
    for l in range(1, d + 2):
        assert sigma(s, d, l, xs, ys) == -sigma(s, d, l, x, y)


def _balanced(s, x, y):
    """Adjust the last entries so both degree-1 differences vanish."""
    x, y = list(x), list(y)
    x[2 * s - 1] += sum(x[:s]) - sum(x[s:])
    y[2 * s - 1] += sum(y[:s]) - sum(y[s:])
    return x, y


@given(_pairs(), small, small)
def test_binomial_shift_identity(data, z1, z2):
    s, x, y = data
    xs, ys = _balanced(s, x, y)
    x0 = [v + z1 for v in xs]
    y0 = [v + z2 for v in ys]
    assert all(sigma(s, 1, i, xs, ys) == 0 for i in (1, 2))
    assert all(sigma(s, 1, i, x0, y0) == 0 for i in (1, 2))
    for i in (1, 2, 3):
        assert sigma(s, 2, i, x0, y0) == sigma(s, 2, i, xs, ys)


@settings(max_examples=200)
@given(_pairs(3), small, small, st.tuples(rationals, rationals, rationals, rationals))
def test_cubic_shift_identity_exact(data, z1, z2, alpha):
    s, x, y = data
    # enforce the degree-1 conditions on the shifted point by construction
    xs, ys = _balanced(s, x, y)
    assert all(sigma(s, 1, i, xs, ys) == 0 for i in (1, 2))
    h = tuple(sigma(s, 2, i, xs, ys) for i in (1, 2, 3))
    x0 = [v + z1 for v in xs]
    y0 = [v + z2 for v in ys]
    shifted = sum(Fraction(a) * sigma(s, 3, i + 1, xs, ys) for i, a in enumerate(alpha))
    original = sum(Fraction(a) * sigma(s, 3, i + 1, x0, y0) for i, a in enumerate(alpha))
    assert shifted == original - shift_correction(h, z1, z2, alpha)


@given(st.lists(st.integers(-3, 3).filter(bool), min_size=1, max_size=4), st.data())
def test_system_values_linear_and_odd(c, data):
    s = len(c)
    x = data.draw(st.lists(small, min_size=s, max_size=s))
    y = data.draw(st.lists(small, min_size=s, max_size=s))
    c2 = data.draw(st.lists(st.integers(-3, 3).filter(bool), min_size=s, max_size=s))
    v = system_values(c, x, y)
    neg = system_values(c, [-a for a in x], [-b for b in y])
    assert tuple(neg) == tuple(-t for t in v)
    both = [a + b for a, b in zip(c, c2)]
    if all(both):
        total = system_values(both, x, y)
        assert tuple(total) == tuple(a + b for a, b in zip(v, system_values(c2, x, y)))
    bound = form_bound(c, max(map(abs, x + y)))
    assert all(abs(t) <= bound for t in v)
