import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from urndiv.numerics import (
    RealInterval,
    digamma_family,
    digamma_envelope,
    forward_differences,
    log1p_topsoe,
    log_gamma,
    trigamma_envelope,
    u_sandwich,
    u_value,
)

EULER = 0.5772156649015329


def test_log_gamma_values():
    assert log_gamma(1) == 0
    assert log_gamma(5) == pytest.approx(math.log(24), abs=1e-15)
    assert log_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), abs=1e-15)
    assert np.allclose(log_gamma(np.array([1.0, 5.0])), [0.0, math.log(24)])


@pytest.mark.parametrize("bad", [0, -1.5, np.array([1.0, 0.0])])
def test_log_gamma_rejects_nonpositive(bad):
    with pytest.raises(ValueError):
        log_gamma(bad)


def test_digamma_known_values():
    assert digamma_family(1, 0) == pytest.approx(-EULER, abs=1e-15)
    assert digamma_family(2, 0) - digamma_family(1, 0) == pytest.approx(1.0, abs=1e-14)
    assert digamma_family(1, 1) == pytest.approx(math.pi**2 / 6, abs=1e-14)


@pytest.mark.parametrize("order", [0, 1, 2, 3])
@pytest.mark.parametrize("x", [0.5, 1.0, 3.7, 15.9, 16.0, 42.0, 1e3, 1e6])
def test_polygamma_against_mpmath(order, x):
    mpmath.mp.dps = 30
    want = float(mpmath.psi(order, x))
    assert digamma_family(x, order) == pytest.approx(want, rel=1e-13, abs=1e-15)


def test_digamma_rejects_bad_order():
    with pytest.raises(ValueError):
        digamma_family(1.0, 4)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.05, 1e5), st.integers(0, 3))
def test_polygamma_recurrence(x, order):
    # psi^(m)(x+1) - psi^(m)(x) = (-1)^m m! / x^(m+1)
    step = (-1) ** order * math.factorial(order) / x ** (order + 1)
    lhs = digamma_family(x + 1, order) - digamma_family(x, order)
    assert lhs == pytest.approx(step, rel=1e-10, abs=1e-12)


def test_digamma_envelope_examples():
    env = digamma_envelope(1)
    assert env.lo == pytest.approx(-0.58333333, abs=1e-8)
    assert env.hi == pytest.approx(-0.575, abs=1e-8)
    assert env.width == pytest.approx(1 / 120, abs=1e-15)
    assert env.contains(-EULER)
    assert digamma_envelope(10).width == pytest.approx(1 / 1_200_000, rel=1e-9)
    assert digamma_envelope(2).contains(1 - EULER)


def test_trigamma_envelope_examples():
    env = trigamma_envelope(1)
    assert env.lo == pytest.approx(-2 / 3, abs=1e-8)
    assert env.hi == pytest.approx(-0.63333333, abs=1e-8)
    assert env.contains(1 - math.pi**2 / 6)
    assert trigamma_envelope(100).width == pytest.approx(1 / (30 * 1e10), rel=1e-9)
    assert trigamma_envelope(2).contains(0.5 - (math.pi**2 / 6 - 1))


@settings(max_examples=300, deadline=None)
@given(st.floats(0.5, 1e4))
def test_envelopes_contain_polygamma(y):
    assert digamma_envelope(y).contains(digamma_family(y, 0), 1e-12)
    assert trigamma_envelope(y).contains(1 / y - digamma_family(y, 1), 1e-12)
    assert digamma_family(y, 3) >= -1e-13


def test_u_value_examples():
    assert u_value(7, 1) == 0
    assert u_value(7, 0) == 0
    assert u_value(2, 2) == pytest.approx(math.log(2), abs=1e-15)
    assert u_value(4, 2) == pytest.approx(math.log(4 / 3), abs=1e-15)


def test_u_value_domain():
    with pytest.raises(ValueError):
        u_value(3, 4)
    with pytest.raises(ValueError):
        u_value(3, -0.5)
    with pytest.raises(ValueError):
        u_value(np.array([3.0]), np.array([4.0]))


@settings(max_examples=300, deadline=None)
@given(st.floats(1, 5000), st.floats(0, 1))
def test_u_value_matches_high_precision(a, frac):
    b = a * frac
    mpmath.mp.dps = 40
    a, b = mpmath.mpf(a), mpmath.mpf(b)
    want = b * mpmath.log(a) + mpmath.loggamma(a - b + 1) - mpmath.loggamma(a + 1)
    if b in (0, 1):
        want = 0
    assert abs(u_value(float(a), float(b)) - float(want)) <= 1e-13 * max(1.0, abs(float(want)))


def test_u_value_array_agrees_with_scalar():
    a = np.array([2.0, 4.0, 10.0, 300.0, 300.0])
    b = np.array([2.0, 2.0, 3.5, 0.0, 299.0])
    got = u_value(a, b)
    assert got == pytest.approx([u_value(x, y) for x, y in zip(a, b)], abs=1e-14)


def test_u_sandwich_examples():
    big_a, eps = u_sandwich(4, 2)
    assert big_a == pytest.approx(0.28796538, abs=1e-8)
    assert eps == pytest.approx(3.0382e-4, abs=1e-8)
    assert big_a - eps <= u_value(4, 2) <= big_a
    assert u_sandwich(9, 0) == (0.0, 0.0)
    big_a, eps = u_sandwich(100, 30)
    assert big_a - eps <= u_value(100, 30) <= big_a


def test_u_sandwich_refuses_last_unit_interval():
    with pytest.raises(ValueError):
        u_sandwich(5, 4.5)


@settings(max_examples=300, deadline=None)
@given(st.floats(1, 1e4), st.floats(0, 1))
def test_u_sandwich_real_arguments(a, frac):
    b = (a - 1) * frac
    big_a, eps = u_sandwich(a, b)
    u = u_value(a, b)
    assert big_a - eps - 1e-12 <= u <= big_a + 1e-12


def test_topsoe_examples():
    assert log1p_topsoe(0) == (0, 0)
    lo, hi = log1p_topsoe(1)
    assert (lo, hi) == pytest.approx((2 / 3, 3 / 4))
    assert lo <= math.log(2) <= hi
    lo, hi = log1p_topsoe(0.01)
    assert abs(lo - math.log1p(0.01)) < 1e-6 and abs(hi - math.log1p(0.01)) < 1e-6
    with pytest.raises(ValueError):
        log1p_topsoe(-0.1)


@given(st.floats(0, 1e6))
def test_topsoe_brackets(x):
    lo, hi = log1p_topsoe(x)
    assert lo - 1e-12 <= math.log1p(x) <= hi + 1e-12


def test_forward_differences_examples():
    assert forward_differences([3, 3, 3], 1) == 0
    assert forward_differences([0, 1, 4, 9], 2) == 2
    ell = 5
    assert forward_differences([math.lgamma(ell + 1), math.lgamma(ell)], 1) == pytest.approx(-math.log(ell))
    with pytest.raises(ValueError):
        forward_differences([1.0], 1)


coeffs = st.lists(st.integers(-20, 20), min_size=1, max_size=4)


@given(coeffs, st.integers(0, 6))
def test_forward_differences_annihilate_low_degree(poly, extra):
    # Delta^r kills polynomials of degree < r
    r = len(poly) + extra
    values = [sum(c * m**i for i, c in enumerate(poly)) for m in range(r + 1)]
    assert forward_differences(values, r) == 0


@given(st.lists(st.floats(-1e3, 1e3), min_size=5, max_size=5),
       st.lists(st.floats(-1e3, 1e3), min_size=5, max_size=5),
       st.floats(-10, 10), st.integers(0, 4))
def test_forward_differences_linear(f, g, alpha, r):
    combo = [alpha * x + y for x, y in zip(f, g)]
    want = alpha * forward_differences(f, r) + forward_differences(g, r)
    assert forward_differences(combo, r) == pytest.approx(want, abs=1e-6)


def test_real_interval():
    iv = RealInterval(1.0, 2.0)
    assert iv.contains(1.5) and not iv.contains(2.1) and iv.contains(2.1, 0.2)
    assert iv.mid == 1.5 and iv.width == 1.0
    with pytest.raises(ValueError):
        RealInterval(2.0, 1.0)
    with pytest.raises(ValueError):
        RealInterval(0.0, math.inf)
    assert RealInterval(0.0, math.inf, infinite=True).contains(1e300)
