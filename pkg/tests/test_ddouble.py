from fractions import Fraction

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from expsums import ddouble as dd


def _exact(hi, lo):
    return Fraction(float(hi)) + Fraction(float(lo))


def test_two_sum_and_two_prod_are_error_free():
    rng = np.random.default_rng(0)
    a = rng.normal(size=500) * 10.0 ** rng.integers(-8, 8, 500)
    b = rng.normal(size=500) * 10.0 ** rng.integers(-8, 8, 500)
    s, e = dd.two_sum(a, b)
    p, f = dd.two_prod(a, b)
    for i in range(500):
        assert _exact(s[i], e[i]) == Fraction(a[i]) + Fraction(b[i])
        assert _exact(p[i], f[i]) == Fraction(a[i]) * Fraction(b[i])


@settings(max_examples=100, deadline=None)
@given(st.integers(-(2**62), 2**62))
def test_from_int_is_exact(n):
    hi, lo = dd.from_int(np.array([n]))
    assert _exact(hi[0], lo[0]) == n


@settings(max_examples=100, deadline=None)
@given(st.integers(-(10**30), 10**30))
def test_from_pyint_close(n):
    hi, lo = dd.from_pyint([n])
    assert abs(_exact(hi[0], lo[0]) - n) <= abs(n) * Fraction(1, 2**100) + 1


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 10**12), st.integers(1, 10**12))
def test_div_relative_error(p, q):
    z = np.zeros(1)
    h, l = dd.div(np.array([float(p)]), z, np.array([float(q)]), z)
    exact = Fraction(float(p)) / Fraction(float(q))
    assert abs(_exact(h[0], l[0]) - exact) <= exact * Fraction(1, 2**100)


def test_log_ratio_against_mpmath():
    import mpmath

    rng = np.random.default_rng(1)
    a = rng.uniform(1, 1000, 200)
    b = a * rng.uniform(1 / 3, 3, 200)
    z = np.zeros_like(a)
    h, l = dd.log_ratio(a, z, b, z)
    with mpmath.workdps(50):
        for i in range(200):
            ref = mpmath.log(mpmath.mpf(a[i]) / mpmath.mpf(b[i]))
            assert abs((mpmath.mpf(h[i]) + l[i]) - ref) < mpmath.mpf(2) ** -100


def test_centered_frac_symmetry():
    x = np.array([0.25, 1.75, 3.5, 1e9 + 0.125, 0.0])
    z = np.zeros_like(x)
    pos = dd.centered_frac(x, z)
    neg = dd.centered_frac(-x, z)
    assert list(pos) == [0.25, -0.25, -0.5, 0.125, 0.0]
    assert list(neg) == [-0.25, 0.25, -0.5, -0.125, 0.0]
    assert np.all((pos >= -0.5) & (pos < 0.5))


def test_centered_frac_uses_low_word():
    # hi is an integer, the low word carries the fraction
    hi = np.array([2.0**60])
    lo = np.array([0.375])
    assert dd.centered_frac(hi, lo)[0] == 0.375
