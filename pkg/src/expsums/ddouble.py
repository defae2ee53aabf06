"""Vectorised double-double arithmetic on numpy float64 arrays.

A value is a pair (hi, lo) with |lo| <= ulp(hi)/2; about 106 bits of
precision.  Only the handful of operations the phase computations need are
provided.  Algorithms are the classical error-free transformations
(Knuth two-sum, Dekker split/two-product).
"""

from __future__ import annotations

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1
DD_EPS = 2.0**-104


def two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    p = a * b
    ah, al = split(a)
    bh, bl = split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def from_int(x):
    """Exact double-double of an int64 array (|x| < 2**63)."""
    x = np.asarray(x, dtype=np.int64)
    hi = x.astype(np.float64)
    # hi rounds to nearest, so |x - hi| <= 2**10 and the difference is exact in int64
    lo = (x - hi.astype(np.int64)).astype(np.float64)
    return quick_two_sum(hi, lo)


def from_pyint(values):
    """Double-double from arbitrary Python ints (any size that fits float64 range)."""
    hi = np.array([float(v) for v in values], dtype=np.float64)
    lo = np.array([float(v - int(h)) for v, h in zip(values, hi)], dtype=np.float64)
    return quick_two_sum(hi, lo)


def add(ah, al, bh, bl):
    s, e = two_sum(ah, bh)
    t, f = two_sum(al, bl)
    e = e + t
    s, e = quick_two_sum(s, e)
    e = e + f
    return quick_two_sum(s, e)


def neg(ah, al):
    return -ah, -al


def sub(ah, al, bh, bl):
    return add(ah, al, -bh, -bl)


def mul(ah, al, bh, bl):
    p, e = two_prod(ah, bh)
    e = e + (ah * bl + al * bh)
    return quick_two_sum(p, e)


def mul_d(ah, al, b):
    p, e = two_prod(ah, b)
    e = e + al * b
    return quick_two_sum(p, e)


def div(ah, al, bh, bl):
    q1 = ah / bh
    rh, rl = sub(ah, al, *mul_d(bh, bl, q1))
    q2 = rh / bh
    rh, rl = sub(rh, rl, *mul_d(bh, bl, q2))
    q3 = rh / bh
    q1, q2 = quick_two_sum(q1, q2)
    return add(q1, q2, q3, np.zeros_like(q3))


def atanh_series(uh, ul):
    """atanh(u) for |u| <= 1/2 via the odd power series, in double-double."""
    umax = float(np.max(np.abs(uh))) if np.size(uh) else 0.0
    if umax > 0.5:
        raise ValueError("atanh_series needs |u| <= 1/2")
    u2h, u2l = mul(uh, ul, uh, ul)
    th, tl = uh, ul  # current power u^(2k+1)
    sh, sl = uh, ul
    k = 0
    while umax > 0.0:
        k += 1
        th, tl = mul(th, tl, u2h, u2l)
        qh, ql = div(th, tl, np.full_like(th, 2 * k + 1.0), np.zeros_like(th))
        sh, sl = add(sh, sl, qh, ql)
        if umax ** (2 * k + 1) < 1e-36 * (2 * k + 1):
            break
    return sh, sl


def log_ratio(ah, al, bh, bl):
    """log(a/b) for positive a, b with a/b in [1/3, 3], as 2*atanh((a-b)/(a+b))."""
    nh, nl = sub(ah, al, bh, bl)
    dh, dl = add(ah, al, bh, bl)
    uh, ul = div(nh, nl, dh, dl)
    sh, sl = atanh_series(uh, ul)
    return 2.0 * sh, 2.0 * sl


def centered_frac(hi, lo):
    """Reduce x = hi + lo to a float in [-1/2, 1/2) congruent to x mod 1.

    The reduction is sign-symmetric: x and -x map to exact negatives
    (except at the tie 1/2, which maps to -1/2 for both).
    """
    s = np.where(hi < 0, -1.0, 1.0)
    ah, al = s * hi, s * lo
    fl = np.floor(ah)
    f = (ah - fl) + al
    f = np.where(f < 0, f + 1.0, f)
    f = np.where(f >= 1.0, f - 1.0, f)
    c = np.where(f >= 0.5, f - 1.0, f)
    return np.where(c == -0.5, -0.5, s * c)
