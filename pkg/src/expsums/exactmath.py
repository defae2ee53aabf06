"""Exact rational arithmetic and integer square-root helpers.

Rationals are :class:`fractions.Fraction` values; they are kept in lowest
terms with a positive denominator at construction, so equality is
structural.  Everything reported to the outside world goes through
:func:`fmt` ("p/q", or "p" when q = 1).
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational as _RationalABC
from typing import Union

Rational = Fraction
RationalLike = Union[Fraction, int, str]

OPS = ("add", "sub", "mul", "div", "pow_int", "cmp", "floor", "ceil")


class ExactMathError(ArithmeticError):
    """Raised for undefined exact operations (division by zero, negative roots)."""


def Q(value: RationalLike, den: int | None = None) -> Fraction:
    """Coerce ``value`` (int, Fraction or "p/q" string) to a canonical Fraction."""
    if den is not None:
        if den == 0:
            raise ExactMathError("zero denominator")
        return Fraction(value, den)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a rational")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if "." in text or "e" in text.lower():
            raise ValueError(f"not an exact rational literal: {value!r}")
        try:
            return Fraction(text)
        except ZeroDivisionError as exc:
            raise ExactMathError(f"zero denominator in {value!r}") from exc
    if isinstance(value, _RationalABC):
        return Fraction(value.numerator, value.denominator)
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


def fmt(r: RationalLike) -> str:
    """Exact string form: "p/q", or "p" for integers."""
    r = Q(r)
    if r.denominator == 1:
        return str(r.numerator)
    return f"{r.numerator}/{r.denominator}"


def rational_arith(op: str, a: RationalLike, b: RationalLike | None = None):
    """Dispatch one exact operation by name.

    ``cmp`` returns -1, 0 or 1; ``floor``/``ceil`` ignore ``b`` and return an
    int; every other op returns a Fraction.
    """
    a = Q(a)
    if op == "floor":
        return math.floor(a)
    if op == "ceil":
        return math.ceil(a)
    if b is None:
        raise ValueError(f"{op} needs two operands")
    if op == "pow_int":
        if not isinstance(b, int) or isinstance(b, bool):
            raise TypeError("pow_int exponent must be a machine integer")
        if a == 0 and b < 0:
            raise ExactMathError("zero to a negative power")
        return a**b
    b = Q(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if b == 0:
            raise ExactMathError("division by zero")
        return a / b
    if op == "cmp":
        return (a > b) - (a < b)
    raise ValueError(f"unknown op {op!r}; expected one of {OPS}")


def isqrt_ceil(n: int) -> int:
    """Smallest integer r >= 0 with r*r >= n."""
    if n < 0:
        raise ExactMathError("square root of a negative integer")
    r = math.isqrt(n)
    return r if r * r == n else r + 1


def ceil_sqrt(r: RationalLike) -> int:
    """Smallest integer n with n**2 >= r, computed without floating point.

    For r = p/q, n**2 >= p/q  <=>  (n*q)**2 >= p*q, so n = ceil(ceil_isqrt(p*q) / q).
    """
    r = Q(r)
    if r < 0:
        raise ExactMathError(f"ceil_sqrt of negative value {fmt(r)}")
    p, q = r.numerator, r.denominator
    s = isqrt_ceil(p * q)
    return -(-s // q)


def floor_sqrt(r: RationalLike) -> int:
    """Largest integer n with n**2 <= r."""
    r = Q(r)
    if r < 0:
        raise ExactMathError(f"floor_sqrt of negative value {fmt(r)}")
    return math.isqrt(r.numerator * r.denominator) // r.denominator


def frac_part(r: RationalLike) -> Fraction:
    """Exact fractional part in [0, 1)."""
    r = Q(r)
    return r - math.floor(r)
