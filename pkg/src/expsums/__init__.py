"""Exact exponent bookkeeping and numerical checks for exponential sums
and the divisor and circle problems."""

__version__ = "0.1.0"
