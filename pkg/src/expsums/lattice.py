"""Exact divisor and circle counts, their sawtooth-sum representations, and R(M, T; a, b).

Counts are exact integers.  Sawtooth values psi(p/q) are reduced with
integer arithmetic before the single conversion to float, so rational
arguments never suffer argument-reduction error.  Main terms use 50-digit
constants via mpmath.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from importlib import resources
from typing import Optional, Sequence, Union

import mpmath
import numpy as np

from .tables import THETA

Real = Union[int, float, Fraction]

DPS = 50
with mpmath.workdps(DPS):
    EULER_GAMMA = mpmath.mpf("0.57721566490153286060651209008240243104215933593992")
    PI = mpmath.mpf("3.1415926535897932384626433832795028841971693993751")

SIEVE_LIMIT = 50_000_000
CHUNK = 1 << 20


class LatticeError(ValueError):
    pass


def _frac(X: Real) -> Fraction:
    if isinstance(X, bool):
        raise TypeError("X must be a number")
    return Fraction(X)  # exact for int, Fraction and binary floats


def _floor(X: Real) -> int:
    return math.floor(_frac(X))


def _chunked(fn, lo: int, hi: int, workers: int = 1) -> int:
    """Sum of fn(a, b) over consecutive blocks [a, b) covering [lo, hi); exact integers."""
    blocks = [(a, min(hi, a + CHUNK)) for a in range(lo, hi, CHUNK)]
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(workers) as ex:
            return sum(ex.map(lambda ab: fn(*ab), blocks))
    return sum(fn(a, b) for a, b in blocks)


# --------------------------------------------------------------------------
# divisor problem

def divisor_counts(n: int) -> np.ndarray:
    """d(k) for 0 <= k <= n by a divisor sieve (d(0) = 0)."""
    if n > SIEVE_LIMIT:
        raise LatticeError(f"n = {n} exceeds the sieve memory budget; use method='hyperbola'")
    d = np.zeros(n + 1, dtype=np.int64)
    for m in range(1, n + 1):
        d[m::m] += 1
    return d


def divisor_sum_table(n: int) -> np.ndarray:
    """D(k) for 0 <= k <= n, from the sieve."""
    return np.cumsum(divisor_counts(n))


def divisor_sum(X: Real, method: str = "hyperbola", workers: int = 1) -> int:
    """D(X) = sum_{n <= X} d(n)."""
    if _frac(X) < 1:
        raise LatticeError("need X >= 1")
    n = _floor(X)
    if method == "sieve":
        if n > SIEVE_LIMIT:
            raise LatticeError(f"X = {n} exceeds the sieve memory budget; use method='hyperbola'")
        return int(divisor_sum_table(n)[n])
    if method == "hyperbola":
        s = math.isqrt(n)

        def part(a, b):
            ms = np.arange(a, b, dtype=np.int64)
            return int((n // ms).sum())

        return 2 * _chunked(part, 1, s + 1, workers) - s * s
    raise LatticeError(f"unknown method {method!r}")


# --------------------------------------------------------------------------
# circle problem

def _isqrt_vec(v: np.ndarray) -> np.ndarray:
    r = np.floor(np.sqrt(v.astype(np.float64))).astype(np.int64)
    r = np.where(r * r > v, r - 1, r)
    r = np.where((r + 1) * (r + 1) <= v, r + 1, r)
    return r


def circle_count(X: Real, method: str = "brute", workers: int = 1) -> int:
    """N(X) = #{(x, y) in Z^2 : x^2 + y^2 <= X}."""
    Xf = _frac(X)
    if Xf < 0:
        raise LatticeError("need X >= 0")
    n = math.floor(Xf)
    if method == "brute":
        r = math.isqrt(n)

        def part(a, b):
            xs = np.arange(a, b, dtype=np.int64)
            return int((2 * _isqrt_vec(n - xs * xs) + 1).sum())

        return _chunked(part, -r, r + 1, workers)
    if method == "gauss":
        if n == 0:
            return 1

        def part(a, b):
            j = np.arange(a, b, dtype=np.int64)
            return int((n // (4 * j + 1) - n // (4 * j + 3)).sum())

        return 1 + 4 * _chunked(part, 0, n // 4 + 1, workers)
    raise LatticeError(f"unknown method {method!r}")


# --------------------------------------------------------------------------
# sawtooth sums

def psi_rational(num: int, den: int) -> Fraction:
    """psi(num/den), exactly."""
    return Fraction(num % den, den) - Fraction(1, 2)


def _psi_float(num, den):
    """Vectorised psi(num/den) for integer arrays; one rounding per value."""
    return (num % den) / den - 0.5


@dataclass(frozen=True)
class LatticeReport:
    X: float
    kind: str  # "divisor" | "circle"
    exact_count: int
    main_term: float
    error_term: float
    psi_side: float
    residual: float

    def as_dict(self) -> dict:
        return asdict(self)


def divisor_psi_side(X: Real) -> float:
    """sum_{m <= sqrt X} psi(X/m)."""
    Xf = _frac(X)
    p, q = Xf.numerator, Xf.denominator
    s = math.isqrt(math.floor(Xf))
    terms = [(p % (q * m)) / (q * m) - 0.5 for m in range(1, s + 1)]
    return math.fsum(terms)


def circle_psi_side(X: Real, variant: str = "displayed") -> float:
    """The alternating double sawtooth sum for the circle problem.

    sum_{j=0,1} (-1)^j ( sum_{m <= sqrt X} psi(X/4m + (-1)^j/4)
                          - sum_{1 <= m <= sqrt(X)/4} psi(X/(4m + (-1)^j)) ).

    ``variant`` selects a sign permutation, see :data:`CIRCLE_VARIANTS`.
    """
    sa, sb = CIRCLE_VARIANTS[variant]
    Xf = _frac(X)
    p, q = Xf.numerator, Xf.denominator
    r = math.isqrt(math.floor(Xf))
    terms = []
    for m in range(1, r + 1):
        # X/4m + 1/4 = (p + q m)/(4 q m)
        terms.append(sa * ((p + q * m) % (4 * q * m)) / (4 * q * m))
        terms.append(-sa * ((p - q * m) % (4 * q * m)) / (4 * q * m))
    for m in range(1, r // 4 + 1):  # 4m <= sqrt X  <=>  16 m^2 <= X
        terms.append(-sb * (p % (q * (4 * m + 1))) / (q * (4 * m + 1)))
        terms.append(sb * (p % (q * (4 * m - 1))) / (q * (4 * m - 1)))
    # the -1/2 parts cancel pairwise within each j-pair
    return math.fsum(terms)


# (sign on the first inner sum, sign on the second inner sum)
CIRCLE_VARIANTS = {
    "displayed": (1, 1),
    "inner-plus": (1, -1),
    "outer-minus": (-1, -1),
    "first-minus": (-1, 1),
}


def _divisor_main(Xf: Fraction) -> mpmath.mpf:
    x = mpmath.mpf(Xf.numerator) / Xf.denominator
    return x * mpmath.log(x) + (2 * EULER_GAMMA - 1) * x


def delta_report(X: Real) -> LatticeReport:
    Xf = _frac(X)
    if Xf < 4:
        raise LatticeError("need X >= 4")
    D = divisor_sum(Xf)
    with mpmath.workdps(DPS):
        main = _divisor_main(Xf)
        err = float(D - main)
    ps = divisor_psi_side(Xf)
    return LatticeReport(float(Xf), "divisor", D, float(main), err, ps, err / 2 + ps)


def circle_report(X: Real, variant: str = "displayed") -> LatticeReport:
    Xf = _frac(X)
    if Xf < 4:
        raise LatticeError("need X >= 4")
    N = circle_count(Xf)
    with mpmath.workdps(DPS):
        main = PI * mpmath.mpf(Xf.numerator) / Xf.denominator
        err = float(N - main)
    ps = circle_psi_side(Xf, variant)
    return LatticeReport(float(Xf), "circle", N, float(main), err, ps, err / 4 - ps)


# --------------------------------------------------------------------------
# vectorised scans over X-grids

@dataclass
class PsiScan:
    X: np.ndarray
    div_error: np.ndarray
    div_psi: np.ndarray
    circ_error: np.ndarray
    circ_psi: dict

    @property
    def div_residual(self) -> np.ndarray:
        return self.div_error / 2 + self.div_psi

    def circ_residual(self, variant: str = "displayed") -> np.ndarray:
        return self.circ_error / 4 - self.circ_psi[variant]

    def sup(self, upto: Optional[float] = None) -> dict:
        mask = slice(None) if upto is None else self.X <= upto
        out = {"divisor": float(np.abs(self.div_residual[mask]).max())}
        for v in self.circ_psi:
            out[f"circle:{v}"] = float(np.abs(self.circ_residual(v)[mask]).max())
        return out


def psi_scan(x_lo: Real = 4, x_hi: Real = 100_000, step: Real = 1,
             variants: Sequence[str] = ("displayed",)) -> PsiScan:
    """Error terms and sawtooth sides for X = x_lo, x_lo + step, ..., <= x_hi.

    All grid points share the denominator of ``step``; counts come from
    cumulative divisor and lattice-point tables up to floor(x_hi).
    """
    lo, hi, st = _frac(x_lo), _frac(x_hi), _frac(step)
    if lo < 4 or st <= 0 or hi < lo:
        raise LatticeError("need 4 <= x_lo <= x_hi and step > 0")
    q = math.lcm(st.denominator, lo.denominator)
    k0 = int(lo * q)
    kst = int(st * q)
    k = np.arange(k0, math.floor(hi * q) + 1, kst, dtype=np.int64)
    X = k / q
    fl = k // q
    nmax = int(fl.max())

    D = divisor_sum_table(nmax)[fl]
    r2 = np.zeros(nmax + 1, dtype=np.int64)
    lim = math.isqrt(nmax)
    xs = np.arange(-lim, lim + 1, dtype=np.int64)
    for x in xs:
        ys = np.arange(-lim, lim + 1, dtype=np.int64)
        sq = x * x + ys * ys
        np.add.at(r2, sq[sq <= nmax], 1)
    N = np.cumsum(r2)[fl]

    div_err = D - (X * np.log(X) + (2 * float(EULER_GAMMA) - 1) * X)
    circ_err = N - float(PI) * X

    sroot = _isqrt_vec(fl)
    div_psi = np.zeros(X.size)
    A = np.zeros(X.size)
    B = np.zeros(X.size)
    for m in range(1, lim + 1):
        on = sroot >= m
        div_psi += np.where(on, _psi_float(k, q * m), 0.0)
        a = ((k + q * m) % (4 * q * m) - (k - q * m) % (4 * q * m)) / (4 * q * m)
        A += np.where(on, a, 0.0)
        if 4 * m <= lim:
            on4 = sroot >= 4 * m
            b = (k % (q * (4 * m + 1))) / (q * (4 * m + 1)) - (k % (q * (4 * m - 1))) / (q * (4 * m - 1))
            B += np.where(on4, b, 0.0)
    circ = {v: CIRCLE_VARIANTS[v][0] * A - CIRCLE_VARIANTS[v][1] * B for v in variants}
    return PsiScan(X, div_err, div_psi, circ_err, circ)


@dataclass(frozen=True)
class VariantVerdict:
    variant: str
    sup_half: float
    sup_full: float
    bounded: bool


def circle_variant_report(x_hi: int = 100_000, growth_tol: float = 0.10) -> list[VariantVerdict]:
    """Which sign permutations of the circle formula keep the residual bounded.

    A variant counts as bounded when doubling the range raises the sup of
    |residual| by at most ``growth_tol`` (relative).
    """
    scan = psi_scan(4, x_hi, 1, tuple(CIRCLE_VARIANTS))
    half = scan.sup(x_hi / 2)
    full = scan.sup()
    out = []
    for v in CIRCLE_VARIANTS:
        a, b = half[f"circle:{v}"], full[f"circle:{v}"]
        out.append(VariantVerdict(v, a, b, b <= (1 + growth_tol) * a))
    return out


def load_calibration() -> dict:
    """Calibrated residual caps shipped with the package."""
    text = resources.files("expsums").joinpath("data/calibration.json").read_text()
    return json.loads(text)


# --------------------------------------------------------------------------
# R(M, T; a, b)

def _check_rsum(M: Real, T: Real, a: int, b: int) -> None:
    if abs(a) + abs(b) > 1:
        raise LatticeError("need |a| + |b| <= 1")
    Mf, Tf = _frac(M), _frac(T)
    if Mf < 3 or Mf * Mf > Tf:
        raise LatticeError("need 3 <= M <= sqrt(T)")


def r_sum_exact(M: Real, T: Real, a: int, b: int) -> Fraction:
    """sum_{M <= m <= 2M} psi(4T/(4m + a) + b/4) as an exact rational."""
    _check_rsum(M, T, a, b)
    Mf, Tf = _frac(M), _frac(T)
    p, q = Tf.numerator, Tf.denominator
    total = Fraction(0)
    for m in range(math.ceil(Mf), math.floor(2 * Mf) + 1):
        d = 4 * m + a
        # 4T/d + b/4 = (16 p + b q d) / (4 q d)
        total += psi_rational(16 * p + b * q * d, 4 * q * d)
    return total


def r_sum(M: Real, T: Real, a: int, b: int, method: str = "exact") -> float:
    """R(M, T; a, b).  ``exact`` reduces each rational argument in integers;
    ``float`` evaluates psi in double precision (for comparison only)."""
    _check_rsum(M, T, a, b)
    Mf, Tf = _frac(M), _frac(T)
    ms = range(math.ceil(Mf), math.floor(2 * Mf) + 1)
    if method == "exact":
        p, q = Tf.numerator, Tf.denominator
        return math.fsum(((16 * p + b * q * (4 * m + a)) % (4 * q * (4 * m + a))) / (4 * q * (4 * m + a)) - 0.5
                         for m in ms)
    if method == "float":
        t = float(Tf)
        vals = [4 * t / (4 * m + a) + b / 4 for m in ms]
        return math.fsum(v - math.floor(v) - 0.5 for v in vals)
    raise LatticeError(f"unknown method {method!r}")


# --------------------------------------------------------------------------
# short-interval divisor count

@dataclass(frozen=True)
class ShortIntervalLevel:
    j: int
    Delta: Fraction
    count: int  # #{3M <= m' <= 9M : ||16T/m'|| <= Delta}
    restricted_divisor_side: int  # sum over |l - 16T| <= 9 Delta M of #{m' | l, 3M <= m' <= 9M}
    divisor_side: int  # sum over the same l of d(l)
    in_context: bool  # Delta >= T^theta / (2M)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["Delta"] = f"{self.Delta.numerator}/{self.Delta.denominator}"
        return d


def _dist_to_int_rational(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """||p/q|| as the exact integer numerator over q: min(p mod q, q - p mod q)."""
    r = p % q
    return np.minimum(r, q - r)


def divisor_short_interval_count(T: Real, M: Real, levels: Sequence[int]) -> list[ShortIntervalLevel]:
    """For each Delta = 2^-j count m' in [3M, 9M] with 16T/m' within Delta of an integer.

    Each such m' divides some integer l = k m' with |l - 16T| <= 9 Delta M,
    so the count never exceeds either divisor side.
    """
    Tf, Mf = _frac(T), _frac(M)
    if Tf <= 0 or Mf <= 0:
        raise LatticeError("need positive T and M")
    p, q = Tf.numerator, Tf.denominator
    mp_ = np.arange(math.ceil(3 * Mf), math.floor(9 * Mf) + 1, dtype=object)
    num = 16 * p  # 16T/m' = 16p/(q m')
    dist_num = np.array([min(num % (q * int(x)), q * int(x) - num % (q * int(x))) for x in mp_], dtype=object)
    dens = np.array([q * int(x) for x in mp_], dtype=object)
    out = []
    with mpmath.workdps(DPS):
        t_theta = mpmath.mpf(p) / q
        t_theta = t_theta ** (mpmath.mpf(THETA.numerator) / THETA.denominator)
    for j in levels:
        if j < 0:
            raise LatticeError("levels must be non-negative integers")
        Delta = Fraction(1, 2**j)
        count = int(sum(1 for dn, de in zip(dist_num, dens) if Fraction(int(dn), int(de)) <= Delta))
        lo = math.ceil(16 * Tf - 9 * Delta * Mf)
        hi = math.floor(16 * Tf + 9 * Delta * Mf)
        restricted = 0
        for x in mp_:
            x = int(x)
            restricted += hi // x - (lo - 1) // x
        lo_pos = max(lo, 1)
        full = divisor_sum(hi) - (divisor_sum(lo_pos - 1) if lo_pos > 1 else 0) if hi >= 1 else 0
        in_ctx = bool(mpmath.mpf(Delta.numerator) / Delta.denominator >= t_theta / (2 * mpmath.mpf(float(Mf))))
        out.append(ShortIntervalLevel(j, Delta, count, restricted, full, in_ctx))
    return out
