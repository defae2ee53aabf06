"""Numerical evaluation of the exponential sums S, S* and the sawtooth truncation.

Two phase paths are provided for the divisor/circle sum

    S(H, M, T; a, b) = sum_{H<=h<=2H} (H/h) sum_{M<=m<=2M} e(4hT/(4m+a) + hb/4):

* ``exact``: for integer T the phase is the rational P/(4(4m+a)) with
  P = 4*(4hT mod (4m+a)) + h*b*(4m+a); it is reduced mod 1 in integers, so
  the only rounding is one float division per term.
* ``float``: the phase is formed in double-double arithmetic and reduced.

Sums are accumulated in fixed-size blocks with a pairwise tree, so the
result does not depend on the number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import ddouble as dd

TWO_PI = 2.0 * math.pi
BLOCK = 1 << 15
_INT64_SAFE = 1 << 62

# Empirical constant for |psi(y) - approx| <= C/(1 + K||y||); the sup over
# dense y-grids is exactly 1/2 (attained at integers) for 1 <= K <= 1000.
PSI_TRUNC_C = 0.55
PSI_TRUNC_SUP_OBSERVED = 0.5
PSI_TRUNC_CALIBRATED_K = (1, 1000)


class SumError(ValueError):
    pass


# --------------------------------------------------------------------------
# sawtooth

def psi(y):
    """psi(y) = y - floor(y) - 1/2.  Exact for Fraction/int input."""
    if isinstance(y, (Fraction, int)):
        return Fraction(y) - math.floor(y) - Fraction(1, 2)
    y = np.asarray(y, dtype=np.float64)
    out = y - np.floor(y) - 0.5
    return float(out) if out.ndim == 0 else out


def dist_to_int(y):
    y = np.asarray(y, dtype=np.float64)
    return np.abs(y - np.round(y))


def sine_partial_sum(y, K: float):
    """-sum_{0<h<=K} sin(2 pi h y)/(pi h), via the Chebyshev recurrence."""
    y = np.asarray(y, dtype=np.float64)
    n = int(math.floor(K))
    th = TWO_PI * (y - np.round(y))
    s_prev = np.zeros_like(th)
    s = np.sin(th)
    c2 = 2.0 * np.cos(th)
    acc = s.copy() if n >= 1 else np.zeros_like(th)
    for h in range(2, n + 1):
        s_prev, s = s, c2 * s - s_prev
        acc += s / h
    return -acc / math.pi


@dataclass(frozen=True)
class PsiApprox:
    approx: Union[float, np.ndarray]
    bound: Union[float, np.ndarray]


def psi_truncated(y, K: float) -> PsiApprox:
    if K < 1:
        raise SumError("K must be >= 1")
    a = sine_partial_sum(y, K)
    b = PSI_TRUNC_C / (1.0 + K * dist_to_int(y))
    if np.ndim(a) == 0:
        return PsiApprox(float(a), float(b))
    return PsiApprox(a, b)


# --------------------------------------------------------------------------
# summation

def pairwise_sum(x: np.ndarray):
    """Deterministic pairwise-tree sum (pads odd levels with zero)."""
    x = np.asarray(x)
    if x.size == 0:
        return x.dtype.type(0)
    while x.size > 1:
        if x.size & 1:
            x = np.concatenate([x, np.zeros(1, dtype=x.dtype)])
        x = x[0::2] + x[1::2]
    return x[0]


def _unit(num: np.ndarray, den: np.ndarray, sign: np.ndarray) -> np.ndarray:
    """e(sign * num/den) for integer 0 <= num <= den/2, symmetric under sign flip."""
    ang = TWO_PI * (num.astype(np.float64) / den.astype(np.float64))
    c = np.cos(ang)
    s = np.sin(ang)
    s = np.where((num == 0) | (2 * num == den), 0.0, s)
    return c + 1j * (sign * s)


def _unit_float(phase: np.ndarray) -> np.ndarray:
    s = np.where(phase < 0, -1.0, 1.0)
    a = np.abs(phase)
    ang = TWO_PI * a
    si = np.where((a == 0) | (a == 0.5), 0.0, np.sin(ang))
    return np.cos(ang) + 1j * (s * si)


WeightFn = Callable[[np.ndarray], np.ndarray]


def tabulated(values: Sequence[float]) -> WeightFn:
    """Weight on [1, 2] given by samples on a uniform grid, linearly interpolated."""
    v = np.asarray(values, dtype=np.float64)
    if v.size < 2:
        raise SumError("tabulation needs at least two samples")
    grid = np.linspace(1.0, 2.0, v.size)
    return lambda x: np.interp(x, grid, v)


def _inv(x):
    return 1.0 / x


def _one(x):
    return np.ones_like(x, dtype=np.float64)


@dataclass
class SumJob:
    kind: str  # "S_sec7" | "S_general" | "S_star" | "psi_sum"
    H: float
    M: float
    T: Union[int, float]
    a: int = 0
    b: int = 0
    H2: Optional[float] = None
    M2: Optional[float] = None
    H1: Optional[float] = None
    M1: Optional[float] = None
    phase: str = "inverse_shift"  # S_general only: "inverse_shift" | "log"
    g: WeightFn = field(default=_inv, repr=False)
    G: WeightFn = field(default=_one, repr=False)
    conjugate: bool = False
    K: int = 1  # psi_sum only: Fourier truncation length

    def validate(self) -> None:
        if self.kind not in ("S_sec7", "S_general", "S_star", "psi_sum"):
            raise SumError(f"unknown sum kind {self.kind!r}")
        if min(self.H, self.M) <= 0 or self.T < 0:
            raise SumError("H, M must be positive and T non-negative")
        if self.kind == "S_star":
            h1 = self.H if self.H1 is None else self.H1
            m1 = self.M if self.M1 is None else self.M1
            if not (self.H / 2 <= h1 <= self.H and self.M / 2 <= m1 <= self.M):
                raise SumError("S_star needs H >= H1 >= H/2 and M >= M1 >= M/2")
            return
        if self.kind == "psi_sum" and self.K < 1:
            raise SumError("psi_sum needs K >= 1")
        if abs(self.a) + abs(self.b) > 1 and self.kind != "S_star" and (self.kind != "S_general" or self.phase == "inverse_shift"):
            raise SumError("need |a| + |b| <= 1")
        for lo, hi, name in ((self.H, self.H2, "H2/H"), (self.M, self.M2, "M2/M")):
            if hi is not None and not (1 <= hi / lo <= 2):
                raise SumError(f"{name} must lie in [1, 2]")

    def ranges(self) -> tuple[range, range]:
        if self.kind == "S_star":
            h1 = self.H if self.H1 is None else self.H1
            m1 = self.M if self.M1 is None else self.M1
            return (range(math.ceil(h1), math.floor(self.H) + 1),
                    range(math.ceil(m1), math.floor(self.M) + 1))
        if self.kind == "psi_sum":
            return range(1, int(self.K) + 1), range(math.ceil(self.M), math.floor(2 * self.M) + 1)
        h2 = 2 * self.H if self.H2 is None else self.H2
        m2 = 2 * self.M if self.M2 is None else self.M2
        return (range(math.ceil(self.H), math.floor(h2) + 1),
                range(math.ceil(self.M), math.floor(m2) + 1))


@dataclass(frozen=True)
class SumResult:
    value: complex
    term_count: int
    phase_error_bound: float
    method: str  # "exact_integer_phase" | "float_double_double"
    weight_sum: float
    max_weight: float

    def as_dict(self) -> dict:
        return {
            "value": {"re": self.value.real, "im": self.value.imag},
            "abs": abs(self.value),
            "term_count": self.term_count,
            "phase_error_bound": self.phase_error_bound,
            "method": self.method,
            "weight_sum": self.weight_sum,
        }


def _is_integral(T) -> bool:
    if isinstance(T, (int, np.integer)):
        return True
    return float(T).is_integer()


def _block_terms_exact(job: SumJob, hs: np.ndarray, ms: np.ndarray) -> np.ndarray:
    T = int(job.T)
    sgn = -1 if job.conjugate else 1
    d = 4 * ms + job.a
    if np.any(d <= 0):
        raise SumError("4m + a must be positive")
    big = 8 * int(hs.max()) * T + 1 >= _INT64_SAFE or 16 * int(d.max()) * int(hs.max()) >= _INT64_SAFE
    if big:
        hs_o = hs.astype(object)
        d_o = d.astype(object)
        r = (4 * hs_o * T) % d_o
        P = sgn * (4 * r + hs_o * job.b * d_o)
        den = 4 * d_o
        sign = np.array([1.0 if p >= 0 else -1.0 for p in P])
        rr = np.array([abs(p) % q for p, q in zip(P, den)], dtype=object)
        num = np.array([x if 2 * x <= q else q - x for x, q in zip(rr, den)], dtype=object)
        sign = np.where(np.array([2 * x > q for x, q in zip(rr, den)]), -sign, sign)
        ang_num = np.array([float(Fraction(int(x), int(q))) for x, q in zip(num, den)])
        return _unit_float(sign * ang_num)
    r = (4 * hs * T) % d
    P = sgn * (4 * r + hs * job.b * d)
    den = 4 * d
    sign = np.where(P < 0, -1.0, 1.0)
    rr = np.abs(P) % den
    flip = 2 * rr > den
    num = np.where(flip, den - rr, rr)
    sign = np.where(flip, -sign, sign)
    return _unit(num, den, sign)


def _phase_dd(job: SumJob, hs: np.ndarray, ms: np.ndarray):
    """Phase of each term as a double-double pair."""
    hf = hs.astype(np.float64)
    mf = ms.astype(np.float64)
    zeros = np.zeros_like(hf)
    Th, Tl = dd.from_pyint([int(job.T)]) if _is_integral(job.T) else (np.array([float(job.T)]), np.zeros(1))
    Th, Tl = np.full_like(hf, Th[0]), np.full_like(hf, Tl[0])
    if job.kind == "S_star":
        # T * log((m + h)/(m - h))
        if np.any(mf - hf <= 0):
            raise SumError("S_star needs m - h > 0")
        ah, al = dd.two_sum(mf, hf)
        bh, bl = dd.two_sum(mf, -hf)
        lh, ll = _log_ratio_any(ah, al, bh, bl)
        return dd.mul(Th, Tl, lh, ll)
    if job.kind == "S_general" and job.phase == "log":
        # (h T / M) * log(m / M)
        Mh = np.full_like(hf, float(job.M))
        ch, cl = dd.mul_d(Th, Tl, 1.0)
        ch, cl = dd.mul(ch, cl, hf, zeros)
        ch, cl = dd.div(ch, cl, Mh, zeros)
        lh, ll = _log_ratio_any(mf, zeros, Mh, zeros)
        return dd.mul(ch, cl, lh, ll)
    # inverse_shift, for both S_sec7 and S_general: 4hT/(4m + a) + hb/4
    d = 4.0 * mf + job.a
    if np.any(d <= 0):
        raise SumError("4m + a must be positive")
    nh, nl = dd.mul(Th, Tl, 4.0 * hf, zeros)
    qh, ql = dd.div(nh, nl, d, zeros)
    return dd.add(qh, ql, hf * (job.b / 4.0), zeros)


def _log_ratio_any(ah, al, bh, bl):
    """log(a/b) in double-double; uses mpmath for the rare ratios outside [1/3, 3]."""
    ratio = ah / bh
    ok = (ratio >= 1.0 / 3.0) & (ratio <= 3.0)
    if np.all(ok):
        return dd.log_ratio(ah, al, bh, bl)
    import mpmath

    lh = np.empty_like(ah)
    ll = np.empty_like(ah)
    if np.any(ok):
        lh[ok], ll[ok] = dd.log_ratio(ah[ok], al[ok], bh[ok], bl[ok])
    with mpmath.workdps(40):
        for i in np.flatnonzero(~ok):
            v = mpmath.log((mpmath.mpf(ah[i]) + al[i]) / (mpmath.mpf(bh[i]) + bl[i]))
            lh[i] = float(v)
            ll[i] = float(v - lh[i])
    return lh, ll


def _block_terms_float(job: SumJob, hs: np.ndarray, ms: np.ndarray) -> tuple[np.ndarray, float]:
    ph, pl = _phase_dd(job, hs, ms)
    if job.conjugate:
        ph, pl = -ph, -pl
    frac = dd.centered_frac(ph, pl)
    err = float(np.max(np.abs(ph))) * 8 * dd.DD_EPS + 2.0**-53 if ph.size else 0.0
    return _unit_float(frac), err


def _weights(job: SumJob, hs: np.ndarray, ms: np.ndarray) -> np.ndarray:
    if job.kind == "S_star":
        return np.ones(hs.shape, dtype=np.float64)
    if job.kind == "psi_sum":
        return 1.0 / hs.astype(np.float64)
    return job.g(hs / job.H) * job.G(ms / job.M)


def eval_sum(job: SumJob, method: str = "auto", workers: int = 1) -> SumResult:
    """Evaluate the sum described by ``job``.

    ``method`` is "exact" (integer phase reduction; needs integer T and the
    inverse_shift phase), "float" (double-double phases) or "auto" (exact
    when available).
    """
    job.validate()
    exact_ok = _is_integral(job.T) and (job.kind in ("S_sec7", "psi_sum") or (job.kind == "S_general" and job.phase == "inverse_shift"))
    if method == "auto":
        method = "exact" if exact_ok else "float"
    if method == "exact" and not exact_ok:
        raise SumError("exact phase path needs integer T and the inverse_shift phase")
    if method not in ("exact", "float"):
        raise SumError(f"unknown method {method!r}")

    hr, mr = job.ranges()
    nh, nm = len(hr), len(mr)
    n = nh * nm
    if n == 0:
        return SumResult(0j, 0, 0.0, "exact_integer_phase" if method == "exact" else "float_double_double", 0.0, 0.0)
    h0, m0 = hr.start, mr.start

    def block(i: int):
        idx = np.arange(i * BLOCK, min(n, (i + 1) * BLOCK), dtype=np.int64)
        hs = h0 + idx // nm
        ms = m0 + idx % nm
        w = _weights(job, hs, ms)
        if method == "exact":
            u, err = _block_terms_exact(job, hs, ms), 2.0**-53
        else:
            u, err = _block_terms_float(job, hs, ms)
        return pairwise_sum(w * u), err, float(np.abs(w).sum()), float(np.abs(w).max())

    nblocks = -(-n // BLOCK)
    if workers > 1 and nblocks > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(block, range(nblocks)))
    else:
        parts = [block(i) for i in range(nblocks)]
    value = complex(pairwise_sum(np.array([p[0] for p in parts], dtype=np.complex128)))
    return SumResult(
        value=value,
        term_count=n,
        phase_error_bound=max(p[1] for p in parts),
        method="exact_integer_phase" if method == "exact" else "float_double_double",
        weight_sum=math.fsum(p[2] for p in parts),
        max_weight=max(p[3] for p in parts),
    )


def psi_fourier_side(M: float, T, a: int, b: int, K: int, method: str = "auto") -> float:
    """-sum_{0<h<=K} sum_{M<=m<=2M} sin(2 pi h (4T/(4m+a) + b/4))/(pi h).

    The truncated Fourier approximation of sum_m psi(4T/(4m+a) + b/4).
    """
    res = eval_sum(SumJob("psi_sum", H=1, M=M, T=T, a=a, b=b, K=K), method=method)
    return -res.value.imag / math.pi


# --------------------------------------------------------------------------
# phase conditions

@dataclass(frozen=True)
class PhaseFamily:
    id: str  # "inverse_shift" | "log"
    a: int = 0
    b: int = 0
    M: float = 3.0
    T: float = 9.0

    def derivatives(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if self.id == "inverse_shift":
            y = x + self.a / (4.0 * self.M)
            return -(y**-2), 2.0 * y**-3, -6.0 * y**-4
        if self.id == "log":
            return 1.0 / x, -(x**-2), 2.0 * x**-3
        raise SumError(f"unknown phase family {self.id!r}")


@dataclass(frozen=True)
class PhaseCheck:
    ok: bool
    witnesses: dict

    def as_dict(self) -> dict:
        return {"ok": self.ok, "witnesses": self.witnesses}


def check_phase_conditions(fam: PhaseFamily, C: Sequence[float] = (14, 14, 14, 14), grid: int = 10_000) -> PhaseCheck:
    """Check C_r >= |F^(r)| >= 1/C_r (r = 1, 2, 3) and |F'F''' - 3F''^2| >= 1/C_4 on a grid of [1, 2]."""
    if grid < 2:
        raise SumError("grid must be >= 2")
    x = np.linspace(1.0, 2.0, grid)
    d1, d2, d3 = fam.derivatives(x)
    comb = np.abs(d1 * d3 - 3.0 * d2**2)
    wit = {}
    ok = True
    for r, d in enumerate((d1, d2, d3), start=1):
        a = np.abs(d)
        lo, hi = float(a.min()), float(a.max())
        wit[f"F{r}"] = {"min_abs": lo, "max_abs": hi}
        ok &= (hi <= C[r - 1]) and (lo >= 1.0 / C[r - 1])
    wit["F1F3-3F2^2"] = {"min_abs": float(comb.min())}
    ok &= float(comb.min()) >= 1.0 / C[3]
    return PhaseCheck(bool(ok), wit)


# --------------------------------------------------------------------------
# growth-rate fitting

def fit_exponent(samples: Sequence[tuple[float, float]]) -> float:
    """Least-squares slope of log|value| against log T.  Report-only."""
    if len(samples) < 3:
        raise SumError("need at least 3 samples")
    T = np.array([s[0] for s in samples], dtype=np.float64)
    v = np.array([s[1] for s in samples], dtype=np.float64)
    if np.any(T <= 0) or np.any(v <= 0):
        raise SumError("samples must be positive")
    slope, _ = np.polyfit(np.log(T), np.log(v), 1)
    return float(slope)
