"""Parameter bookkeeping for the large-sieve (Bombieri-Iwaniec) step.

Given (H, M, T) and a case, compute N, R and the derived thresholds, and
report every side condition with both of its sides.  Asymptotic relations
("N is of order X", "A >> B") are read with implied constant 1, so the
verdicts are indicative: the sides are always reported so a user can
re-judge them with any constant.

All arithmetic is mpmath at 50 significant digits, except R, which is an
exact integer ceiling of a square root.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import mpmath

from .exactmath import ceil_sqrt, fmt
from .tables import q_of

DPS = 50
DEFAULT_CONSTANTS = {"C1": 14, "C2": 14, "C3": 14, "C4": 14, "C5": 2, "B0": 1, "B5": 1, "B6": 1, "B7prime": 1}
# kappa = 3/10 and lambda = 11/70 + 1/4 specialise the general parameter family
FAMILY_METADATA = {"kappa": "3/10", "lambda": "57/140"}


class PlannerError(ValueError):
    pass


def _mpf(x) -> mpmath.mpf:
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    if isinstance(x, str) and "/" in x:
        p, q = x.split("/")
        return mpmath.mpf(p) / mpmath.mpf(q)
    return mpmath.mpf(x)


def _s(x) -> str:
    return mpmath.nstr(x, 30, strip_zeros=False) if isinstance(x, mpmath.mpf) else str(x)


@dataclass
class PlannerInput:
    H: object
    M: object
    T: object
    case: str = "A"
    constants: dict = field(default_factory=dict)

    def consts(self) -> dict:
        c = dict(DEFAULT_CONSTANTS)
        c.update(self.constants)
        return c

    def validate(self) -> None:
        if self.case not in ("A", "B"):
            raise PlannerError(f"case must be A or B, got {self.case!r}")
        with mpmath.workdps(DPS):
            H, M, T = _mpf(self.H), _mpf(self.M), _mpf(self.T)
            if H < 1:
                raise PlannerError("need H >= 1")
            if M <= 0 or T <= 1:
                raise PlannerError("need M > 0 and T > 1")
        for k, v in self.consts().items():
            if _mpf(v) <= 0:
                raise PlannerError(f"constant {k} must be positive")


@dataclass(frozen=True)
class Condition:
    """lhs REL rhs; when ``premise`` is False the condition is vacuous."""

    name: str
    lhs: mpmath.mpf
    rel: str
    rhs: mpmath.mpf
    premise: bool = True

    @property
    def holds(self) -> bool:
        if not self.premise:
            return True
        return {"<=": self.lhs <= self.rhs, "<": self.lhs < self.rhs,
                ">=": self.lhs >= self.rhs, ">": self.lhs > self.rhs}[self.rel]

    def as_dict(self) -> dict:
        return {"lhs": _s(self.lhs), "rel": self.rel, "rhs": _s(self.rhs),
                "premise": self.premise, "holds": bool(self.holds)}


@dataclass
class PlannerReport:
    nu: int
    case: str
    q: Fraction
    N: mpmath.mpf
    R: int
    R_certain: bool
    R1: mpmath.mpf
    Q2: mpmath.mpf
    Q3: mpmath.mpf
    Q4: mpmath.mpf
    Q5: mpmath.mpf
    V0: mpmath.mpf
    V0star: mpmath.mpf
    V1: mpmath.mpf
    V2: mpmath.mpf
    eta: mpmath.mpf
    Qprime: mpmath.mpf
    feasibility: dict[str, Condition]

    @property
    def feasible(self) -> bool:
        return all(c.holds for c in self.feasibility.values())

    def as_dict(self) -> dict:
        out = {"nu": self.nu, "case": self.case, "q": fmt(self.q), "R": self.R, "R_certain": self.R_certain}
        for k in ("N", "R1", "Q2", "Q3", "Q4", "Q5", "V0", "V0star", "V1", "V2", "eta", "Qprime"):
            out[k] = _s(getattr(self, k))
        out["feasibility"] = {k: c.as_dict() for k, c in self.feasibility.items()}
        out["metadata"] = dict(FAMILY_METADATA)
        return out


def _to_fraction(x: mpmath.mpf) -> Fraction:
    m, e = mpmath.mpf(x).man_exp
    return Fraction(int(m)) * (Fraction(2) ** int(e))


def _ceil_sqrt_mp(x: mpmath.mpf) -> tuple[int, bool]:
    """ceil(sqrt(x)) from a 50-digit value; the flag says the answer is stable
    under a relative perturbation of 1e-40 either way."""
    lo = ceil_sqrt(_to_fraction(x * (1 - mpmath.mpf(10) ** -40)))
    hi = ceil_sqrt(_to_fraction(x * (1 + mpmath.mpf(10) ** -40)))
    return hi, lo == hi


def choose_N(H, M, T, case: str, B7prime=1) -> mpmath.mpf:
    """N with 'of order' read as equality with constant 1."""
    with mpmath.workdps(DPS):
        H, M, T, B7 = _mpf(H), _mpf(M), _mpf(T), _mpf(B7prime)
        L = mpmath.log(T)
        if case == "A":
            N = H * (M / H) ** mpmath.mpf("1.64") * T ** mpmath.mpf("-0.49") * L ** (mpmath.mpf(969) / 14000)
            formula = "N = H (M/H)^(41/25) T^(-49/100) (log T)^(969/14000)"
        elif case == "B":
            n1 = M ** (mpmath.mpf(7) / 8) * L ** (mpmath.mpf(969) / 5600) / (T ** (mpmath.mpf(3) / 20) * H ** (mpmath.mpf(29) / 40))
            n2 = B7 * M**2 / (H ** (mpmath.mpf(1) / 3) * T ** (mpmath.mpf(2) / 3))
            N = min(n1, n2)
            formula = "N = min(M^(7/8) (log T)^(969/5600) / (T^(3/20) H^(29/40)), B7' M^2 / (H^(1/3) T^(2/3)))"
        else:
            raise PlannerError(f"unknown case {case!r}")
        if not (N > 0) or not mpmath.isfinite(N):
            raise PlannerError(f"nonpositive N from {formula}")
        return +N


def plan(inp: PlannerInput, nu: int) -> PlannerReport:
    inp.validate()
    if nu < 3:
        raise PlannerError("nu must be >= 3")
    c = inp.consts()
    q = q_of(nu)
    with mpmath.workdps(DPS):
        H, M, T = _mpf(inp.H), _mpf(inp.M), _mpf(inp.T)
        C2, C5, B0, B5, B6 = (_mpf(c[k]) for k in ("C2", "C5", "B0", "B5", "B6"))
        qm = _mpf(q)
        L = mpmath.log(T)
        N = choose_N(H, M, T, inp.case, c["B7prime"])
        R, certain = _ceil_sqrt_mp(C2 * M**3 / (N * T))
        Rm = mpmath.mpf(R)
        R1 = mpmath.sqrt(M**3 / (N * T))
        x = H / Rm
        lg = mpmath.log(2 * x)
        if lg > 0:
            Q2 = Rm * x ** (mpmath.mpf(39) / 119) * lg ** (-mpmath.mpf(3) / 4)
            Q3 = Rm * x ** (mpmath.mpf(1) / 3) / lg
        else:  # log(2H/R) <= 0: these thresholds are undefined
            Q2 = Q3 = mpmath.nan
        Q4 = B5 * Rm * x ** (mpmath.mpf(41) / 119)
        Q5 = Rm * x ** (mpmath.mpf(2) / 3 - 44 / (17 * qm))
        V0 = x ** (mpmath.mpf(18) / 17)
        V0s = x
        V1 = Rm**4 / (H * N)
        V2 = M**2 / (H * N**3)
        eta = (1 / x) ** ((mpmath.mpf(2) / 51) / (qm - 2))
        Qp = (1 / B5) * (1 / x) ** (mpmath.mpf(41) / 119) * eta * Rm

        lp = mpmath.mpf(171) / 140
        conds = [
            Condition("64C2H<=N", 64 * C2 * H, "<=", N),
            Condition("N<=M/10", N, "<=", M / 10),
            Condition("2C2sqrt(H)+1<=R", 2 * C2 * mpmath.sqrt(H) + 1, "<=", Rm),
            Condition("R<=H", Rm, "<=", H),
            Condition("HN^2<=MR^2", H * N**2, "<=", M * Rm**2),
            Condition("(B5^2B6)^(357/113)<=H/R", (B5**2 * B6) ** (mpmath.mpf(357) / 113), "<=", x),
            Condition("H/R<=(HT/(2B5M^2))^(357/487)", x, "<=", (H * T / (2 * B5 * M**2)) ** (mpmath.mpf(357) / 487)),
            Condition("MR^2/(HN)>=V0^2", M * Rm**2 / (H * N), ">=", V0**2),
            Condition("case-I", H * M**9 / (T**4 * L**lp), ">=", mpmath.mpf(1),
                      premise=not (M > T ** (mpmath.mpf(7) / 16) * L ** (mpmath.mpf(19) / 448))),
        ]
        if inp.case == "A":
            conds += [
                Condition("min(V1,V2)>=V0", min(V1, V2), ">=", V0),
                Condition("A:H>=T^4/M^9", H, ">=", T**4 / M**9 * L**lp, premise=bool(M < T ** (mpmath.mpf(7) / 16))),
                Condition("A:H>=M^11/T^6", H, ">=", M**11 / T**6 * L**lp, premise=bool(M > T ** (mpmath.mpf(9) / 16))),
                Condition("A:H<=M/T^(49/164)", H, "<=", M * T ** (-mpmath.mpf(49) / 164)),
            ]
        else:
            conds += [
                Condition("B:M<=C5T^(1/2)", M, "<=", C5 * mpmath.sqrt(T)),
                Condition("B:H<=M^(35/69)/T^(2/23)", H, "<=", M ** (mpmath.mpf(35) / 69) * T ** (-mpmath.mpf(2) / 23)),
                Condition("B:H<=B0M^(3/2)/T^(1/2)", H, "<=", B0 * M ** (mpmath.mpf(3) / 2) / mpmath.sqrt(T)),
            ]
        return PlannerReport(nu, inp.case, q, N, R, certain, R1, Q2, Q3, Q4, Q5, V0, V0s, V1, V2, eta, Qp,
                             {cd.name: cd for cd in conds})


@dataclass(frozen=True)
class NStarReport:
    Nstar: mpmath.mpf
    Rstar: mpmath.mpf
    Hstar: mpmath.mpf
    in_window: bool
    triggers: bool

    def as_dict(self) -> dict:
        return {"Nstar": _s(self.Nstar), "Rstar": _s(self.Rstar), "Hstar": _s(self.Hstar),
                "in_window": self.in_window, "triggers": self.triggers}


def nstar_fallback(H, M, T) -> NStarReport:
    """The enlarged N used when H is below the threshold H* and M is near sqrt(T)."""
    with mpmath.workdps(DPS):
        H, M, T = _mpf(H), _mpf(M), _mpf(T)
        if min(H, M) <= 0 or T <= 1:
            raise PlannerError("need positive H, M and T > 1")
        L = mpmath.log(T)
        Nstar = L ** (mpmath.mpf(969) / 5600) / H ** (mpmath.mpf(29) / 40) * max(
            M ** (mpmath.mpf(7) / 8) / T ** (mpmath.mpf(3) / 20), M ** (mpmath.mpf(103) / 40) / T
        )
        Rstar = mpmath.sqrt(M**3 / (T * Nstar))
        Hstar = L ** (mpmath.mpf(171) / 140) * max(T**4 / M**9, M**11 / T**6)
        # compare exponents via logs so that M = T^(7/16) exactly is inside
        lm, lt = mpmath.log(M), mpmath.log(T)
        tol = mpmath.mpf(10) ** -(DPS - 10) * lt
        window = bool(7 * lt / 16 - tol <= lm <= 9 * lt / 16 + tol)
        return NStarReport(+Nstar, +Rstar, +Hstar, window, bool(window and H < Hstar))
