"""Log-domain encodings of the exponential-sum bounds and their derivation chains.

Each bound is stored as a :class:`BoundSpec`: an exact piecewise-linear
exponent (see :mod:`expsums.pwl`) plus the validity region.  Epsilons and
implied constants are dropped from the exponent.  Powers of log T in the
region are kept as ``log_power`` coefficients of
lambda = log(log T)/log T and ignored by the pure-exponent verdict.

Most bounds are written over (h, m) = (log_T H, log_T M).  The reduced
bounds D67, D68 and KL610 are written over (log_T delta, log_T Delta) with
delta = H/N and Delta = H/R; :func:`case_substitution` maps them back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction as F
from typing import Iterable, Optional, Sequence

from .exactmath import Q, fmt
from .pwl import (
    Lin,
    LinForm,
    PwlExpr,
    add,
    lin,
    maximum,
    one_plus,
    power,
    prune_on_halfline,
    ratio_form,
)
from .tables import (
    RHO_FACTOR_THRESHOLD,
    RHO_MEAN_SQUARE,
    THETA,
    exponent_table,
)

BOUND_IDS = ("X46", "Y49", "Z410", "D67", "D68", "KL69", "KL610", "H79", "H711", "H712", "EP337")
NU_FREE = {"H79", "H711", "H712", "EP337", "KL69"}
RELATIONS = ("<=", "<", ">=", ">")


class BoundError(ValueError):
    pass


class CertificateError(AssertionError):
    """A replay found a point or constant that contradicts the claimed chain."""


# --------------------------------------------------------------------------
# regions

@dataclass(frozen=True)
class Ineq:
    """form(h, m) + log_power * log(log T)/log T  REL  0."""

    form: LinForm
    rel: str
    log_power: F = F(0)

    def holds(self, h, m, lam=None) -> bool:
        v = self.form(h, m)
        if lam is not None and self.log_power:
            v = float(v) + float(self.log_power) * lam
        if self.rel == "<=":
            return v <= 0
        if self.rel == "<":
            return v < 0
        if self.rel == ">=":
            return v >= 0
        if self.rel == ">":
            return v > 0
        raise BoundError(f"bad relation {self.rel!r}")

    def as_dict(self) -> dict:
        return {"form": self.form.as_dict(), "rel": self.rel, "log_power": fmt(self.log_power)}


@dataclass(frozen=True)
class Condition:
    """A named clause; it holds when any one of its alternatives holds."""

    name: str
    alternatives: tuple[Ineq, ...]

    def holds(self, h, m, lam=None) -> bool:
        return any(a.holds(h, m, lam) for a in self.alternatives)

    def has_logs(self) -> bool:
        return any(a.log_power for a in self.alternatives)


def _c(name: str, *alts: tuple) -> Condition:
    return Condition(name, tuple(Ineq(LinForm(*f), rel, F(lp)) for f, rel, lp in alts))


_tq = (7 * THETA - 2) / 2

# Every named condition, over (h, m).  Implied constants (C5, B0, ...) are 1.
CONDITIONS: dict[str, Condition] = {
    "A:H>=T^4/M^9": _c("A:H>=T^4/M^9", ((F(-7, 16), 0, 1), ">=", 0), ((-4, 1, 9), ">=", F(-171, 140))),
    "A:H>=M^11/T^6": _c("A:H>=M^11/T^6", ((F(-9, 16), 0, 1), "<=", 0), ((6, 1, -11), ">=", F(-171, 140))),
    "A:H<=M/T^(49/164)": _c("A:H<=M/T^(49/164)", ((F(49, 164), 1, -1), "<=", 0)),
    "B:M<=T^(1/2)": _c("B:M<=T^(1/2)", ((F(-1, 2), 0, 1), "<=", 0)),
    "B:H<=M^(35/69)/T^(2/23)": _c("B:H<=M^(35/69)/T^(2/23)", ((F(2, 23), 1, F(-35, 69)), "<=", 0)),
    "B:H<=M^(3/2)/T^(1/2)": _c("B:H<=M^(3/2)/T^(1/2)", ((F(1, 2), 1, F(-3, 2)), "<=", 0)),
    "H>T^(53/92)/M^(27/23)": _c("H>T^(53/92)/M^(27/23)", ((F(-53, 92), 1, F(27, 23)), ">", 0)),
    "H<T^4/M^9": _c("H<T^4/M^9", ((-4, 1, 9), "<", F(-171, 140))),
    "H>T^((7theta-2)/2)": _c("H>T^((7theta-2)/2)", ((-_tq, 1, 0), ">", 0)),
    "H<=M/T^theta": _c("H<=M/T^theta", ((THETA, 1, -1), "<=", 0)),
    "case-I": _c("case-I", ((-4, 1, 9), ">=", F(-171, 140)), ((F(-7, 16), 0, 1), ">", F(-19, 448))),
    "M>T^(7/16)": _c("M>T^(7/16)", ((F(-7, 16), 0, 1), ">", F(-19, 448))),
    "sqrtT": _c("sqrtT", ((F(-1, 2), 0, 1), "<=", 0)),
    "H>=1": _c("H>=1", ((0, 1, 0), ">=", 0)),
}
# X46 is usable in Case I, and in Case II once H is above the EP337 cut-off
CONDITIONS["case-I-or-H-large"] = Condition(
    "case-I-or-H-large", CONDITIONS["case-I"].alternatives + CONDITIONS["H>T^((7theta-2)/2)"].alternatives
)


def mean_square_conditions(c: F) -> list[Condition]:
    """Side conditions of the mean-square application for an exponent c (pure exponents)."""
    c = Q(c)
    return [
        _c("c:H<=M/T^c", ((c, 1, -1), "<=", 0)),
        _c("c:M<=T^(1/2)", ((F(-1, 2), 0, 1), "<=", 0)),
        _c("c:H>T^((7c-2)/2)", ((-(7 * c - 2) / 2, 1, 0), ">", 0)),
        _c("c:H>M/T^(11/35)", ((F(11, 35), 1, -1), ">", 0)),
    ]


@dataclass(frozen=True)
class RegionVerdict:
    pure_exponent_ok: bool
    with_logs_ok: Optional[bool]
    failed_conditions: list[str]

    def as_dict(self) -> dict:
        return {
            "pure_exponent_ok": self.pure_exponent_ok,
            "with_logs_ok": self.with_logs_ok,
            "failed_conditions": self.failed_conditions,
        }


def check_conditions(
    conds: Sequence[Condition], h, m, logT_value: Optional[float] = None
) -> RegionVerdict:
    h, m = Q(h), Q(m)
    failed_pure = [c.name for c in conds if not c.holds(h, m)]
    with_logs = None
    failed = list(failed_pure)
    if logT_value is not None:
        if logT_value <= 0:
            raise BoundError("log T must be positive")
        lam = math.log(logT_value) / logT_value
        failed_logs = [c.name for c in conds if not c.holds(h, m, lam)]
        with_logs = not failed_logs
        failed += [n for n in failed_logs if n not in failed]
    return RegionVerdict(not failed_pure, with_logs, failed)


def condition_check(name: str, h, m, logT_value: Optional[float] = None) -> RegionVerdict:
    if name not in CONDITIONS:
        raise BoundError(f"unknown condition {name!r}")
    return check_conditions([CONDITIONS[name]], h, m, logT_value)


# --------------------------------------------------------------------------
# bound specifications

@dataclass(frozen=True)
class BoundSpec:
    id: str
    nu: Optional[int]
    target: str  # "S_over_M" | "S_over_H"
    expr: PwlExpr
    region: tuple[Condition, ...]
    variables: tuple[str, str] = ("h", "m")
    notes: str = ""

    def __call__(self, h, m) -> F:
        return self.expr(Q(h), Q(m))

    def as_dict(self) -> dict:
        return {
            "id": self.id,
            "nu": self.nu,
            "target": self.target,
            "variables": list(self.variables),
            "terms": [f.as_dict() for f in self.expr.expand()],
            "region": [
                {"name": c.name, "alternatives": [a.as_dict() for a in c.alternatives]}
                for c in self.region
            ],
            "notes": self.notes,
        }


def _region(*names: str) -> tuple[Condition, ...]:
    return tuple(CONDITIONS[n] for n in names)


def _x46(nu: int) -> PwlExpr:
    t = exponent_table(nu)
    iq = 1 / t.q
    a1, a2 = t.alpha
    return add(
        power(t.rho, one_plus(ratio_form(F(99, 25), F(247, 200)))),
        one_plus(
            ratio_form(-(F(19, 75) - F(14, 25) * iq), -(F(1, 25) * iq + F(13, 400))),
            ratio_form(a1, a2),
        ),
        Lin(ratio_form(F(22, 25) * iq + F(41, 50), F(33, 100) * iq + F(49, 200))),
    )


def _y49(nu: int) -> PwlExpr:
    t = exponent_table(nu)
    iq = 1 / t.q
    b1, b2, b3 = t.beta
    return add(
        power(t.rho, one_plus(LinForm(F(29, 40), F(327, 80), F(-45, 16)))),
        one_plus(
            LinForm(
                -(F(7, 5) * iq - F(67, 240)),
                -(F(53, 160) - F(9, 10) * iq),
                F(5, 2) * iq - F(43, 96),
            ),
            LinForm(b2, b1, -b3),
        ),
        lin(F(11, 20) * iq + F(3, 40), F(33, 40) * iq + F(69, 80), -(F(11, 8) * iq + F(7, 16))),
    )


def _z410(nu: int) -> PwlExpr:
    t = exponent_table(nu)
    iq = 1 / t.q
    s1, s2 = t.beta_star
    k = F(7, 36) - F(2, 3) * iq  # exponent of M^3/T in the middle term
    return add(
        power(t.rho, one_plus(LinForm(F(3, 2), F(7, 2), F(-9, 2)))),
        one_plus(
            LinForm(-k, -(F(2, 3) * iq - F(1, 36)), 3 * k),
            LinForm(s2, s1, -3 * s2),
        ),
        lin(F(11, 51) * iq + F(1, 3), F(55, 51) * iq + F(2, 3), -(1 + F(11, 17) * iq)),
    )


def _reduced(nu: int) -> PwlExpr:
    """Reduced bound for S/M in (log delta, log Delta); the nu >= 6 and nu <= 5 branches differ."""
    t = exponent_table(nu)
    iq = 1 / t.q
    if nu >= 6:
        third = LinForm(0, F(1, 2) - 2 * iq, F(11, 6) - 8 * iq)
    else:
        third = LinForm(0, 4 * iq - F(5, 6), F(7, 6) - 5 * iq)
    return add(
        power(t.rho, one_plus(LinForm(0, 2, 1))),
        one_plus(LinForm(0, 2 * iq - F(1, 2), F(5, 6) - 4 * iq), third),
        lin(0, F(1, 2), F(22, 17) * iq),
    )


def build_bound(id: str, nu: Optional[int] = None) -> BoundSpec:
    """Exact log-domain encoding of one displayed bound."""
    if id not in BOUND_IDS:
        raise BoundError(f"unknown bound id {id!r}; expected one of {BOUND_IDS}")
    if id in NU_FREE:
        nu = None
    elif nu is None or nu < 3:
        raise BoundError(f"{id} needs nu >= 3")
    elif id == "D67" and nu < 6:
        raise BoundError("D67 is the nu >= 6 branch")
    elif id == "D68" and nu > 5:
        raise BoundError("D68 is the nu <= 5 branch")

    if id == "X46":
        return BoundSpec(id, nu, "S_over_M", _x46(nu), _region("A:H>=T^4/M^9", "A:H>=M^11/T^6", "A:H<=M/T^(49/164)"),
                         notes="case A bound")
    if id == "Y49":
        return BoundSpec(id, nu, "S_over_M", _y49(nu), _region("B:M<=T^(1/2)", "B:H<=M^(35/69)/T^(2/23)", "B:H<=M^(3/2)/T^(1/2)"),
                         notes="case B bound, first alternative")
    if id == "Z410":
        return BoundSpec(id, nu, "S_over_M", _z410(nu), _region("B:M<=T^(1/2)", "B:H<=M^(35/69)/T^(2/23)", "B:H<=M^(3/2)/T^(1/2)"),
                         notes="case B bound, second alternative")
    if id in ("D67", "D68"):
        return BoundSpec(id, nu, "S_over_M", _reduced(nu), (), ("log_delta", "log_Delta"),
                         notes="reduced bound; delta = H/N, Delta = H/R; N^eps dropped")
    if id == "KL69":
        return BoundSpec(id, None, "S_over_M", lin(F(1, 2), F(3, 2), F(-3, 2)), (),
                         notes="fallback: S << H^(3/2) T^(1/2) / M^(1/2)")
    if id == "KL610":
        iq = 1 / exponent_table(nu).q
        region = (_c("R1>=H", ((0, 0, 1), "<=", 0)),)
        return BoundSpec(id, nu, "S_over_M", lin(0, F(1, 2), F(22, 17) * iq), region,
                         ("log_delta", "log_Delta1"),
                         notes="fallback: S << M (H/N)^(1/2) (H/R1)^(22/(17q)) when H <= R1 T^eps")
    if id == "H79":
        return BoundSpec(id, None, "S_over_H", Lin(ratio_form(F(1, 25), F(131, 400))),
                         _region("H<=M/T^theta", "case-I"), notes="Case I, (H/M)^(1/25) T^(131/400)")
    if id == "H711":
        expr = maximum(Lin(ratio_form(F(19, 750), F(161, 500))),
                       Lin(ratio_form(F(-73, 750), F(1681, 6000))))
        return BoundSpec(id, None, "S_over_H", expr, _region("H<=M/T^theta", "case-I-or-H-large"),
                         notes="X46 at nu = 3, simplified for H/M <= T^-theta")
    if id == "H712":
        expr = maximum(Lin(ratio_form(F(2, 105), F(179, 560))),
                       Lin(ratio_form(F(-113, 1050), F(146, 525))))
        return BoundSpec(id, None, "S_over_H", expr, _region("H<=M/T^theta", "case-I-or-H-large"),
                         notes="X46 at nu = 6, simplified for H/M <= T^-theta")
    # EP337: inner sum << (hT/M^2)^(2/7) M^(4/7) + M^2/(hT), and S/H << inner sum
    expr = maximum(
        add(power(F(2, 7), lin(1, 1, -2)), lin(0, 0, F(4, 7))),
        lin(-1, -1, 2),
    )
    return BoundSpec(id, None, "S_over_H", expr, _region("sqrtT"),
                     notes="exponent pair (2/7, 4/7) = BAAB(0,1)")


def eval_exponent(b: BoundSpec, h, m) -> F:
    """Exact log_T size of the bound at (h, m); epsilon and log factors dropped."""
    return b(Q(h), Q(m))


def region_check(b: BoundSpec, h, m, logT_value: Optional[float] = None) -> RegionVerdict:
    return check_conditions(b.region, h, m, logT_value)


def to_s_over_h(b: BoundSpec) -> BoundSpec:
    if b.target == "S_over_H":
        return b
    if b.variables != ("h", "m"):
        raise BoundError("target conversion needs (h, m) variables")
    return replace(b, target="S_over_H", expr=add(b.expr, lin(0, -1, 1)))


def case_substitution(case: str) -> list[tuple[LinForm, LinForm]]:
    """(log delta, log Delta) as affine forms in (h, m) for the choice of N in Case A/B.

    R is read as (M^3/(N T))^(1/2); logs and constants dropped.  Case B has
    two options, one per argument of the minimum defining N.
    """
    def via_n(n: LinForm):
        h_var = LinForm(0, 1, 0)
        r = (LinForm(-1, 0, 3) - n).scale(F(1, 2))
        return (h_var - n, h_var - r)

    if case == "A":
        return [via_n(LinForm(F(-49, 100), F(-16, 25), F(41, 25)))]
    if case == "B":
        return [
            via_n(LinForm(F(-3, 20), F(-29, 40), F(7, 8))),
            via_n(LinForm(F(-2, 3), F(-1, 3), 2)),
        ]
    raise BoundError(f"unknown case {case!r}")


def reduced_in_hm(nu: int, case: str) -> list[PwlExpr]:
    """The reduced bound for this nu, rewritten in (h, m) for each Case A/B choice of N."""
    b = build_bound("D67" if nu >= 6 else "D68", nu)
    return [b.expr.substitute(d, D) for d, D in case_substitution(case)]


# --------------------------------------------------------------------------
# constant extraction

@dataclass(frozen=True)
class ClosureResult:
    nu: int
    target: str
    x0: F
    terms: list[LinForm]
    expected: list[LinForm]

    @property
    def ok(self) -> bool:
        return sorted(self.terms) == sorted(self.expected)


TERMS_NU3 = (F(19, 750), F(161, 500), F(73, 750), F(1681, 6000))
TERMS_NU6 = (F(2, 105), F(179, 560), F(113, 1050), F(146, 525))
TERMS_NU7 = (F(2597, 2550), F(543, 1700), F(54, 425), F(847, 20400), F(128, 1275), F(643, 20400))


def expected_terms(nu: int) -> tuple[str, list[LinForm]]:
    """The terms that the H/M-small simplification is claimed to leave."""
    if nu in (3, 6):
        a, b, c, d = TERMS_NU3 if nu == 3 else TERMS_NU6
        return "S_over_H", [ratio_form(a, b), ratio_form(-c, d)]
    if nu == 7:
        lead_c, lead_t, mid_c, mid_t, al_c, al_t = TERMS_NU7
        lead = ratio_form(lead_c, lead_t)
        return "S_over_M", [lead, lead + ratio_form(-mid_c, -mid_t), lead + ratio_form(al_c, al_t)]
    raise BoundError("displays exist for nu in {3, 6, 7} only")


def closure(nu: int) -> ClosureResult:
    """Instantiate X46 at nu, restrict to H/M <= T^-x0, and list the surviving terms.

    x0 is theta for nu in {3, 6} (where the region gives H <= M T^-theta) and the
    lower end of the c-window for nu = 7.
    """
    target, expected = expected_terms(nu)
    b = build_bound("X46", nu)
    if target == "S_over_H":
        b = to_s_over_h(b)
    x0 = THETA if nu in (3, 6) else RHO_MEAN_SQUARE
    terms = prune_on_halfline(b.expr.expand(), x0)
    return ClosureResult(nu, target, x0, terms, expected)


# --------------------------------------------------------------------------
# theta balance

@dataclass(frozen=True)
class ThetaResult:
    theta: F
    balance: F  # x = log_T(M/H) at the crossing

    def as_dict(self) -> dict:
        return {"theta": fmt(self.theta), "balance": fmt(self.balance),
                "theta_decimal": float(self.theta)}


def _along_x(f: LinForm) -> tuple[F, F]:
    """(intercept, slope) of f as a function of x = m - h."""
    if not f.ratio_only:
        raise BoundError(f"{f} is not a function of h - m")
    return f.const, -f.h


def crossing(lower: BoundSpec, upper: BoundSpec) -> ThetaResult:
    """Exact x where a ratio-only bound meets a max of ratio-only branches.

    Only crossings with a branch that is the active one of ``upper`` at the
    crossing are accepted.
    """
    sols = []
    for f in lower.expr.expand():
        a0, a1 = _along_x(f)
        for g in upper.expr.expand():
            b0, b1 = _along_x(g)
            if a1 == b1:
                continue
            x = (b0 - a0) / (a1 - b1)
            h, m = -x, F(0)
            if g(h, m) == upper(h, m) and f(h, m) == lower(h, m):
                sols.append(ThetaResult(a0 + a1 * x, x))
    if not sols:
        raise BoundError(f"no crossing between {lower.id} and {upper.id}")
    sols = sorted(set(sols), key=lambda r: r.balance)
    if len(sols) > 1:
        raise BoundError(f"several crossings between {lower.id} and {upper.id}: {sols}")
    return sols[0]


def derive_theta(h79: Optional[BoundSpec] = None, h711: Optional[BoundSpec] = None) -> ThetaResult:
    """Balance H79 against H711: returns theta = 517/1648 at x = 71/206."""
    return crossing(h79 or build_bound("H79"), h711 or build_bound("H711"))


def with_constant_shift(b: BoundSpec, delta) -> BoundSpec:
    return replace(b, expr=add(b.expr, lin(Q(delta))))


# --------------------------------------------------------------------------
# replay of the divisor/circle chain

@dataclass
class Replay7Certificate:
    ok: bool
    theta: F
    grid_density: int
    n_points: int
    max_min_exponent: F
    argmax: list[tuple[F, F, str]]  # (h, m, winning bound)
    failures: list[tuple[F, F, F]] = field(default_factory=list)

    @property
    def argmax_on_balance_line(self) -> bool:
        return any(m - h == F(71, 206) for h, m, _ in self.argmax)

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "theta": fmt(self.theta),
            "grid_density": self.grid_density,
            "n_points": self.n_points,
            "max_min_exponent": fmt(self.max_min_exponent),
            "attained_on_h_minus_m_eq_-71/206": self.argmax_on_balance_line,
            "argmax": [{"h": fmt(h), "m": fmt(m), "bound": b} for h, m, b in self.argmax],
            "failures": [{"h": fmt(h), "m": fmt(m), "exponent": fmt(e)} for h, m, e in self.failures],
        }


def _divisor_bounds() -> list[BoundSpec]:
    return [build_bound(i) for i in ("EP337", "H79", "H711", "H712")]


def _applicable(b: BoundSpec, h: F, m: F) -> bool:
    return all(c.holds(h, m) for c in b.region)


def min_applicable(h: F, m: F, bounds: Optional[Sequence[BoundSpec]] = None) -> tuple[F, str]:
    best = None
    for b in bounds or _divisor_bounds():
        if _applicable(b, h, m):
            v = b(h, m)
            if best is None or v < best[0]:
                best = (v, b.id)
    if best is None:
        raise CertificateError(f"no bound applies at h={fmt(h)}, m={fmt(m)}")
    return best


def divisor_breakpoints(bounds: Sequence[BoundSpec], lo: F, hi: F) -> set[F]:
    """All pairwise crossings in x = m - h of ratio-only branches, inside [lo, hi]."""
    forms = [f for b in bounds for f in b.expr.expand() if f.ratio_only]
    forms.append(ratio_form(0, THETA))
    pts = set()
    for i, f in enumerate(forms):
        a0, a1 = _along_x(f)
        for g in forms[i + 1:]:
            b0, b1 = _along_x(g)
            if a1 != b1:
                x = (b0 - a0) / (a1 - b1)
                if lo <= x <= hi:
                    pts.add(x)
    return pts


def divisor_grid(grid_density: int, theta: F = THETA) -> list[tuple[F, F]]:
    """Rational grid over {0 <= h <= m - theta, m <= 1/2}.

    x = m - h runs over a uniform grid plus every branch crossing; m runs
    over a uniform grid plus the region's corner lines (h = 0, h = (7θ-2)/2,
    m = 7/16, h + 9m = 4).
    """
    if grid_density < 1:
        raise BoundError("grid_density must be >= 1")
    half = F(1, 2)
    n = grid_density
    xs = {theta + (half - theta) * k / n for k in range(n + 1)}
    xs |= divisor_breakpoints(_divisor_bounds(), theta, half)
    tq = (7 * theta - 2) / 2
    pts = set()
    ms_uniform = [theta + (half - theta) * k / n for k in range(n + 1)]
    for x in sorted(xs):
        ms = set(m for m in ms_uniform if m >= x)
        ms |= {x, x + tq, F(7, 16), (4 + x) / 10, half}
        for m in ms:
            if x <= m <= half:
                pts.add((m - x, m))
    return sorted(pts)


def _replay_chunk(points, theta):
    bounds = _divisor_bounds()
    out = []
    for h, m in points:
        v, bid = min_applicable(h, m, bounds)
        out.append((v, h, m, bid))
    return out


def replay_section7(grid_density: int = 64, theta: F = THETA, workers: int = 1) -> Replay7Certificate:
    """Certify that on every grid point some applicable bound gives S/H <= T^theta."""
    pts = divisor_grid(grid_density, theta)
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        chunks = [pts[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(workers) as ex:
            parts = list(ex.map(_replay_chunk, chunks, [theta] * workers))
        results = [r for p in parts for r in p]
    else:
        results = _replay_chunk(pts, theta)
    top = max(r[0] for r in results)
    argmax = sorted((h, m, bid) for v, h, m, bid in results if v == top)
    failures = sorted((h, m, v) for v, h, m, _ in results if v > theta)
    return Replay7Certificate(
        ok=not failures,
        theta=theta,
        grid_density=grid_density,
        n_points=len(results),
        max_min_exponent=top,
        argmax=argmax,
        failures=failures,
    )


# --------------------------------------------------------------------------
# replay of the mean-square chain

@dataclass
class Replay8Report:
    ok: bool
    checks: list[tuple[str, bool, str]]
    phi: F

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "phi": fmt(self.phi),
            "checks": [{"name": n, "ok": ok, "detail": d} for n, ok, d in self.checks],
        }


def replay_section8(display: Sequence[F] = TERMS_NU7) -> Replay8Report:
    """Re-derive the nu = 7 simplified bound from X46 and the sign of every exponent after it.

    Exponents carrying epsilon are tracked as pairs (a, b) meaning a + b*eps,
    with c = rho + eps and the 1.01*eps of the simplified bound.
    """
    checks: list[tuple[str, bool, str]] = []

    def check(name, ok, detail=""):
        checks.append((name, bool(ok), detail))

    lead_c, lead_t, mid_c, mid_t, al_c, al_t = (Q(x) for x in display)
    b = build_bound("X46", 7)
    t = exponent_table(7)
    check("nu7-q", t.q == F(102, 23), fmt(t.q))
    check("nu7-rho", t.rho == F(7, 102), fmt(t.rho))

    res = closure(7)
    derived = sorted(res.terms)
    lead = ratio_form(lead_c, lead_t)
    exp_mid = lead + ratio_form(-mid_c, -mid_t)
    exp_al = lead + ratio_form(al_c, al_t)
    names = {"leading": lead, "middle": exp_mid, "alpha": exp_al}
    for name, f in names.items():
        check(f"nu7-{name}-term", f in derived, str(f))
    check("nu7-no-extra-terms", len(derived) == 3, f"{len(derived)} surviving terms")

    # the rho-factor is O(1): 99/25 * (-c) + 247/200 < 0 for c > 247/792
    check("rho-factor-inactive", RHO_MEAN_SQUARE > RHO_FACTOR_THRESHOLD,
          f"{fmt(RHO_MEAN_SQUARE)} > {fmt(RHO_FACTOR_THRESHOLD)}")

    # regrouped form: regroup lead*(1 + alpha) + lead*mid
    second = lead + ratio_form(al_c, al_t)
    check("nu7-regroup-951/850", second.h == F(951, 850), fmt(second.h))
    check("nu7-regroup-7159/20400", second.const == F(7159, 20400), fmt(second.const))
    ratio = lead + ratio_form(-mid_c, -mid_t) - second
    check("nu7-regroup-58/255", -ratio.h == F(58, 255) and ratio.const == F(-149, 2040),
          f"(M/H)^{fmt(-ratio.h)} T^{fmt(ratio.const)}")

    q1 = F(149, 2040) / F(58, 255)
    check("quotient-149/464", q1 == F(149, 464), fmt(q1))
    check("149/464>11/35", q1 > F(11, 35), "(M/H)^(58/255) T^(-149/2040) < 1 when H > M T^(-11/35)")
    q2 = lead_t / lead_c
    check("quotient-1629/5194", q2 == F(1629, 5194), fmt(q2))
    q3 = second.const / second.h
    check("quotient-rho", q3 == RHO_MEAN_SQUARE, fmt(q3))
    check("rho>1629/5194", RHO_MEAN_SQUARE > q2, "")

    # S*/M exponent at the worst point x = c = rho + eps, as a + b*eps
    eps_coeff = F(101, 100)
    margins = []
    for name, coeff, const in (("leading", lead_c, lead_t), ("second", second.h, second.const)):
        a = const - coeff * RHO_MEAN_SQUARE
        bcoef = eps_coeff - coeff
        check(f"{name}-constant-nonpositive", a <= 0, fmt(a))
        check(f"{name}-eps-coefficient-negative", bcoef < 0, fmt(bcoef))
        margins.append(-bcoef)
    phi = min(margins)
    check("phi-coefficients", sorted(margins) == sorted([F(185, 1700), F(43, 5100)]),
          f"{fmt(margins[0])}, {fmt(margins[1])}")
    check("phi", phi == min(F(925, 10) / 850, F(215, 10) / 2550), fmt(phi))

    # every point of the mean-square window: X46 itself has negative exponent once eps > 0
    grid_ok = True
    for k in range(0, 65):
        x = RHO_MEAN_SQUARE + (F(11, 35) - RHO_MEAN_SQUARE) * k / 64
        if x >= F(11, 35):
            continue
        v = b(-x, F(0))
        if v > 0:
            grid_ok = False
    check("X46-nonpositive-on-window", grid_ok, "x in [rho, 11/35), eps = 0")
    return Replay8Report(all(ok for _, ok, _ in checks), checks, phi)


# --------------------------------------------------------------------------
# remark ratios

@dataclass
class RemarkRatios:
    nu: int
    upsilon_samples: list[tuple[tuple[F, F], F]]
    zeta_samples: list[tuple[tuple[F, F], F]]
    skipped: list[tuple[F, F, str]]

    def ranges(self) -> dict:
        u = [24 * r for _, r in self.upsilon_samples]
        z = [612 * r for _, r in self.zeta_samples]
        return {
            "24upsilon": (min(u), max(u)) if u else None,
            "612zeta": (min(z), max(z)) if z else None,
        }

    def violations(self, lo=F(67, 100), hi=F(112, 100)) -> list[str]:
        out = []
        for (h, m), r in self.upsilon_samples:
            if not (lo < 24 * r <= hi):
                out.append(f"24upsilon={fmt(24 * r)} at h={fmt(h)}, m={fmt(m)}")
        for (h, m), r in self.zeta_samples:
            if not (lo < 612 * r <= hi):
                out.append(f"612zeta={fmt(612 * r)} at h={fmt(h)}, m={fmt(m)}")
        return out

    def as_dict(self) -> dict:
        rng = self.ranges()
        return {
            "nu": self.nu,
            "n_upsilon": len(self.upsilon_samples),
            "n_zeta": len(self.zeta_samples),
            "range_24upsilon": [float(x) for x in rng["24upsilon"]] if rng["24upsilon"] else None,
            "range_612zeta": [float(x) for x in rng["612zeta"]] if rng["612zeta"] else None,
            "skipped": [{"h": fmt(h), "m": fmt(m), "why": w} for h, m, w in self.skipped],
            "violations": self.violations(),
        }


def remark_ratios(nu: int, sample_points: Iterable[tuple]) -> RemarkRatios:
    """upsilon = (Y - X)/(h + 9m - 4) and zeta = (Z - X)/(53 - 92h - 108m) at each sample."""
    X, Y, Z = (build_bound(i, nu) for i in ("X46", "Y49", "Z410"))
    ups, zet, skipped = [], [], []
    for h, m in sample_points:
        h, m = Q(h), Q(m)
        x = X(h, m)
        du = h + 9 * m - 4
        dz = 53 - 92 * h - 108 * m
        if du == 0:
            skipped.append((h, m, "h + 9m - 4 = 0"))
        else:
            ups.append(((h, m), (Y(h, m) - x) / du))
        if dz == 0:
            skipped.append((h, m, "53 - 92h - 108m = 0"))
        else:
            zet.append(((h, m), (Z(h, m) - x) / dz))
    return RemarkRatios(nu, ups, zet, skipped)


# --------------------------------------------------------------------------
# exponent pairs

def exponent_pair(word: str, seed: tuple = (0, 1)) -> tuple[F, F]:
    """Apply A/B processes to ``seed``, innermost (rightmost) letter first."""
    if not word or any(ch not in "AB" for ch in word):
        raise BoundError(f"malformed process word {word!r}; use letters A and B")
    k, l = Q(seed[0]), Q(seed[1])
    if not (0 <= k <= F(1, 2) <= l <= 1):
        raise BoundError(f"seed ({fmt(k)}, {fmt(l)}) is not an exponent pair")
    for ch in reversed(word):
        if ch == "A":
            k, l = k / (2 * k + 2), (k + l + 1) / (2 * k + 2)
        else:
            k, l = l - F(1, 2), k + F(1, 2)
    return k, l


# --------------------------------------------------------------------------
# sampling for the ratio checks

REMARK_REGION_NAMES = (
    "A:H>=T^4/M^9", "A:H>=M^11/T^6", "A:H<=M/T^(49/164)",
    "B:M<=T^(1/2)", "B:H<=M^(35/69)/T^(2/23)", "B:H<=M^(3/2)/T^(1/2)",
    "H>T^(53/92)/M^(27/23)", "H>=1",
)


def sample_remark_points(n: int, seed: int = 0, denominator: int = 10_000) -> list[tuple[F, F]]:
    """``n`` rational points (h, m) where X46, Y49 and Z410 all apply.

    Rejection sampling on 0 <= h, m <= 1/2 with a fixed denominator; the
    region is nu-independent so the same points serve every nu.
    """
    import random

    rng = random.Random(seed)
    conds = _region(*REMARK_REGION_NAMES)
    pts: list[tuple[F, F]] = []
    half = denominator // 2
    tries = 0
    while len(pts) < n:
        tries += 1
        if tries > 10_000 * max(n, 1):
            raise BoundError("remark region sampler failed to find points")
        h = F(rng.randint(0, half), denominator)
        m = F(rng.randint(0, half), denominator)
        if check_conditions(conds, h, m).pure_exponent_ok:
            pts.append((h, m))
    return pts
