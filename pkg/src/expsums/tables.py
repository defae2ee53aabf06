"""nu-indexed exponent constants and the table of inline rational identities.

All constants shared by other modules (theta, the mean-square exponent,
the c-window) live here so that there is exactly one source for each.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction as F

from .exactmath import fmt

NU_MIN = 3
NU_MAX = 64

THETA = F(517, 1648)
# exponent of the zeta mean-square result, and the window (rho, 1273/4053] for c
RHO_MEAN_SQUARE = F(7159, 22824)
C_UPPER = F(1273, 4053)
# (247/200)/(99/25): below this the (H/M)^(99/25) T^(247/200) factor is not O(1)
RHO_FACTOR_THRESHOLD = F(247, 792)
Q_LIMIT = F(9, 2)


@dataclass(frozen=True)
class ExponentTable:
    nu: int
    q: F
    rho: F
    alpha: tuple[F, F]
    beta: tuple[F, F, F]
    beta_star: tuple[F, F]

    @property
    def small_branch(self) -> bool:
        """True for nu in {3, 4, 5}, where the first case of every table applies."""
        return self.nu <= 5

    def as_dict(self) -> dict:
        return {
            "nu": self.nu,
            "q": fmt(self.q),
            "rho": fmt(self.rho),
            "alpha": [fmt(x) for x in self.alpha],
            "beta": [fmt(x) for x in self.beta],
            "beta_star": [fmt(x) for x in self.beta_star],
        }


def q_of(nu: int) -> F:
    return F(6 * (3 * nu - 4), 4 * nu - 5)


def exponent_table(nu: int) -> ExponentTable:
    if not isinstance(nu, int) or isinstance(nu, bool):
        raise TypeError("nu must be an integer")
    if nu < NU_MIN:
        raise ValueError(f"nu must be >= {NU_MIN}, got {nu}")
    if nu > NU_MAX:
        raise ValueError(f"nu capped at {NU_MAX}, got {nu}")
    q = q_of(nu)
    iq = 1 / q
    if nu <= 5:
        rho = iq - F(1, 6)
        alpha = (F(79, 25) * iq - F(43, 75), F(137, 200) * iq - F(133, 1200))
        beta = (
            F(297, 80) * iq - F(111, 160),
            F(89, 240) - F(61, 40) * iq,
            F(49, 96) - F(29, 16) * iq,
        )
        beta_star = (F(7, 6) * iq - F(5, 36), F(11, 6) * iq - F(13, 36))
    else:
        rho = 4 * iq - F(5, 6)
        alpha = (F(31, 15) - F(218, 25) * iq, F(57, 80) - F(151, 50) * iq)
        beta = (
            F(65, 32) - F(171, 20) * iq,
            F(41, 48) - F(37, 10) * iq,
            F(229, 96) - F(41, 4) * iq,
        )
        beta_star = (F(79, 36) - F(28, 3) * iq, F(23, 36) - F(8, 3) * iq)
    return ExponentTable(nu, q, rho, alpha, beta, beta_star)


@dataclass(frozen=True)
class IdentityRecord:
    name: str
    kind: str  # "equality" | "strict-inequality" | "non-strict-inequality"
    lhs: F
    rhs: F
    holds: bool

    def row(self) -> list[str]:
        return [self.name, self.kind, fmt(self.lhs), fmt(self.rhs), str(self.holds).lower()]


def _rec(name: str, kind: str, lhs, rhs) -> IdentityRecord:
    lhs, rhs = F(lhs), F(rhs)
    if kind == "equality":
        ok = lhs == rhs
    elif kind == "strict-inequality":
        ok = lhs < rhs
    elif kind == "non-strict-inequality":
        ok = lhs <= rhs
    else:
        raise ValueError(kind)
    return IdentityRecord(name, kind, lhs, rhs, ok)


def _eq(name, lhs, rhs):
    return _rec(name, "equality", lhs, rhs)


def _lt(name, lhs, rhs):
    return _rec(name, "strict-inequality", lhs, rhs)


def _le(name, lhs, rhs):
    return _rec(name, "non-strict-inequality", lhs, rhs)


def identity_suite(theta: F = THETA) -> list[IdentityRecord]:
    """Every inline rational identity/inequality used in the divisor and mean-square arguments.

    Inequalities are stored as lhs < rhs (or <=), so a "greater than" claim
    appears with its sides swapped.  ``theta`` is a fault-injection hook.
    """
    t = theta
    q3, q6, q7 = q_of(3), q_of(6), q_of(7)
    recs = [
        _eq("theta-def", F(131, 400) - F(1, 25) * F(71, 206), t),
        _le("theta-decimal-lo", F(31371, 100000), t),
        _lt("theta-decimal-hi", t, F(31372, 100000)),
        _lt("theta-below-131/416", t, F(131, 416)),
        _eq("b0-margin", (13 * t - 4) / 4, F(129, 6592)),
        _lt("circle-margin-53/2", F(53, 2), 404 * t - 100),
        _le("404theta-decimal", F(26740, 1000), 404 * t - 100),
        _eq("case-I-exponent", F(71, 206) + 7 * t / 2 - 1, F(1459, 3296)),
        _eq("case-I-exponent-split", F(1459, 3296), F(1, 16) * (7 + F(17, 206))),
        _lt("case-I-beats-7/16", F(7, 16) + F(1, 224), F(1459, 3296)),
        _lt("windows-overlap", F(5121, 15656), F(30817, 93112)),
        _eq("window-nu6-lower", (F(179, 560) - t) / F(2, 105), F(513, 1648)),
        _eq("window-nu6-upper", (t - F(146, 525)) / F(113, 1050), F(30817, 93112)),
        _eq("window-nu3-lower", (F(161, 500) - t) / F(19, 750), F(5121, 15656)),
        _eq("window-nu3-upper", (t - F(1681, 6000)) / F(73, 750), F(71, 206)),
        _eq("balance-case-I-nu3", (F(131, 400) - F(1681, 6000)) / (F(1, 25) + F(73, 750)), F(71, 206)),
        _eq("case-II-T-exponent", F(7189, 71070), F(2, 23) * (1 + F(1009, 6180))),
        _lt("case-II-T-margin", F(2, 23) * F(8, 7), F(7189, 71070)),
        _eq("case-II-log-exponent", F(969, 16100), F(2, 23) * F(969, 1400)),
        _lt("case-II-log-margin", F(969, 16100), F(2, 23)),
        _eq("rho-factor-threshold", F(247, 200) / F(99, 25), RHO_FACTOR_THRESHOLD),
        _lt("theta-above-threshold", RHO_FACTOR_THRESHOLD, t),
        _lt("threshold-above-alpha-ratio-3", F(49, 164), RHO_FACTOR_THRESHOLD),
        _lt("49/164-below-3/10", F(49, 164), F(3, 10)),
        _eq("ms-quotient-149/464", F(149, 2040) / F(58, 255), F(149, 464)),
        _lt("ms-149/464-beats-11/35", F(11, 35), F(149, 464)),
        _eq("ms-quotient-1629/5194", F(543, 1700) / F(2597, 2550), F(1629, 5194)),
        _eq("ms-rho", F(7159, 20400) / F(951, 850), RHO_MEAN_SQUARE),
        _lt("ms-rho-beats-1629/5194", F(1629, 5194), RHO_MEAN_SQUARE),
        _lt("ms-c-window", RHO_MEAN_SQUARE, C_UPPER),
        _lt("ms-c-above-threshold", RHO_FACTOR_THRESHOLD, RHO_MEAN_SQUARE),
        _eq("ms-11/35-decimal", F(11, 35), F(12738, 40530)),
        _eq("ms-eps-coeff-1", F(101, 100) / F(2597, 2550), F(25755, 10) / 2597),
        _eq("ms-eps-coeff-2", F(101, 100) / F(951, 850), F(8585, 10) / 951),
        _eq("ms-phi-1", F(2597, 2550) - F(101, 100), F(215, 10) / 2550),
        _eq("ms-phi-2", F(951, 850) - F(101, 100), F(925, 10) / 850),
        _eq("q3", q3, F(30, 7)),
        _eq("q6", q6, F(84, 19)),
        _eq("q7", q7, F(102, 23)),
        _eq("4/q3", 4 / q3, F(14, 15)),
        _lt("44/(17q)-lo", F(1, 2), F(44, 85)),
        _lt("44/(17q)-hi", F(44, 68), F(2, 3)),
        _eq("alpha-ratio-3", _alpha_ratio(3), F(49, 164)),
        _eq("alpha-ratio-6", _alpha_ratio(6), F(247, 792)),
        _eq("rho-7", exponent_table(7).rho, F(7, 102)),
    ]
    for nu in range(NU_MIN, 10):
        recs.append(_lt(f"q-monotone-{nu}", q_of(nu), q_of(nu + 1)))
    recs.append(_lt("q-limit", q_of(100), Q_LIMIT))
    return recs


def _alpha_ratio(nu: int) -> F:
    a1, a2 = exponent_table(nu).alpha
    return a2 / a1
