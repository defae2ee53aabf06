import random
from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from expsums.bounds import (
    BOUND_IDS,
    BoundError,
    build_bound,
    closure,
    condition_check,
    crossing,
    derive_theta,
    eval_exponent,
    exponent_pair,
    region_check,
    remark_ratios,
    replay_section7,
    replay_section8,
    sample_remark_points,
    with_constant_shift,
)
from expsums.pwl import LinForm, Scale, add, lin, one_plus, ratio_form
from expsums.tables import RHO_MEAN_SQUARE, THETA

# --------------------------------------------------------------------------
# independent oracle: evaluate the bounds as real products at a huge T
# and read off log_T.  Tables are transcribed here, not imported.

LN_T = mpmath.mpf(10) ** 13 * mpmath.log(10)


def _oracle_params(nu):
    q = mpmath.mpf(6 * (3 * nu - 4)) / (4 * nu - 5)
    small = nu <= 5
    rho = 1 / q - mpmath.mpf(1) / 6 if small else 4 / q - mpmath.mpf(5) / 6
    f = mpmath.mpf
    if small:
        alpha = (f(79) / (25 * q) - f(43) / 75, f(137) / (200 * q) - f(133) / 1200)
        beta = (f(297) / (80 * q) - f(111) / 160, f(89) / 240 - f(61) / (40 * q), f(49) / 96 - f(29) / (16 * q))
        bstar = (f(7) / (6 * q) - f(5) / 36, f(11) / (6 * q) - f(13) / 36)
    else:
        alpha = (f(31) / 15 - f(218) / (25 * q), f(57) / 80 - f(151) / (50 * q))
        beta = (f(65) / 32 - f(171) / (20 * q), f(41) / 48 - f(37) / (10 * q), f(229) / 96 - f(41) / (4 * q))
        bstar = (f(79) / 36 - f(28) / (3 * q), f(23) / 36 - f(8) / (3 * q))
    return q, rho, alpha, beta, bstar


def _mp(x):
    x = F(x)
    return mpmath.mpf(x.numerator) / x.denominator


def _oracle(bid, nu, h, m):
    """log_T of the bound with T = 10^(10^13), H = T^h, M = T^m."""
    with mpmath.workdps(40):
        q, rho, (a1, a2), (b1, b2, b3), (s1, s2) = _oracle_params(nu)
        L = LN_T
        T, H, M = mpmath.mpf(1), _mp(h), _mp(m)  # log_T of each
        e = lambda x: mpmath.exp(x * L)
        f = mpmath.mpf
        if bid == "X46":
            r = H - M
            val = (
                (1 + e(f(99) / 25 * r + f(247) / 200 * T)) ** rho
                * (1 + e(-(f(19) / 75 - f(14) / (25 * q)) * r - (1 / (25 * q) + f(13) / 400) * T)
                   + e(a1 * r + a2 * T))
                * e((f(22) / (25 * q) + f(41) / 50) * r + (f(33) / (100 * q) + f(49) / 200) * T)
            )
        elif bid == "Y49":
            val = (
                (1 + e(f(29) / 40 * T + f(327) / 80 * H - f(45) / 16 * M)) ** rho
                * (1 + e((f(5) / (2 * q) - f(43) / 96) * M - (f(53) / 160 - f(9) / (10 * q)) * H
                         - (f(7) / (5 * q) - f(67) / 240) * T)
                   + e(b1 * H + b2 * T - b3 * M))
                * e((f(11) / (20 * q) + f(3) / 40) * T + (f(33) / (40 * q) + f(69) / 80) * H
                    - (f(11) / (8 * q) + f(7) / 16) * M)
            )
        else:  # Z410
            u = 3 * M - T
            val = (
                (1 + e(f(3) / 2 * T + f(7) / 2 * H - f(9) / 2 * M)) ** rho
                * (1 + e((f(7) / 36 - 2 / (3 * q)) * u - (2 / (3 * q) - f(1) / 36) * H) + e(s1 * H - s2 * u))
                * e((f(11) / (51 * q) + f(1) / 3) * T + (f(55) / (51 * q) + f(2) / 3) * H
                    - (1 + f(11) / (17 * q)) * M)
            )
        return mpmath.log(val) / L


def _oracle_reduced(nu, d, D):
    """Unsimplified reduced bound in (log delta, log Delta), log base T."""
    with mpmath.workdps(40):
        L = LN_T
        d, D = _mp(d), _mp(D)
        e = lambda x: mpmath.exp(x * L)
        k = mpmath.mpf(6 * (3 * nu - 4))
        if nu >= 6:
            val = (1 + e(2 * d + D)) ** (nu / k) * (1 + e((2 - nu) * d - nu * D) + e((nu - 2) * d + (nu - 4) * D)) ** (1 / k)
        else:
            val = (1 + e(2 * d + D)) ** ((nu - 1) / k) * (1 + e((2 - nu) * d - nu * D) + e(nu * d + (nu - 3) * D)) ** (1 / k)
        q = mpmath.mpf(6 * (3 * nu - 4)) / (4 * nu - 5)
        return mpmath.log(val) / L + d / 2 + mpmath.mpf(22) / (17 * q) * D


def _rand_pt(rng, lo=-1, hi=1):
    return F(rng.randint(lo * 1000, hi * 1000), 1000), F(rng.randint(lo * 1000, hi * 1000), 1000)


@pytest.mark.parametrize("bid", ["X46", "Y49", "Z410"])
@pytest.mark.parametrize("nu", [3, 4, 5, 6, 7, 12])
def test_bound_matches_product_oracle(bid, nu):
    rng = random.Random(hash((bid, nu)) & 0xFFFF)
    b = build_bound(bid, nu)
    for _ in range(40):
        h, m = _rand_pt(rng)
        assert abs(float(eval_exponent(b, h, m)) - float(_oracle(bid, nu, h, m))) < 1e-12


@pytest.mark.parametrize("nu", [3, 4, 5, 6, 7, 9])
def test_reduced_bound_matches_unsimplified_form(nu):
    rng = random.Random(nu)
    b = build_bound("D67" if nu >= 6 else "D68", nu)
    for _ in range(40):
        d, D = _rand_pt(rng)
        assert abs(float(b(d, D)) - float(_oracle_reduced(nu, d, D))) < 1e-12


# --------------------------------------------------------------------------
# piecewise-linear machinery

def test_linform_arithmetic():
    f = LinForm(1, 2, 3)
    g = LinForm(F(1, 2), -1, 0)
    assert (f + g)(1, 1) == f(1, 1) + g(1, 1)
    assert (f - g) == LinForm(F(1, 2), 3, 3)
    assert -f == LinForm(-1, -2, -3)
    assert f.scale(F(1, 3)) == LinForm(F(1, 3), F(2, 3), 1)
    # substitute h -> 2u, m -> v + 1
    s = f.substitute(LinForm(0, 2, 0), LinForm(1, 0, 1))
    assert s == LinForm(4, 4, 3)
    assert ratio_form(5, 1).ratio_only and not f.ratio_only


def test_scale_one_is_noop():
    e = add(one_plus(LinForm(1, 1, 0)), lin(0, 0, 1))
    assert Scale(1, e).expand() == e.expand()
    for h, m in [(F(0), F(0)), (F(-3), F(2)), (F(1, 7), F(-5, 3))]:
        assert Scale(1, e)(h, m) == e(h, m)


def test_negative_scale_rejected():
    e = Scale(-1, lin(1))
    assert not e.is_convex()
    with pytest.raises(ValueError):
        e.expand()


rationals = st.fractions(min_value=-2, max_value=2, max_denominator=50)


@settings(max_examples=60, deadline=None)
@given(rationals, rationals, rationals, rationals, st.sampled_from(BOUND_IDS), st.integers(3, 9))
def test_expand_agrees_and_midpoint_convex(h1, m1, h2, m2, bid, nu):
    if bid == "D67":
        nu = max(nu, 6)
    elif bid == "D68":
        nu = min(nu, 5)
    b = build_bound(bid, nu)
    forms = b.expr.expand()
    for h, m in ((h1, m1), (h2, m2)):
        assert b(h, m) == max(f(h, m) for f in forms)
    mid = b((h1 + h2) / 2, (m1 + m2) / 2)
    assert mid <= (b(h1, m1) + b(h2, m2)) / 2


def test_unknown_bound_and_nu_rules():
    with pytest.raises(BoundError):
        build_bound("X99", 3)
    with pytest.raises(BoundError):
        build_bound("X46")
    with pytest.raises(BoundError):
        build_bound("D67", 5)
    with pytest.raises(BoundError):
        build_bound("D68", 6)
    assert build_bound("H79", 42).nu is None


# --------------------------------------------------------------------------
# fixed values

def test_h79_at_balance_point():
    b = build_bound("H79")
    assert eval_exponent(b, F(-71, 206), 0) == F(517, 1648)
    assert eval_exponent(build_bound("H711"), F(-71, 206), 0) == F(517, 1648)


def test_x46_nu7_constants():
    b = build_bound("X46", 7)
    # at H = M the ratio factors vanish and only T-powers remain
    q = F(102, 23)
    rho = F(7, 102)
    a2 = F(57, 80) - F(151, 50) / q
    lead_t = F(33, 100) / q + F(49, 200)
    expected = rho * F(247, 200) + max(F(0), -(F(1, 25) / q + F(13, 400)), a2) + lead_t
    assert eval_exponent(b, 0, 0) == expected


def test_derive_theta():
    res = derive_theta()
    assert res.theta == THETA == F(517, 1648)
    assert res.balance == F(71, 206)


def test_theta_moves_with_perturbed_constant():
    h79 = with_constant_shift(build_bound("H79"), F(1, 10_000))
    res = derive_theta(h79=h79)
    assert res.theta > THETA
    assert res != derive_theta()


def test_crossing_with_nu6_simplification_differs():
    res = crossing(build_bound("H79"), build_bound("H712"))
    assert res.theta != THETA
    # independent solve: 131/400 - x/25 = 146/525 + 113 x /1050
    x = (F(131, 400) - F(146, 525)) / (F(113, 1050) + F(1, 25))
    assert res.balance == x


@pytest.mark.parametrize("nu", [3, 6, 7])
def test_closure(nu):
    res = closure(nu)
    assert res.ok, (res.terms, res.expected)


def test_closure_x0():
    assert closure(3).x0 == THETA
    assert closure(7).x0 == RHO_MEAN_SQUARE


def test_replay_section7_low_density():
    cert = replay_section7(grid_density=2)
    assert cert.ok
    assert cert.max_min_exponent == THETA
    assert cert.argmax_on_balance_line


def test_replay_section7_detects_smaller_theta():
    cert = replay_section7(grid_density=2, theta=F(517, 1648) - F(1, 10**6))
    assert not cert.ok
    assert cert.failures


def test_replay_section8():
    rep = replay_section8()
    assert rep.ok, [c for c in rep.checks if not c[1]]
    assert rep.phi == F(43, 5100)


def test_replay_section8_catches_corrupt_display():
    from expsums.bounds import TERMS_NU7

    bad = list(TERMS_NU7)
    bad[1] += F(1, 1700)
    assert not replay_section8(bad).ok


# --------------------------------------------------------------------------
# regions

def test_region_boundaries():
    h = F(1, 3)
    m = h + F(49, 164)
    assert condition_check("A:H<=M/T^(49/164)", h, m).pure_exponent_ok
    # strict inequality is false on its boundary
    m = F(2, 5)
    h = F(53, 92) - F(27, 23) * m
    assert not condition_check("H>T^(53/92)/M^(27/23)", h, m).pure_exponent_ok


def test_log_factor_changes_verdict_on_boundary():
    m = F(7, 16)
    v = condition_check("M>T^(7/16)", 0, m, logT_value=float(mpmath.e))
    assert not v.pure_exponent_ok and v.with_logs_ok is False
    # just above the line the bare exponents pass but the log factor does not
    v = condition_check("M>T^(7/16)", 0, m + F(1, 10**6), logT_value=float(mpmath.e))
    assert v.pure_exponent_ok
    assert v.with_logs_ok is False
    v = condition_check("M>T^(7/16)", 0, m + F(1, 10**6), logT_value=1e9)
    assert v.with_logs_ok is True


def test_case_i_with_logs_false_at_corner():
    # h + 9m - 4 = 0 exactly: the bare comparison holds, log factor breaks it
    m = F(7, 16) - F(1, 1000)
    h = 4 - 9 * m
    v = condition_check("case-I", h, m, logT_value=float(mpmath.e))
    assert v.pure_exponent_ok
    assert v.with_logs_ok is False


def test_region_check_uses_bound_region():
    b = build_bound("X46", 3)
    v = region_check(b, F(1, 10), F(1, 2))
    assert v.pure_exponent_ok
    v = region_check(b, F(1, 2), F(1, 2))
    assert "A:H<=M/T^(49/164)" in v.failed_conditions


def test_unknown_condition():
    with pytest.raises(BoundError):
        condition_check("nope", 0, 0)


# --------------------------------------------------------------------------
# remark ratios and exponent pairs

def test_remark_skips_zero_denominator():
    rr = remark_ratios(3, [(F(0), F(4, 9))])
    assert len(rr.skipped) == 1
    assert rr.skipped[0][2] == "h + 9m - 4 = 0"
    assert len(rr.zeta_samples) == 1


def test_sample_remark_points_in_region():
    pts = sample_remark_points(20, seed=3)
    assert len(pts) == 20
    for nu in (3, 6):
        for h, m in pts:
            for bid in ("X46", "Y49", "Z410"):
                assert region_check(build_bound(bid, nu), h, m).pure_exponent_ok
    assert pts == sample_remark_points(20, seed=3)


def test_remark_ratio_range():
    rr = remark_ratios(4, sample_remark_points(30, seed=1))
    assert not rr.violations()


def test_exponent_pairs():
    assert exponent_pair("B") == (F(1, 2), F(1, 2))
    assert exponent_pair("A") == (F(0), F(1))
    assert exponent_pair("BAAB") == (F(2, 7), F(4, 7))
    assert exponent_pair("AB") == (F(1, 6), F(2, 3))
    for word in ("", "AC", "ab"):
        with pytest.raises(BoundError):
            exponent_pair(word)
    with pytest.raises(BoundError):
        exponent_pair("A", seed=(F(3, 4), F(1, 2)))
