import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from expsums.planner import (
    PlannerError,
    PlannerInput,
    choose_N,
    nstar_fallback,
    plan,
)

SAMPLES = [
    ("1e3", "1e5", "1e10"),
    ("1e40", "1e60", "1e100"),
    ("1e130", "1e150", "1e200"),
    ("1e300", "1e400", "1e500"),
    ("1e600", "1e800", "1e1000"),
    ("1e1000", "1e1500", "1e2000"),
]


def _oracle_case_a(H, M, T, C2=14):
    """N and R for Case A via logarithms, at a different working precision."""
    with mpmath.workdps(80):
        lh, lm, lt = (mpmath.log(mpmath.mpf(v)) for v in (H, M, T))
        ln_n = lh + mpmath.mpf(41) / 25 * (lm - lh) - mpmath.mpf(49) / 100 * lt + mpmath.mpf(969) / 14000 * mpmath.log(lt)
        ln_r2 = mpmath.log(C2) + 3 * lm - ln_n - lt
        return mpmath.exp(ln_n), int(mpmath.ceil(mpmath.exp(ln_r2 / 2)))


def test_case_a_matches_log_oracle():
    rep = plan(PlannerInput("1e3", "1e5", "1e10", "A"), 3)
    N, R = _oracle_case_a("1e3", "1e5", "1e10")
    assert abs(rep.N / N - 1) < 1e-40
    assert rep.R == R
    assert rep.R_certain


@pytest.mark.parametrize("H,M,T", SAMPLES)
def test_R_is_ceil_sqrt(H, M, T):
    rep = plan(PlannerInput(H, M, T, "A"), 5)
    with mpmath.workdps(60):
        target = 14 * mpmath.mpf(M) ** 3 / (rep.N * mpmath.mpf(T))
        if rep.R_certain:
            assert (rep.R - 1) ** 2 < target <= rep.R**2
        else:
            # R beyond 50 digits: the upper candidate under a 1e-40 perturbation is reported
            assert rep.R > 10**40
            assert abs(mpmath.mpf(rep.R) ** 2 / target - 1) <= 2 * mpmath.mpf(10) ** -40


@pytest.mark.parametrize("H,M,T", SAMPLES)
@pytest.mark.parametrize("case", ["A", "B"])
def test_threshold_ordering(H, M, T, case):
    rep = plan(PlannerInput(H, M, T, case), 7)
    x = mpmath.mpf(H) / rep.R
    if x >= 1:
        assert rep.R <= rep.Q5 <= rep.R * x ** (mpmath.mpf(1) / 6)
    if x >= 2**10:
        assert rep.R <= rep.Q2
        assert rep.Q3 <= rep.Q4 <= mpmath.mpf(H)
    if mpmath.log(x) >= 260:
        assert rep.Q2 <= rep.Q3


def test_q2_q3_undefined_when_R_exceeds_2H():
    rep = plan(PlannerInput("1e600", "1e800", "1e1000", "B"), 7)
    assert mpmath.mpf(rep.R) > 2 * mpmath.mpf("1e600")
    assert mpmath.isnan(rep.Q2) and mpmath.isnan(rep.Q3)


@pytest.mark.parametrize("H,M,T", SAMPLES)
def test_R_sandwiched_by_R1(H, M, T):
    rep = plan(PlannerInput(H, M, T, "A"), 4)
    lo = rep.feasibility["2C2sqrt(H)+1<=R"]
    hi = rep.feasibility["R<=H"]
    if lo.holds and hi.holds:
        with mpmath.workdps(50):
            slack = 1 + mpmath.mpf(10) ** -45
            assert mpmath.sqrt(14) * rep.R1 <= rep.R * slack
            assert rep.R <= mpmath.sqrt(28) * rep.R1


@pytest.mark.parametrize("case", ["A", "B"])
def test_v1_v2_product(case):
    rep = plan(PlannerInput("1e40", "1e60", "1e100", case), 6)
    H, M = mpmath.mpf("1e40"), mpmath.mpf("1e60")
    prod = mpmath.mpf(rep.R) ** 4 * M**2 / (H**2 * rep.N**4)
    assert abs(rep.V1 * rep.V2 / prod - 1) < mpmath.mpf(10) ** -40


def test_case_b_takes_smaller_N():
    H, M, T = "1e5", "1e9", "1e16"
    with mpmath.workdps(50):
        h, m, t = (mpmath.mpf(v) for v in (H, M, T))
        L = mpmath.log(t)
        n1 = m ** (mpmath.mpf(7) / 8) * L ** (mpmath.mpf(969) / 5600) / (t ** (mpmath.mpf(3) / 20) * h ** (mpmath.mpf(29) / 40))
        n2 = m**2 / (h ** (mpmath.mpf(1) / 3) * t ** (mpmath.mpf(2) / 3))
        assert choose_N(H, M, T, "B") == min(n1, n2)


def test_report_lists_case_conditions():
    a = plan(PlannerInput("1e3", "1e5", "1e10", "A"), 3).feasibility
    b = plan(PlannerInput("1e3", "1e5", "1e10", "B"), 3).feasibility
    assert "A:H<=M/T^(49/164)" in a and "A:H<=M/T^(49/164)" not in b
    assert "B:M<=C5T^(1/2)" in b
    for c in a.values():
        d = c.as_dict()
        assert set(d) == {"lhs", "rel", "rhs", "premise", "holds"}


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 50), st.integers(2, 80), st.integers(10, 200), st.sampled_from("AB"), st.integers(3, 10))
def test_deterministic(h, m, t, case, nu):
    inp = PlannerInput(f"1e{h}", f"1e{m}", f"1e{t}", case)
    assert plan(inp, nu).as_dict() == plan(inp, nu).as_dict()


def test_input_validation():
    with pytest.raises(PlannerError):
        plan(PlannerInput("0.5", "1e5", "1e10"), 3)
    with pytest.raises(PlannerError):
        plan(PlannerInput("1e3", "1e5", "1e10", "C"), 3)
    with pytest.raises(PlannerError):
        plan(PlannerInput("1e3", "1e5", "1e10"), 2)
    with pytest.raises(PlannerError):
        plan(PlannerInput("1e3", "1e5", "1e10", constants={"C2": 0}), 3)
    with pytest.raises(PlannerError):
        choose_N(1, 1, 10, "Z")


def test_nonpositive_N_rejected():
    with pytest.raises(PlannerError):
        choose_N(1, "0", 10, "A")


def test_nstar_triggers_in_window():
    rep = nstar_fallback("1e-4", 10, 100)
    assert rep.in_window and rep.triggers
    # H above H* does not trigger
    assert not nstar_fallback("1e10", 10, 100).triggers
    # M outside [T^(7/16), T^(9/16)]
    assert not nstar_fallback("1e-4", 2, 100).in_window


def test_nstar_window_edges_inclusive():
    T = mpmath.mpf("1e16")
    assert nstar_fallback(1, T ** (mpmath.mpf(7) / 16), T).in_window
    assert nstar_fallback(1, T ** (mpmath.mpf(9) / 16), T).in_window


def test_nstar_rejects_bad_input():
    with pytest.raises(PlannerError):
        nstar_fallback(0, 10, 100)
