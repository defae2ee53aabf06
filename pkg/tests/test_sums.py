import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from expsums.sums import (
    PSI_TRUNC_C,
    PhaseFamily,
    SumError,
    SumJob,
    check_phase_conditions,
    eval_sum,
    fit_exponent,
    pairwise_sum,
    psi,
    psi_fourier_side,
    psi_truncated,
    tabulated,
)


def _oracle_sec7(H, M, T, a, b, dps=40):
    """Direct mpmath evaluation of sum (H/h) e(4hT/(4m+a) + hb/4)."""
    with mpmath.workdps(dps):
        tot = mpmath.mpc(0)
        for h in range(math.ceil(H), math.floor(2 * H) + 1):
            for m in range(math.ceil(M), math.floor(2 * M) + 1):
                ph = mpmath.mpf(4 * h * T) / (4 * m + a) + mpmath.mpf(h * b) / 4
                tot += mpmath.mpf(H) / h * mpmath.expjpi(2 * ph)
        return complex(tot)


# --------------------------------------------------------------------------
# sawtooth

def test_psi_examples():
    assert psi(Fraction(1, 3)) == Fraction(-1, 6)
    assert psi(Fraction(-1, 3)) == Fraction(1, 6)
    assert psi(0) == Fraction(-1, 2)
    assert psi(2.75) == 0.25
    assert np.allclose(psi(np.array([0.5, 1.25])), [0.0, -0.25])


def test_psi_truncated_special_points():
    half = psi_truncated(0.5, 10)
    assert abs(half.approx) < 1e-15
    zero = psi_truncated(0.0, 10)
    assert zero.approx == 0.0 and zero.bound == PSI_TRUNC_C
    with pytest.raises(SumError):
        psi_truncated(0.3, 0.5)


@pytest.mark.parametrize("K,n", [(10, 10**6), (100, 10**6), (1000, 10**6)])
def test_psi_truncation_error_within_bound(K, n):
    y = np.linspace(0.0, 1.0, n, endpoint=False)
    res = psi_truncated(y, K)
    err = np.abs(psi(y) - res.approx)
    assert np.all(err <= res.bound)


# --------------------------------------------------------------------------
# sums

def test_sec7_matches_mpmath_oracle():
    job = SumJob("S_sec7", H=1, M=3, T=10**6, a=1, b=0)
    ref = _oracle_sec7(1, 3, 10**6, 1, 0)
    for method in ("exact", "float"):
        assert abs(eval_sum(job, method=method).value - ref) < 1e-12


@pytest.mark.parametrize("a,b", [(-1, 0), (0, 1), (0, -1), (0, 0)])
def test_sec7_shifts_match_oracle(a, b):
    job = SumJob("S_sec7", H=3, M=7, T=123_456_789, a=a, b=b)
    ref = _oracle_sec7(3, 7, 123_456_789, a, b)
    assert abs(eval_sum(job).value - ref) < 1e-12


def test_T_zero_is_weight_sum():
    job = SumJob("S_sec7", H=2, M=5, T=0)
    res = eval_sum(job)
    expect = sum(2 / h for h in range(2, 5)) * 6
    assert abs(res.value - expect) < 1e-12
    assert res.weight_sum == pytest.approx(expect)


def test_huge_T_uses_python_ints():
    T = 10**25 + 7
    job = SumJob("S_sec7", H=2, M=4, T=T, a=1, b=0)
    assert abs(eval_sum(job).value - _oracle_sec7(2, 4, T, 1, 0, dps=60)) < 1e-12


def test_s_star_single_row():
    job = SumJob("S_star", H=1, M=10, T=1000.5, H1=1, M1=5)
    res = eval_sum(job)
    assert res.term_count == 6
    assert abs(res.value) <= 6
    with mpmath.workdps(40):
        ref = sum(mpmath.expjpi(2 * mpmath.mpf(1000.5) * mpmath.log(mpmath.mpf(m + 1) / (m - 1))) for m in range(5, 11))
    assert abs(res.value - complex(ref)) < 1e-12


def test_log_phase_matches_oracle():
    job = SumJob("S_general", H=2, M=8, T=5000.25, phase="log")
    res = eval_sum(job)
    with mpmath.workdps(40):
        ref = mpmath.mpc(0)
        for h in range(2, 5):
            for m in range(8, 17):
                ph = mpmath.mpf(h) * mpmath.mpf(5000.25) / 8 * mpmath.log(mpmath.mpf(m) / 8)
                ref += mpmath.mpf(2) / h * mpmath.expjpi(2 * ph)
    assert abs(res.value - complex(ref)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 20), st.integers(2, 60), st.integers(0, 10**15), st.sampled_from([(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)]))
def test_exact_and_float_paths_agree(H, M, T, ab):
    a, b = ab
    job = SumJob("S_sec7", H=H, M=M, T=T, a=a, b=b)
    ex = eval_sum(job, method="exact")
    fl = eval_sum(job, method="float")
    assert abs(ex.value - fl.value) <= 1e-9 * max(1.0, ex.weight_sum)
    # triangle inequality
    assert abs(ex.value) <= ex.weight_sum * (1 + 1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 20), st.integers(2, 60), st.integers(0, 10**12), st.sampled_from([(0, 0), (1, 0), (0, -1)]))
def test_conjugation_is_exact(H, M, T, ab):
    a, b = ab
    for method in ("exact", "float"):
        v = eval_sum(SumJob("S_sec7", H=H, M=M, T=T, a=a, b=b), method=method).value
        w = eval_sum(SumJob("S_sec7", H=H, M=M, T=T, a=a, b=b, conjugate=True), method=method).value
        assert w == v.conjugate()


def test_workers_do_not_change_result():
    job = SumJob("S_sec7", H=40, M=2000, T=987_654_321, a=1)
    base = eval_sum(job, workers=1)
    assert base.term_count > 2 * (1 << 15)
    for w in (2, 3):
        assert eval_sum(job, workers=w).value == base.value


def test_pairwise_sum_is_order_fixed():
    x = np.arange(1, 1001, dtype=np.float64) / 7
    assert pairwise_sum(x) == pytest.approx(math.fsum(x), rel=1e-14)
    assert pairwise_sum(np.array([])) == 0


def test_tabulated_weight():
    g = tabulated([1.0, 3.0])
    assert g(np.array([1.0, 1.5, 2.0])).tolist() == [1.0, 2.0, 3.0]
    with pytest.raises(SumError):
        tabulated([1.0])


def test_errors():
    with pytest.raises(SumError):
        eval_sum(SumJob("S_sec7", H=1, M=1, T=10, a=-4))
    with pytest.raises(SumError):
        eval_sum(SumJob("S_sec7", H=1, M=1, T=10, a=1, b=1))
    with pytest.raises(SumError):
        eval_sum(SumJob("S_star", H=4, M=4, T=10.0, H1=4, M1=3))  # m - h <= 0
    with pytest.raises(SumError):
        eval_sum(SumJob("S_general", H=1, M=3, T=10.5, phase="log"), method="exact")
    with pytest.raises(SumError):
        eval_sum(SumJob("S_sec7", H=1, M=3, T=10), method="fast")
    with pytest.raises(SumError):
        SumJob("nope", H=1, M=3, T=10).validate()
    with pytest.raises(SumError):
        SumJob("S_sec7", H=1, M=3, T=10, M2=7).validate()


def test_psi_fourier_side_tracks_psi_sum():
    M, T, K = 50, 10**7 + 3, 2000
    approx = psi_fourier_side(M, T, 1, 0, K)
    exact = sum(psi(Fraction(4 * T, 4 * m + 1)) for m in range(M, 2 * M + 1))
    assert abs(approx - float(exact)) < 0.05 * (M + 1)


# --------------------------------------------------------------------------
# phase conditions and fitting

def test_phase_conditions_inverse_shift():
    res = check_phase_conditions(PhaseFamily("inverse_shift", a=1, M=100))
    assert res.ok
    assert not check_phase_conditions(PhaseFamily("inverse_shift"), C=(1, 1, 1, 1)).ok


def test_phase_conditions_log_witness():
    res = check_phase_conditions(PhaseFamily("log"))
    w = res.witnesses["F1F3-3F2^2"]["min_abs"]
    assert w == pytest.approx(1 / 16)  # |F'F''' - 3F''^2| = x^-4 on [1, 2]
    assert not res.ok  # 1/16 < 1/14
    assert check_phase_conditions(PhaseFamily("log"), C=(14, 14, 14, 16)).ok


def test_phase_family_errors():
    with pytest.raises(SumError):
        check_phase_conditions(PhaseFamily("cubic"))
    with pytest.raises(SumError):
        check_phase_conditions(PhaseFamily("log"), grid=1)


def test_fit_exponent():
    samples = [(t, 3 * t**0.5) for t in (1e2, 1e3, 1e4, 1e5)]
    assert fit_exponent(samples) == pytest.approx(0.5)
    with pytest.raises(SumError):
        fit_exponent(samples[:2])
    with pytest.raises(SumError):
        fit_exponent([(1, 1), (2, 0), (3, 1)])
