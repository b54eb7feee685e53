import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracgd.bounds import BoundConstants, SmoothnessProfile, k_constants
from fracgd.errors import InfeasibleError, ParameterError, UnsupportedSettingError
from fracgd.schedules import (
    S_MIN,
    cvx_general_rate_constant,
    cvx_separable_rate_constant,
    eta_cvx_general,
    eta_cvx_separable,
    eta_sc,
    eta_sc_general,
    feasible_lambda_interval,
    lambda_from_s,
    nonconvex_schedule,
    nonconvex_terminal,
    s_sequence,
    s_sequence_next,
    telescoping_lhs,
    telescoping_rhs,
)

FIG = k_constants(SmoothnessProfile(20.0, 2.0), 0.5, -0.4)  # K1 = -8.0667, K2 = 6.6


def consts(K1, K2):
    return BoundConstants(0.0, K1, K2, "test")


def full_lhs(s):
    return (s + 1) ** 2 / (s * s - 4 * s - 1) + 2 / s


# feasibility interval


def test_interval_endpoints():
    eps = 1e-3
    lo, hi = feasible_lambda_interval(consts(2.0, 1.0), eps)
    assert hi == pytest.approx((1 - eps) / 3.0)
    # K2 < K1: every negative lambda is feasible
    assert lo == -math.inf
    lo, hi = feasible_lambda_interval(FIG, eps)
    assert lo == pytest.approx(-(1 - eps) / (FIG.K2 - FIG.K1), rel=1e-14)
    assert hi == math.inf
    assert feasible_lambda_interval(consts(0.0, 0.0), eps) == (-math.inf, math.inf)


def test_interval_errors():
    with pytest.raises(InfeasibleError):
        feasible_lambda_interval(FIG, 1.0)
    with pytest.raises(ParameterError):
        feasible_lambda_interval(FIG, 0.0)


@settings(max_examples=100, deadline=None)
@given(K1=st.floats(-20, 20), K2=st.floats(0, 20), eps=st.floats(1e-4, 0.9), frac=st.floats(-1.5, 1.5))
def test_interval_matches_condition(K1, K2, eps, frac):
    c = consts(K1, K2)
    lo, hi = feasible_lambda_interval(c, eps)
    lam = frac * (hi if frac > 0 else -lo) if math.isfinite(hi if frac > 0 else lo) else frac * 10.0
    inside = lo < lam < hi
    value = 1 - K1 * lam - K2 * abs(lam)
    if abs(value - eps) > 1e-9:
        assert inside == (value > eps)


# strongly convex schedules


def test_eta_sc_reduces_to_gradient_descent():
    for phi in (0.5, 1.0, 1.5):
        rule = eta_sc(FIG, 0.0, phi, 20.0, 2.0)
        assert rule.eta == pytest.approx(phi / 20.0)
        assert rule.rho == pytest.approx(1 - (2 - phi) * phi * 2.0 / 20.0)
    assert eta_sc(FIG, 0.0, 1.0, 20.0).eta == 1 / 20.0


def test_eta_sc_derived_value():
    rule = eta_sc(FIG, -0.0675, 1.0, 20.0, 2.0, epsilon=1e-3)
    lo = 1 - 0.5445 - 0.4455
    hi = 1 - 0.5445 + 0.4455
    assert rule.eta == pytest.approx(lo / (hi**2 * 20.0), rel=1e-9)
    assert rule.eta == pytest.approx(6.1591449e-4, rel=1e-7)
    assert rule.rho == pytest.approx(1 - 0.1 * (lo / hi) ** 2, rel=1e-12)
    assert 0 < rule.rho < 1


def test_eta_sc_infeasible_and_bad_phi():
    with pytest.raises(InfeasibleError, match="K1"):
        eta_sc(FIG, -0.08, 1.0, 20.0, 2.0, epsilon=1e-3)
    with pytest.raises(ParameterError):
        eta_sc(FIG, 0.0, 2.0, 20.0)


def test_eta_sc_general_values():
    rule = eta_sc_general(FIG, 0.0, 1.0, 20.0, 2.0)
    assert rule.eta == pytest.approx(1 / 20.0)
    assert rule.rho == pytest.approx(1 - 2.0 / 20.0)
    lam = -0.001
    base = 1 + 8.066666666666666 * lam
    numer = base / 20.0 - 2 * 6.6 * abs(lam) / 2.0
    denom = (base + 6.6 * abs(lam)) ** 2
    rule = eta_sc_general(FIG, lam, 1.0, 20.0, 2.0)
    assert rule.eta == pytest.approx(numer / denom, rel=1e-12)
    assert rule.rho == pytest.approx(1 - 2.0 * base * numer / denom, rel=1e-12)
    # the fig3 offset violates the general condition
    with pytest.raises(InfeasibleError):
        eta_sc_general(FIG, -0.0675, 1.0, 20.0, 2.0)
    with pytest.raises(UnsupportedSettingError):
        eta_sc_general(FIG, 0.0, 1.0, 20.0, 0.0)


# convex schedules


def test_eta_cvx_separable():
    cvx = k_constants(SmoothnessProfile(20.0, 0.0), 0.5, -0.4)
    assert eta_cvx_separable(cvx, 0.0, 20.0) == pytest.approx(1 / 20.0)
    lam = -0.005
    lo = 1 - lam * cvx.K1 - abs(lam) * cvx.K2
    hi = 1 - lam * cvx.K1 + abs(lam) * cvx.K2
    assert eta_cvx_separable(cvx, lam, 20.0) == pytest.approx((2 * lo / hi**2 - 1 / lo) / 20.0, rel=1e-12)
    ratio = (math.sqrt(2) + 1) / (math.sqrt(2) - 1)
    edge = -1.0 / (ratio * cvx.K2 - cvx.K1)  # 1 - lam K1 = ratio |lam| K2 for lam < 0
    with pytest.raises(InfeasibleError):
        eta_cvx_separable(cvx, edge * 1.0001, 20.0)


def test_cvx_separable_rate_constant():
    cvx = k_constants(SmoothnessProfile(4.0, 0.0), 0.5, 0.0)
    assert cvx_separable_rate_constant(cvx, 0.0, 4.0, 3.0) == pytest.approx(4.0 * 3.0 / 2.0)


def test_s_sequence_frozen_example():
    assert telescoping_rhs(10.0) + 1 == pytest.approx(121 / 59, rel=1e-15)
    s_next = s_sequence_next(10.0)
    assert full_lhs(s_next) <= 121 / 59 + 1e-10
    # dense grid oracle: the first grid point meeting the condition sits just above s_next
    grid = np.arange(10.0, 40.0, 1e-5)
    first = grid[np.argmax(full_lhs(grid) <= 121 / 59)]
    assert s_next <= first + 1e-9 and first - s_next < 2e-5
    assert s_next == pytest.approx(11.17626643, rel=1e-8)


@settings(max_examples=80, deadline=None)
@given(s=st.floats(S_MIN + 1e-3, 1e9))
def test_s_sequence_pairs_and_monotonicity(s):
    s_next = s_sequence_next(s)
    assert s_next >= s
    assert telescoping_lhs(s_next) <= telescoping_rhs(s)
    # the condition fails at s itself because of the 2/s term
    assert telescoping_lhs(s) > telescoping_rhs(s)


def test_s_sequence_run():
    seq = s_sequence(5.0, 50)
    assert seq[0] == 5.0 and np.all(np.diff(seq) > 0)
    assert all(telescoping_lhs(b) <= telescoping_rhs(a) for a, b in zip(seq, seq[1:]))
    with pytest.raises(ParameterError):
        s_sequence_next(S_MIN)


def test_telescoping_large_s_asymptote():
    s = 1e12
    assert telescoping_lhs(s) == pytest.approx(8 / s, rel=1e-6)
    assert full_lhs(1e3) == pytest.approx(1 + telescoping_lhs(1e3), rel=1e-14)


def test_lambda_from_s():
    pos, neg = lambda_from_s(7.0, consts(0.0, 2.0))
    assert pos == pytest.approx(1 / 14) and neg == pytest.approx(-1 / 14)
    pos, neg = lambda_from_s(5.0, FIG)
    assert pos == pytest.approx(1 / (FIG.K1 + 5 * FIG.K2))
    assert neg == pytest.approx(-1 / (5 * 6.6 + 8.066666666666666))
    for lam in (pos, neg):
        assert 1 - lam * FIG.K1 == pytest.approx(5.0 * abs(lam) * FIG.K2, rel=1e-13)
    with pytest.raises(UnsupportedSettingError):
        lambda_from_s(5.0, consts(1.0, 0.0))


def test_eta_cvx_general():
    assert eta_cvx_general(1e8, 0.0, FIG, 20.0) == pytest.approx(1 / 20.0, rel=1e-7)
    _, neg = lambda_from_s(5.0, FIG)
    assert eta_cvx_general(5.0, neg, FIG, 20.0) == pytest.approx((1 / 9) / (20.0 * (1 - neg * FIG.K1)), rel=1e-13)
    assert eta_cvx_general(10.0, 0.01, FIG, 4.0) == pytest.approx((59 / 121) / (4.0 * (1 - 0.01 * FIG.K1)))
    with pytest.raises(InfeasibleError):
        eta_cvx_general(4.0, 0.0, FIG, 20.0)
    assert cvx_general_rate_constant(10.0, 2.0, 3.0) == pytest.approx(0.5 * 2.0 * (121 / 59 + 0.2) * 3.0)


# non-convex schedule


def test_nonconvex_p_one():
    prof = SmoothnessProfile(3.0, 0.0, 1.0)
    K = 3.0 * 0.5 / 1.5
    eta_max, eta, psi = nonconvex_schedule(prof, 0.5, 0.4)
    assert eta_max == pytest.approx(2 * (1 - K * 0.4) / (3.0 * (1 + K * 0.4) ** 2))
    assert eta == pytest.approx(eta_max / 2) and psi > 0
    with pytest.raises(InfeasibleError):
        nonconvex_schedule(prof, 0.5, 1.0 / K)
    # lam = 0 with p = 1 is gradient descent with eta = 1/L
    assert nonconvex_schedule(prof, 0.5, 0.0)[1] == pytest.approx(1 / 3.0)


def test_nonconvex_derived_example_and_grid():
    prof = SmoothnessProfile(1.0, 0.0, 0.5)
    eta_max, eta, psi = nonconvex_schedule(prof, 0.5, 1.0)
    assert eta_max == pytest.approx(1 / 6, rel=1e-13)
    assert psi == pytest.approx((1 / 12) * (0.5 - (1 / 1.5) * math.sqrt(1 / 12) * 1.5**1.5), rel=1e-12)
    assert psi > 0

    def psi_of(h):
        return h * (0.5 - (1 / 1.5) * h**0.5 * 1.5**1.5)

    grid = np.linspace(1e-6, 0.3, 30001)
    positive = grid[psi_of(grid) > 0]
    assert positive.max() <= eta_max and eta_max - positive.max() <= grid[1] - grid[0]
    with pytest.raises(InfeasibleError):
        nonconvex_schedule(prof, 0.5, 1.0, eta=0.2)


def test_nonconvex_small_lambda():
    prof = SmoothnessProfile(1.0, 0.0, 0.5)
    # at a fixed step the progress vanishes with lam
    psis = [nonconvex_schedule(prof, 0.5, lam, eta=1e-3)[2] for lam in (1e-2, 1e-4, 1e-6)]
    assert all(p > 0 for p in psis) and psis[0] > psis[1] > psis[2]
    assert psis[-1] < 1e-5
    # with eta = eta_max / 2 it does not: eta_max grows like lam^(p-1) and psi tends to
    # (1 - 2^-p) (eta_max / 2) lam^(1-p) = (1 - 2^-0.5) * 2.25 / 2
    scaled = nonconvex_schedule(prof, 0.5, 1e-10)[2]
    assert scaled == pytest.approx((1 - 2**-0.5) * 1.125, rel=1e-4)
    with pytest.raises(InfeasibleError):
        nonconvex_schedule(prof, 0.5, 0.0)
    with pytest.raises(InfeasibleError):
        nonconvex_schedule(prof, 0.5, 4.0)


def test_nonconvex_terminal():
    assert nonconvex_terminal(0.0, 0.3, 0.5) == 0.0
    assert nonconvex_terminal(2.5, 0.3, 1.0) == pytest.approx(-0.75)
    np.testing.assert_allclose(nonconvex_terminal([4.0, -0.25], 0.3, 0.5), [-4.8, 0.01875])
