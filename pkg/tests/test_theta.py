import math

import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from modsecrecy.theta import (
    EvalPoint,
    ToleranceError,
    agm,
    elliptic_K,
    elliptic_K_prime,
    modular_quantities,
    nome_ratio,
    theta,
    theta_eval,
    theta_excess,
)

# 30-digit values from mpmath.jtheta(k, 0, exp(-pi*y))
ORACLE = {
    0.05: (4.4721359549995793928, 4.4721359549995793928, 1.3479172284154821466e-6),
    0.3: (1.825638451767212859, 1.8258452649338945688, 0.26637230805362245205),
    1.0: (0.91357913815611682141, 1.0864348112133080146, 0.91357913815611682141),
    2.5: (0.28073388769531583491, 1.0007764064078989545, 0.99922359359219188953),
    7.0: (0.0081916497787016717858, 1.0000000005628536915, 0.9999999994371463085),
}
# mpmath.ellipk(k**2)
K_ORACLE = {0.1: 1.5747455615173559527, 0.5: 1.6857503548125960429, 0.9: 2.2805491384227702046}


@pytest.mark.parametrize("y", sorted(ORACLE))
@pytest.mark.parametrize("kind", [2, 3, 4])
def test_theta_matches_high_precision_oracle(kind, y):
    cv = theta_eval(kind, y, tol=1e-13)
    expected = ORACLE[y][kind - 2]
    assert abs(cv.value - expected) <= cv.err_bound + 1e-15
    assert cv.err_bound <= 1e-13


def test_theta3_at_50_is_one():
    cv = theta_eval(3, 50, 1e-12)
    assert cv.value == 1.0
    assert cv.err_bound <= 1e-12


def test_theta2_equals_theta4_at_one():
    assert theta(2, 1.0) == pytest.approx(theta(4, 1.0), abs=1e-15)
    assert theta(2, 1.0) == pytest.approx(0.913579138156117, abs=1e-14)


def test_direct_summation_oracle_large_y():
    # raw definition, no transformation, y >= 1 converges fast
    for y in (1.0, 1.7, 4.0):
        q = math.exp(-math.pi * y)
        t3 = 1 + 2 * sum(q ** (n * n) for n in range(1, 30))
        t2 = 2 * sum(q ** ((n + 0.5) ** 2) for n in range(30))
        for kind, ref in ((3, t3), (2, t2)):
            cv = theta_eval(kind, y, 1e-14)
            assert abs(cv.value - ref) <= cv.err_bound + 1e-15


def test_unreachable_tolerance_is_an_error():
    with pytest.raises(ToleranceError):
        theta_eval(3, 0.001, tol=1e-30)
    with pytest.raises(ToleranceError):
        theta_eval(3, 1.0, tol=1e-13, max_terms=1)


@pytest.mark.parametrize("bad", [0.0, -1.0, float("inf"), float("nan")])
def test_eval_point_rejects_bad_y(bad):
    with pytest.raises(ValueError):
        EvalPoint(bad)


def test_bad_kind_and_tol():
    with pytest.raises(ValueError):
        theta_eval(1, 1.0)
    with pytest.raises(ValueError):
        theta_eval(3, 1.0, tol=0)


def test_nome_is_decreasing():
    assert EvalPoint(0.5).q > EvalPoint(0.6).q


@given(st.floats(min_value=0.05, max_value=20))
@settings(max_examples=60, deadline=None)
def test_jacobi_quartic_identity(y):
    t2, t3, t4 = (theta(j, y, 1e-14 * max(1, 1 / math.sqrt(y))) for j in (2, 3, 4))
    assert abs(t3**4 - t2**4 - t4**4) <= 1e-12 * t3**4


@given(st.floats(min_value=0.05, max_value=20))
@settings(max_examples=60, deadline=None)
def test_imaginary_transformation(y):
    t = 1e-14 * max(1, 1 / math.sqrt(y), math.sqrt(y))
    assert theta(3, 1 / y, t) == pytest.approx(math.sqrt(y) * theta(3, y, t), rel=1e-12)
    assert theta(4, 1 / y, t) == pytest.approx(math.sqrt(y) * theta(2, y, t), rel=1e-12, abs=1e-300)


@given(st.floats(min_value=0.05, max_value=20))
@settings(max_examples=60, deadline=None)
def test_modular_quantities_relations(y):
    mq = modular_quantities(y)
    assert mq.k**2 + mq.kprime**2 == pytest.approx(1.0, abs=1e-12)
    # k rounds to 1.0 once kprime^2/2 drops below the double resolution
    assert 0 < mq.k <= 1 and 0 < mq.kprime <= 1
    assert mq.m2 == pytest.approx(1 / (1 + mq.k), abs=1e-12)
    assert mq.m2 == pytest.approx((1 + mq.lprime) / 2, abs=1e-12)
    assert mq.l == pytest.approx(2 * math.sqrt(mq.k) / (1 + mq.k), abs=1e-12)
    assert mq.k == pytest.approx((1 - mq.lprime) / (1 + mq.lprime), abs=1e-12)


def test_modular_quantities_examples():
    mq = modular_quantities(1 / math.sqrt(2))
    assert mq.kprime == pytest.approx(math.sqrt(2) - 1, abs=1e-12)
    mq1 = modular_quantities(1.0)
    assert mq1.k == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    assert mq1.kprime == pytest.approx(1 / math.sqrt(2), abs=1e-12)


def test_k_decreasing_in_y():
    ys = [0.05 * 1.1**i for i in range(60)]
    mqs = [modular_quantities(y) for y in ys]
    # k is read through kprime where k has rounded to 1.0
    for a, b in zip(mqs, mqs[1:]):
        assert a.k > b.k or a.kprime < b.kprime


def test_elliptic_K_basic():
    assert elliptic_K(0.0) == pytest.approx(math.pi / 2, rel=1e-15)
    with pytest.raises(ValueError):
        elliptic_K(1.0)
    with pytest.raises(ValueError):
        elliptic_K(-0.1)


@pytest.mark.parametrize("k", [0.1, 0.5, 0.9])
def test_elliptic_K_against_quadrature(k):
    # substitute t = sin(phi) to remove the endpoint singularity
    val, _ = quad(lambda p: 1 / math.sqrt(1 - (k * math.sin(p)) ** 2), 0, math.pi / 2, epsabs=1e-13, epsrel=1e-13)
    assert elliptic_K(k) == pytest.approx(val, abs=1e-10)
    assert elliptic_K(k) == pytest.approx(K_ORACLE[k], rel=1e-14)


def test_K_ratio_special_value():
    k = math.sqrt(2) - 1
    assert elliptic_K_prime(k) / elliptic_K(k) == pytest.approx(math.sqrt(2), abs=1e-12)


@pytest.mark.parametrize("y", [0.5, 1.0, 2.0, 0.1, 6.0])
def test_nome_ratio_equals_minus_log_q(y):
    assert nome_ratio(y) == pytest.approx(math.pi * y, abs=1e-10)


def test_agm_symmetric_and_fixed():
    assert agm(1.0, 1.0) == 1.0
    assert agm(1.0, 0.5) == pytest.approx(agm(0.5, 1.0), rel=1e-15)


@pytest.mark.parametrize("y", [0.05, 0.4, 1.0, 3.0, 20.0])
def test_theta_excess_consistent_with_theta(y):
    q = math.exp(-math.pi * y)
    assert 1 + theta_excess(3, y, 1).value == pytest.approx(theta(3, y), abs=3e-13)
    assert 1 - 2 * q + theta_excess(4, y, 2).value == pytest.approx(theta(4, y), abs=3e-13)
    assert theta_excess(2, y, 0).value == pytest.approx(theta(2, y), abs=3e-13)


def test_theta_excess_keeps_relative_precision():
    y = 20.0
    q = math.exp(-math.pi * y)
    cv = theta_excess(4, y, 2)
    assert cv.value == pytest.approx(2 * q**4, rel=1e-12)
    assert cv.err_bound < 1e-12 * cv.value
