import math
from fractions import Fraction

import pytest

from modsecrecy.lattice import theta_coeffs
from modsecrecy.mod2 import (
    BETA,
    BETA_UP,
    EVEN_ROWS,
    ODD_ROWS,
    PEAK_Y,
    TABLE,
    NotRepresentableError,
    QSqrt2,
    TwoModularPoly,
    alpha,
    basis,
    conjecture_verdict,
    delta4_series,
    f1_series,
    f2_eval,
    f2_series,
    fit_f2_polynomial,
    negativity_certificate,
    synthesize,
    verdict_json,
    xi2_from_poly,
)
from modsecrecy.secrecy import SecrecyCurve
from modsecrecy.series import RationalPoly, series_mul, series_pow, theta_qseries

D4 = "gram([2,-1,0,0; -1,2,-1,-1; 0,-1,2,0; 0,-1,0,2])"
SQRT2 = math.sqrt(2)


def test_beta_constant():
    assert (BETA.p, BETA.q, BETA.r) == (3, -2, 4)
    assert 0.0428 < BETA.value < 0.0430
    assert BETA.value == pytest.approx((3 - 2 * SQRT2) / 4, abs=1e-16)
    assert (BETA.exact - BETA_UP).sign() < 0


def test_qsqrt2_sign_is_exact():
    assert QSqrt2(Fraction(-1), Fraction(1)).sign() == 1  # sqrt2 - 1
    assert QSqrt2(Fraction(3), Fraction(-2)).sign() == 1  # 3 - 2 sqrt2 > 0
    assert QSqrt2(Fraction(-3), Fraction(2)).sign() == -1
    assert QSqrt2(Fraction(0), Fraction(0)).sign() == 0
    # 99/70 is just above sqrt2
    assert QSqrt2(Fraction(99, 70), Fraction(-1)).sign() == 1


def test_f2_series_leading_terms():
    s = f2_series(6)
    assert s[0] == 0 and s[1] == 1 and s[2] == -8


def test_f2_series_is_theta_quotient():
    n = 30
    t2, t3, t4 = (theta_qseries(k, n) for k in (2, 3, 4))
    from modsecrecy.series import compose_scale, series_div
    num = series_mul(series_pow(compose_scale(t2, 2), 2), series_pow(t4, 2))
    den = series_mul(series_pow(t3, 2), series_pow(compose_scale(t3, 2), 2)).scale(4)
    assert series_div(num, den).agrees_with(f2_series(n))


def test_f2_at_peak_is_beta():
    assert f2_eval(PEAK_Y).value == pytest.approx(BETA.value, abs=1e-13)


def test_f2_large_y():
    q = math.exp(-10 * math.pi)
    v = f2_eval(10.0).value
    assert v < 3e-14
    assert v == pytest.approx(q * (1 - 8 * q), rel=1e-12)


def test_f2_alpha_form():
    for y in (0.2, 0.9, 2.0):
        a = alpha(y)
        assert f2_eval(y).value == pytest.approx((1 - a) * a / (4 * (1 + a)), rel=1e-12)


def test_f2_range():
    ys = [0.05 * (400 ** (i / 199)) for i in range(200)]
    vals = [f2_eval(y).value for y in ys]
    assert all(0 < v <= BETA.value + 1e-13 for v in vals)
    near = [y for y, v in zip(ys, vals) if v > BETA.value - 1e-10]
    assert all(abs(y - PEAK_Y) < 0.02 for y in near)


def test_f1_is_c2_theta():
    assert f1_series(30).agrees_with(theta_coeffs("Z + sqrt(2)*Z", 29).to_qseries())


def test_basis_valuations():
    for i, b in enumerate(basis(7, 10)):
        assert b.valuation == i
        assert b[i] == 1


def test_fit_c2_and_d4():
    assert fit_f2_polynomial(theta_coeffs("Z + sqrt(2)*Z", 10), 1).poly == RationalPoly([1])
    assert fit_f2_polynomial(theta_coeffs(D4, 10), 2).poly == RationalPoly([1, -4])


def test_fit_rejects_non_2_modular():
    with pytest.raises(NotRepresentableError):
        fit_f2_polynomial(theta_coeffs("Z^2", 10), 1)


def test_fit_needs_enough_terms():
    with pytest.raises(ValueError):
        fit_f2_polynomial(theta_coeffs(D4, 1), 4)


@pytest.mark.parametrize("name", ODD_ROWS + EVEN_ROWS)
def test_round_trip_and_integrality(name):
    p = TABLE[name]
    s = synthesize(p, 21)
    assert fit_f2_polynomial(s, p.k, name).poly == p.poly
    coeffs = [s[i] for i in range(21)]
    assert all(c.denominator == 1 and c >= 0 for c in coeffs)
    assert coeffs[0] == 1
    assert all(e.denominator == 1 for e in s.coefficients())


def test_dim22_synthesis_round_trip():
    p = TABLE["dim22"]
    assert p.poly == RationalPoly([1, -22, 66, -4])
    assert fit_f2_polynomial(synthesize(p, 10), 11).poly == p.poly


def test_table_layout():
    assert len(ODD_ROWS) == 10 and EVEN_ROWS == ["d4", "bw16", "hs20"]
    assert {TABLE[n].source for n in EVEN_ROWS} == {"converted-even"}
    for p in TABLE.values():
        assert p.coeffs[0] == 1
        assert p.poly.degree <= p.k // 2


def test_known_derivatives():
    assert TABLE["dim8"].poly.derivative() == RationalPoly([-8])
    assert TABLE["bw16"].poly.derivative() == RationalPoly([-16, 0, -768, 1024])
    assert TABLE["hs20"].poly.derivative() == RationalPoly([-20, 80, -480, 5120, -5120])


@pytest.mark.parametrize("name", ODD_ROWS + EVEN_ROWS)
def test_every_row_certified(name):
    res = negativity_certificate(TABLE[name])
    assert res.certified
    assert res.certificate.root_count == 0
    assert res.certificate.endpoint_sign == -1
    assert res.certificate.hi == BETA_UP
    assert res.value_at_end_positive
    assert conjecture_verdict(TABLE[name]).verdict == "holds_decreasing"


def test_synthetic_verdicts():
    assert conjecture_verdict(TwoModularPoly(4, [1, 8])).verdict == "fails"
    assert conjecture_verdict(TwoModularPoly(2, [1])).verdict == "holds_global_min"
    # P' has a root at 1/200 (a local max of P); P(beta) is still the minimum
    assert conjecture_verdict(TwoModularPoly(4, [1, 1, -100])).verdict == "holds_global_min"
    # local min of P at 1/100 lies below P(beta)
    assert conjecture_verdict(TwoModularPoly(4, [1, -8, 400])).verdict == "fails"


def test_verdict_json_shape():
    d = verdict_json(TABLE["dim8"])
    assert d == {
        "lattice": "dim8",
        "k": 4,
        "coeffs": ["1", "-8"],
        "verdict": "holds_decreasing",
        "certificate": {"root_count": 0, "interval": ["0", "43/1000"], "endpoint_sign": "-"},
    }


def test_xi2_examples():
    assert xi2_from_poly(TABLE["dim8"], PEAK_Y).value == pytest.approx(1 / (4 * SQRT2 - 5), abs=1e-10)
    assert xi2_from_poly(TABLE["d4"], PEAK_Y).value == pytest.approx(1 / (2 * SQRT2 - 2), abs=1e-10)
    for p in TABLE.values():
        assert xi2_from_poly(p, 40.0).value == pytest.approx(1.0, abs=1e-12)


def test_xi2_rejects_nonpositive_denominator():
    with pytest.raises(ValueError):
        xi2_from_poly(TwoModularPoly(2, [1, -100]), PEAK_Y)


def test_xi2_d4_agrees_with_lattice_curve():
    curve = SecrecyCurve(D4, 2, "modular")
    for y in [0.1 * 1.3**i for i in range(15)]:
        assert xi2_from_poly(TABLE["d4"], y).value == pytest.approx(curve(y), abs=1e-9)


def test_delta4_is_f1_squared_f2():
    n = 15
    assert delta4_series(n).agrees_with(series_mul(series_pow(f1_series(n), 2), f2_series(n)))
