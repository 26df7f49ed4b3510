import math

import pytest
from hypothesis import given, settings, strategies as st

from modsecrecy.mod2 import TABLE, PolyCurve
from modsecrecy.secrecy import SecrecyCurve, golden_section, scan_extremum, symmetry_residual
from modsecrecy.theta import theta

C4 = "Z + sqrt(2)*Z + 2*Z"
D2 = "Z + sqrt(2)*Z"
D4 = "gram([2,-1,0,0; -1,2,-1,-1; 0,-1,2,0; 0,-1,0,2])"
SQRT2 = math.sqrt(2)

# direct theta evaluation (mpmath, 30 digits) at y = 1/2
C4_CLASSIC_AT_HALF = 2 * SQRT2 - 2
C4_MODULAR_AT_HALF = (0.75 + SQRT2 / 2) ** 0.25


def test_cubic_lattice_is_flat():
    curve = SecrecyCurve("Z^4", 1, "classic")
    for y in (0.1, 1.0, 7.0):
        assert curve(y) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("l", [1, 2, 3, 5])
def test_dl_is_flat_under_modular_variant(l):
    spec = "Z" if l == 1 else f"Z + sqrt({l})*Z"
    curve = SecrecyCurve(spec, l, "modular")
    for y in (0.2, 1.0, 3.0):
        assert curve(y) == pytest.approx(1.0, abs=1e-12)


def test_c4_values_at_half():
    assert SecrecyCurve(C4, 4, "classic")(0.5) == pytest.approx(C4_CLASSIC_AT_HALF, abs=1e-12)
    assert SecrecyCurve(C4, 4, "modular")(0.5) == pytest.approx(C4_MODULAR_AT_HALF, abs=1e-12)


@pytest.mark.parametrize("y", [0.07, 0.3, 0.5, 1.1, 4.0])
def test_c4_closed_forms(y):
    classic = SecrecyCurve(C4, 4, "classic")(y)
    modular = SecrecyCurve(C4, 4, "modular")(y)
    t1, t2, t4 = theta(3, y), theta(3, 2 * y), theta(3, 4 * y)
    assert 1 / classic == pytest.approx(t1 * t4 / t2**2, abs=1e-12)
    assert modular**2 * classic == pytest.approx(1.0, abs=1e-10)


def test_half_integral_k():
    assert SecrecyCurve(C4, 4, "modular").k == 1.5
    assert SecrecyCurve("Z^3", 1, "modular").k == 3


def test_bad_curves():
    with pytest.raises(ValueError):
        SecrecyCurve(C4, 4, "other")
    with pytest.raises(ValueError):
        SecrecyCurve(C4, 0)


def test_symmetry_examples():
    assert symmetry_residual(SecrecyCurve(C4, 4, "modular"), 0.3) < 1e-10
    assert symmetry_residual(SecrecyCurve(D2, 2, "modular"), 5.0) < 1e-10
    assert symmetry_residual(SecrecyCurve(C4, 4, "modular"), 0.5) == 0.0
    assert symmetry_residual(SecrecyCurve(D4, 2, "modular"), 1 / SQRT2) == 0.0


@given(st.floats(min_value=0.1, max_value=10))
@settings(max_examples=30, deadline=None)
def test_symmetry_d4(a):
    assert symmetry_residual(SecrecyCurve(D4, 2, "modular"), a) <= 1e-10


def test_scan_c4_classic_minimum():
    rep = scan_extremum(SecrecyCurve(C4, 4, "classic"), 0.05, 5, grid_points=64, refine_tol=1e-8)
    assert rep.kind == "min"
    assert rep.location == pytest.approx(0.5, abs=1e-6)
    assert rep.bracket_width <= 1e-8
    dirs = [d for _, d in rep.monotone_segments if d != "0"]
    assert dirs == ["-", "+"]


def test_scan_c4_modular_maximum():
    rep = scan_extremum(SecrecyCurve(C4, 4, "modular"), 0.05, 5, grid_points=64, refine_tol=1e-8)
    assert rep.kind == "max"
    assert rep.location == pytest.approx(0.5, abs=1e-6)
    assert rep.value == pytest.approx(C4_MODULAR_AT_HALF, abs=1e-12)


def test_c4_direction_on_grid():
    curve = SecrecyCurve(C4, 4, "classic")
    left = [0.05 * 1.2**i for i in range(13)]  # up to ~0.45
    right = [0.55 * 1.2**i for i in range(13)]
    assert all(curve(a) > curve(b) for a, b in zip(left, left[1:]))
    assert all(curve(a) < curve(b) for a, b in zip(right, right[1:]))


def test_scan_dim22_polynomial_curve():
    rep = scan_extremum(PolyCurve(TABLE["dim22"]), 0.1, 5, grid_points=64, refine_tol=1e-9)
    assert rep.kind == "max"
    assert rep.location == pytest.approx(1 / SQRT2, abs=1e-6)


def test_scan_invariant_under_grid_doubling():
    curve = SecrecyCurve(C4, 4, "modular")
    a = scan_extremum(curve, 0.05, 5, grid_points=40, refine_tol=1e-7)
    b = scan_extremum(curve, 0.05, 5, grid_points=80, refine_tol=1e-7)
    assert abs(a.location - b.location) <= 2e-7


def test_scan_monotone_function():
    rep = scan_extremum(lambda y: math.exp(-y), 0.1, 5, grid_points=32)
    assert rep.kind == "monotone"
    assert rep.location is None
    assert [d for _, d in rep.monotone_segments] == ["-"]


def test_scan_argument_checks():
    with pytest.raises(ValueError):
        scan_extremum(lambda y: y, 1, 0.5)
    with pytest.raises(ValueError):
        scan_extremum(lambda y: y, 0.1, 1, grid_points=8)


def test_tie_prefers_center():
    # three bumps of equal height, each centred on a grid point
    centres = (-0.6 * math.log(10), 0.0, 0.6 * math.log(10))

    def f(y):
        t = math.log(y)
        return max(math.exp(-40 * (t - c) ** 2) for c in centres)
    rep = scan_extremum(f, 0.1, 10, grid_points=101, refine_tol=1e-8, center=1.0)
    assert rep.ambiguous
    assert rep.location == pytest.approx(1.0, abs=1e-6)


def test_golden_section_parabola():
    a, b = golden_section(lambda x: (x - 0.3) ** 2, 0, 1, 1e-9)
    assert (a + b) / 2 == pytest.approx(0.3, abs=1e-8)
    a, b = golden_section(lambda x: -((x - 0.7) ** 2), 0, 1, 1e-9, maximize=True)
    assert (a + b) / 2 == pytest.approx(0.7, abs=1e-8)


def test_report_dict_roundtrips_json():
    import json
    rep = scan_extremum(SecrecyCurve(D4, 2, "modular"), 0.1, 5, grid_points=32)
    d = json.loads(json.dumps(rep.to_dict()))
    assert d["kind"] == "max"
    assert d["location"] == pytest.approx(1 / SQRT2, abs=1e-6)
