"""2-modular lattices: theta series as polynomials in f2, and the criterion for
the 2-modular secrecy function to peak at ``y = 1/sqrt(2)``.

For a 2-modular lattice of dimension ``n = 2k``::

    Theta = sum_i a_i f1^(k-2i) Delta4^i = f1^k * P(f2),   P(x) = sum_i a_i x^i

with ``f1 = theta_3(y) theta_3(2y)``, ``f2 = theta_2(2y)^2 theta_4(y)^2 / (4 theta_3(y)^2 theta_3(2y)^2)``
and ``Delta4 = f1^2 f2``.  The secrecy function is then ``1/P(f2(y))`` and
``f2`` ranges over ``(0, beta]`` with ``beta = (3 - 2 sqrt 2)/4`` attained only at
``y = 1/sqrt(2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .series import (
    QSeries,
    RationalPoly,
    SturmCertificate,
    compose_scale,
    constant,
    isolate_roots,
    series_div,
    series_mul,
    series_pow,
    sign,
    sturm_chain,
    sturm_root_count,
    sign_variations,
    theta_qseries,
)
from .theta import EPS, CertifiedValue, ToleranceError, _as_y, theta_eval, theta_excess


class NotRepresentableError(ValueError):
    """Series is not of the form sum a_i f1^(k-2i) Delta4^i."""


# ---------------------------------------------------------------------------
# exact arithmetic in Q(sqrt 2), just enough to handle beta


@dataclass(frozen=True)
class QSqrt2:
    a: Fraction
    b: Fraction = Fraction(0)  # value a + b*sqrt(2)

    def __add__(self, o):
        o = _q2(o)
        return QSqrt2(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return QSqrt2(-self.a, -self.b)

    def __sub__(self, o):
        return self + (-_q2(o))

    def __rsub__(self, o):
        return _q2(o) - self

    def __mul__(self, o):
        o = _q2(o)
        return QSqrt2(self.a * o.a + 2 * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def sign(self) -> int:
        # sign of a + b*sqrt2 without floating point
        sa, sb = sign(self.a), sign(self.b)
        if sa == sb or sb == 0:
            return sa
        if sa == 0:
            return sb
        return sa if self.a * self.a > 2 * self.b * self.b else (sb if self.a * self.a < 2 * self.b * self.b else 0)

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(2.0)


def _q2(x) -> QSqrt2:
    return x if isinstance(x, QSqrt2) else QSqrt2(Fraction(x))


@dataclass(frozen=True)
class BetaConstant:
    """``(p + q sqrt 2) / r``."""

    p: int = 3
    q: int = -2
    r: int = 4

    @property
    def exact(self) -> QSqrt2:
        return QSqrt2(Fraction(self.p, self.r), Fraction(self.q, self.r))

    @property
    def value(self) -> float:
        return float(self.exact)


BETA = BetaConstant()
BETA_UP = Fraction(43, 1000)
PEAK_Y = 1.0 / math.sqrt(2.0)


# ---------------------------------------------------------------------------
# f1, f2, Delta4


def f1_series(order) -> QSeries:
    t3 = theta_qseries(3, order)
    return series_mul(t3, compose_scale(t3, 2)).truncate(order)


def f2_series(order) -> QSeries:
    t2 = theta_qseries(2, order)
    t3 = theta_qseries(3, order)
    t4 = theta_qseries(4, order)
    t2x2, t3x2 = compose_scale(t2, 2), compose_scale(t3, 2)
    num = series_mul(series_pow(t2x2, 2), series_pow(t4, 2))
    den = series_mul(series_pow(t3, 2), series_pow(t3x2, 2)).scale(4)
    return series_div(num, den).truncate(order)


def delta4_series(order) -> QSeries:
    return series_mul(series_pow(f1_series(order), 2), f2_series(order)).truncate(order)


def f2_eval(point, tol: float = 1e-13) -> CertifiedValue:
    """``f2(y) = (1 - a) a / (4 (1 + a))`` with ``a = theta_4^2/theta_3^2``.

    ``1 - a`` is formed from ``theta_3 - theta_4`` directly, so ``f2`` keeps
    its relative precision as ``y`` grows (where ``a -> 1``).
    """
    y = _as_y(point)
    if y >= 1.0:
        d3, d4 = theta_excess(3, y, 1), theta_excess(4, y, 1)
        t3, t4 = 1.0 + d3.value, 1.0 + d4.value
        e3 = d3.err_bound + EPS * t3
        e4 = d4.err_bound + EPS * t4
        diff = d3.value - d4.value
        ed = d3.err_bound + d4.err_bound + EPS * diff
    else:
        ttol = 1e-14 * 1.1 / math.sqrt(y)
        c3, c4 = theta_eval(3, y, ttol), theta_eval(4, y, ttol)
        t3, t4, e3, e4 = c3.value, c4.value, c3.err_bound, c4.err_bound
        diff = t3 - t4
        ed = e3 + e4 + EPS * t3
    a = (t4 / t3) ** 2
    one_minus_a = diff * (t3 + t4) / (t3 * t3)
    rel_a = 2 * (e4 / t4 + e3 / (t3 - e3))
    rel_1ma = ed / diff + (e3 + e4) / (t3 + t4) + 2 * e3 / (t3 - e3)
    f = one_minus_a * a / (4 * (1 + a))
    # d log f / d log a contributes at most rel_a
    err = f * (rel_1ma + rel_a) * 1.01 + 16 * EPS * f
    if err > tol:
        raise ToleranceError(f"f2({y}) not certified to {tol:g}")
    return CertifiedValue(f, err)


def alpha(point) -> float:
    y = _as_y(point)
    return (theta_eval(4, y).value / theta_eval(3, y).value) ** 2


# ---------------------------------------------------------------------------
# polynomials


@dataclass(frozen=True)
class TwoModularPoly:
    k: int
    poly: RationalPoly
    source: str = "fitted-from-theta"
    name: str = ""

    def __post_init__(self):
        if not isinstance(self.poly, RationalPoly):
            object.__setattr__(self, "poly", RationalPoly(self.poly))

    @property
    def coeffs(self) -> tuple:
        return self.poly.coeffs

    @property
    def dimension(self) -> int:
        return 2 * self.k

    def to_dict(self) -> dict:
        return {"lattice": self.name, "k": self.k, "coeffs": self.poly.to_strings(), "source": self.source}


def _p(*coeffs) -> RationalPoly:
    return RationalPoly(coeffs)


# Odd 2-modular lattices (dims 8-30) from Lin, Oggier and Sole's table of
# 2-modular wiretap lattices, after factoring out f1^(n/2); and the even
# lattices D4, BW16, HS20 converted from their Theta_D4 / Delta16 expressions.
_ROWS = [
    ("dim8", 4, _p(1, -8)),
    ("dim12", 6, _p(1, -12)),
    ("dim16", 8, _p(1, -16)),
    ("dim18", 9, _p(1, -18, 18)),
    ("dim20", 10, _p(1, -20, 40)),
    ("dim22", 11, _p(1, -22, 66, -4)),
    ("dim24", 12, _p(1, -24, 96, -28)),
    ("dim26", 13, _p(1, -26, 130, -80)),
    ("dim28", 14, _p(1, -28, 168, -176, 32)),
    ("dim30", 15, _p(1, -30, 210, -282, 112)),
]
_EVEN = [
    ("d4", 2, _p(1, -4)),
    ("bw16", 8, _p(1, -16, 0, -256, 256)),
    ("hs20", 10, _p(1, -20, 40, -160, 1280, -1024)),
]
TABLE_VERSION = "1"
TABLE = {name: TwoModularPoly(k, p, "published-table", name) for name, k, p in _ROWS}
TABLE.update({name: TwoModularPoly(k, p, "converted-even", name) for name, k, p in _EVEN})
ODD_ROWS = [r[0] for r in _ROWS]
EVEN_ROWS = [r[0] for r in _EVEN]


def basis(k: int, order) -> list:
    """``[f1^(k-2i) Delta4^i for i = 0..k//2]`` truncated at ``order``."""
    f1 = f1_series(order)
    d4 = delta4_series(order)
    return [series_mul(series_pow(f1, k - 2 * i), series_pow(d4, i)).truncate(order) for i in range(k // 2 + 1)]


def synthesize(p: TwoModularPoly, order) -> QSeries:
    """Theta series ``sum_i a_i f1^(k-2i) Delta4^i``."""
    if p.poly.degree > p.k // 2:
        raise ValueError("polynomial degree exceeds k//2")
    out = constant(0, order)
    for a, b in zip(p.coeffs, basis(p.k, order)):
        if a:
            out = out + b.scale(a)
    return out


def fit_f2_polynomial(theta, k: int, name: str = "") -> TwoModularPoly:
    """Recover ``a_0..a_{k//2}`` from an exact theta series (triangular solve over Q).

    ``theta`` is a :class:`QSeries` or anything with ``to_qseries()``.  All
    coefficients in the known range must match, otherwise
    :class:`NotRepresentableError` is raised.
    """
    if hasattr(theta, "to_qseries"):
        theta = theta.to_qseries()
    m = k // 2
    order = theta.order
    if order < m + 1:
        raise ValueError(f"theta must be known through q^{m} (order >= {m + 1})")
    b = basis(k, order)
    a = []
    resid = theta
    for i in range(m + 1):
        # basis i has valuation i with leading coefficient 1
        c = resid[i]
        a.append(c)
        if c:
            resid = resid - b[i].scale(c)
    if any(resid.coefficients().values()):
        bad = min(resid.coefficients())
        raise NotRepresentableError(f"residual coefficient at q^{bad} is {resid[bad]}; not a 2-modular theta series")
    return TwoModularPoly(k, RationalPoly(a), "fitted-from-theta", name)


# ---------------------------------------------------------------------------
# certificates and verdicts


@dataclass(frozen=True)
class NegativityResult:
    certificate: SturmCertificate | None
    value_at_end_positive: bool

    @property
    def certified(self) -> bool:
        c = self.certificate
        return c is not None and c.root_count == 0 and c.endpoint_sign < 0 and self.value_at_end_positive


def negativity_certificate(p: TwoModularPoly, hi: Fraction = BETA_UP) -> NegativityResult:
    """Certify ``P' < 0`` on ``(0, hi]`` (no roots there, negative at ``hi``) and ``P(hi) > 0``."""
    d = p.poly.derivative()
    cert = None if d.is_zero() else sturm_root_count(d, 0, hi)
    return NegativityResult(cert, p.poly(hi) > 0)


def _eval_q2(poly: RationalPoly, x: QSqrt2) -> QSqrt2:
    acc = QSqrt2(Fraction(0))
    for c in reversed(poly.coeffs):
        acc = acc * x + c
    return acc


def _interval_eval(poly: RationalPoly, a: Fraction, b: Fraction):
    """Rational enclosure of ``poly`` over ``[a, b]`` (Horner in interval arithmetic)."""
    lo = hi = Fraction(0)
    for c in reversed(poly.coeffs):
        prods = (lo * a, lo * b, hi * a, hi * b)
        lo, hi = min(prods) + c, max(prods) + c
    return lo, hi


def _below_beta(x: Fraction) -> int:
    """sign(beta - x)."""
    return (BETA.exact - x).sign()


VERDICTS = ("holds_decreasing", "holds_global_min", "fails", "inconclusive")


@dataclass(frozen=True)
class Verdict:
    verdict: str
    negativity: NegativityResult
    detail: str = ""


def conjecture_verdict(p: TwoModularPoly, max_refine: int = 200) -> Verdict:
    """Decide whether ``P`` restricted to ``(0, beta]`` has its global minimum at ``beta``."""
    neg = negativity_certificate(p)
    if neg.certified:
        return Verdict("holds_decreasing", neg, "P' < 0 on (0, 43/1000]")
    poly = p.poly
    pb = _eval_q2(poly, BETA.exact)
    # P(0) is the limit at the open end of (0, beta]
    if (pb - poly(Fraction(0))).sign() > 0:
        return Verdict("fails", neg, "P(0+) < P(beta)")
    d = poly.derivative()
    if d.is_zero():
        return Verdict("holds_global_min", neg, "P is constant")
    chain = sturm_chain(d)
    d_at_beta_zero = _eval_q2(d, BETA.exact).sign() == 0
    undecided = False
    for a, b in isolate_roots(d, 0, BETA_UP, Fraction(1, 10**4)):
        # push the isolating interval to one side of beta
        for _ in range(max_refine):
            sa, sb = _below_beta(a), _below_beta(b)
            if sb > 0 or sa <= 0:
                break
            m = (a + b) / 2
            if sign_variations(chain, a) - sign_variations(chain, m) == 1:
                b = m
            else:
                a = m
        if _below_beta(a) <= 0:
            continue  # root at or beyond beta
        if _below_beta(b) <= 0:
            if d_at_beta_zero:
                continue
            undecided = True
            continue
        for _ in range(max_refine):
            lo, hi = _interval_eval(poly, a, b)
            if (pb - lo).sign() < 0:
                break  # P(c) > P(beta)
            if (pb - hi).sign() > 0:
                return Verdict("fails", neg, f"critical point in ({a}, {b}] has P below P(beta)")
            m = (a + b) / 2
            if sign_variations(chain, a) - sign_variations(chain, m) == 1:
                b = m
            else:
                a = m
        else:
            undecided = True
    if undecided:
        return Verdict("inconclusive", neg, "could not separate a critical value from P(beta)")
    return Verdict("holds_global_min", neg, "P(beta) <= P at 0+ and at every critical point")


def verdict_json(p: TwoModularPoly, v: Verdict | None = None) -> dict:
    v = v or conjecture_verdict(p)
    cert = v.negativity.certificate
    return {
        "lattice": p.name,
        "k": p.k,
        "coeffs": p.poly.to_strings(),
        "verdict": v.verdict,
        "certificate": cert.to_dict() if cert else None,
    }


def xi2_from_poly(p: TwoModularPoly, point, tol: float = 1e-10) -> CertifiedValue:
    """``Xi_2(y) = 1 / P(f2(y))``."""
    f = f2_eval(point)
    x = f.value
    den = float(sum(float(c) * x**i for i, c in enumerate(p.coeffs)))
    # |P(x') - P(x)| <= max|P'| * |x' - x| on [0, x + err]
    xm = x + f.err_bound
    slope = sum(abs(float(c)) * i * xm ** (i - 1) for i, c in enumerate(p.coeffs) if i)
    den_err = slope * f.err_bound + 4 * len(p.coeffs) * EPS * sum(abs(float(c)) * xm**i for i, c in enumerate(p.coeffs))
    if den <= den_err:
        raise ValueError(f"P(f2) = {den:g} is not positive; invalid theta polynomial")
    v = 1.0 / den
    err = den_err / (den * (den - den_err)) + 2 * EPS * v
    if err > tol:
        raise ToleranceError(f"Xi_2 not certified to {tol:g}")
    return CertifiedValue(v, err)


@dataclass(frozen=True)
class PolyCurve:
    """Secrecy function of a 2-modular lattice known through its f2-polynomial."""

    poly: TwoModularPoly
    l: int = 2

    @property
    def center(self) -> float:
        return PEAK_Y

    def evaluate(self, y: float, tol: float = 1e-10) -> CertifiedValue:
        return xi2_from_poly(self.poly, y, tol)

    def __call__(self, y: float) -> float:
        return self.evaluate(y).value
