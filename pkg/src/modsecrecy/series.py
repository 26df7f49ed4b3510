"""Exact q-series on the quarter-integer exponent grid, rational polynomials,
and Sturm-sequence root counting.

Everything here is exact (``fractions.Fraction``); there is no floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

GRID = 4  # exponents live on (1/GRID) * Z


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _to_index(exponent) -> int:
    e = _frac(exponent) * GRID
    if e.denominator != 1:
        raise ValueError(f"exponent {exponent} is not on the 1/{GRID} grid")
    return int(e)


class QSeries:
    """Truncated formal series ``sum c_e q^e`` with ``e`` in ``(1/4) Z``, ``e >= 0``.

    Coefficients are stored densely, indexed by ``4*e``.  ``order`` is the
    exclusive truncation bound: coefficients at exponents ``>= order`` are
    unknown and never reported.
    """

    __slots__ = ("_c", "_prec")

    def __init__(self, coeffs: dict | None = None, order=0):
        prec = _to_index(order)
        if prec < 0:
            raise ValueError("order must be nonnegative")
        c = [Fraction(0)] * prec
        for e, v in (coeffs or {}).items():
            i = _to_index(e)
            if i < 0:
                raise ValueError("negative exponents are not supported")
            if i < prec:
                c[i] += _frac(v)
        self._c = c
        self._prec = prec

    @classmethod
    def _raw(cls, c: list, prec: int) -> "QSeries":
        s = cls.__new__(cls)
        s._c = c[:prec] + [Fraction(0)] * (prec - len(c))
        s._prec = prec
        return s

    @property
    def order(self) -> Fraction:
        return Fraction(self._prec, GRID)

    def __getitem__(self, exponent) -> Fraction:
        i = _to_index(exponent)
        if i >= self._prec:
            raise IndexError(f"coefficient at q^{exponent} is beyond the truncation order {self.order}")
        return self._c[i] if i >= 0 else Fraction(0)

    def coefficients(self) -> dict:
        """Nonzero coefficients as ``{exponent: value}``."""
        return {Fraction(i, GRID): v for i, v in enumerate(self._c) if v}

    def integer_coefficients(self) -> list:
        """Coefficients at exponents ``0, 1, ..., ceil(order)-1``; the grid must be integral."""
        out = []
        for i, v in enumerate(self._c):
            if i % GRID:
                if v:
                    raise ValueError("series has non-integral exponents")
            else:
                out.append(v)
        return out

    @property
    def valuation(self):
        for i, v in enumerate(self._c):
            if v:
                return Fraction(i, GRID)
        return None

    def _val_idx(self) -> int:
        for i, v in enumerate(self._c):
            if v:
                return i
        return self._prec

    def truncate(self, order) -> "QSeries":
        return QSeries._raw(self._c, min(self._prec, _to_index(order)))

    def __eq__(self, other) -> bool:
        if isinstance(other, QSeries):
            return self._prec == other._prec and self._c == other._c
        return NotImplemented

    def agrees_with(self, other: "QSeries") -> bool:
        """Equality on the common known range."""
        p = min(self._prec, other._prec)
        return self._c[:p] == other._c[:p]

    def __repr__(self) -> str:
        terms = []
        for e, v in self.coefficients().items():
            exp = "" if e == 0 else ("q" if e == 1 else f"q^{e}")
            terms.append(f"{v}{'*' if exp else ''}{exp}")
        body = " + ".join(terms) or "0"
        return f"QSeries({body} + O(q^{self.order}))"

    # arithmetic

    def _coerce(self, other) -> "QSeries":
        if isinstance(other, QSeries):
            return other
        if isinstance(other, (int, Fraction)):
            return constant(other, self.order)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        p = min(self._prec, other._prec)
        return QSeries._raw([a + b for a, b in zip(self._c[:p], other._c[:p])], p)

    __radd__ = __add__

    def __neg__(self):
        return QSeries._raw([-a for a in self._c], self._prec)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "QSeries":
        c = _frac(c)
        return QSeries._raw([c * a for a in self._c], self._prec)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, QSeries):
            return NotImplemented
        return series_mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        return series_pow(self, n)


def constant(c, order) -> QSeries:
    return QSeries({0: c}, order)


def series_mul(a: QSeries, b: QSeries) -> QSeries:
    va, vb = a._val_idx(), b._val_idx()
    prec = min(va + b._prec, vb + a._prec)
    out = [Fraction(0)] * prec
    bnz = [(j, y) for j, y in enumerate(b._c) if y]
    for i, x in enumerate(a._c):
        if not x or i >= prec:
            continue
        for j, y in bnz:
            if i + j >= prec:
                break
            out[i + j] += x * y
    return QSeries._raw(out, prec)


def series_pow(a: QSeries, n: int) -> QSeries:
    if n < 0:
        return series_pow(series_invert(a), -n)
    result = constant(1, a.order)
    base = a
    while n:
        if n & 1:
            result = series_mul(result, base)
        n >>= 1
        if n:
            base = series_mul(base, base)
    return result


def series_invert(a: QSeries) -> QSeries:
    """Multiplicative inverse; ``a`` must have a nonzero constant term."""
    if a._prec == 0 or a._c[0] == 0:
        raise ZeroDivisionError("series_invert needs a nonzero constant term")
    c0 = a._c[0]
    prec = a._prec
    inv = [Fraction(0)] * prec
    inv[0] = 1 / c0
    anz = [(j, x) for j, x in enumerate(a._c) if x and j > 0]
    for n in range(1, prec):
        s = Fraction(0)
        for j, x in anz:
            if j > n:
                break
            s += x * inv[n - j]
        inv[n] = -s / c0
    return QSeries._raw(inv, prec)


def series_div(a: QSeries, b: QSeries) -> QSeries:
    return series_mul(a, series_invert(b))


def compose_scale(a: QSeries, m: int) -> QSeries:
    """Substitute ``q -> q^m`` (i.e. ``y -> m*y``) for a positive integer ``m``."""
    if not isinstance(m, int) or m < 1:
        raise ValueError("compose_scale needs a positive integer scale")
    prec = a._prec * m
    out = [Fraction(0)] * prec
    for i, v in enumerate(a._c):
        out[i * m] = v
    return QSeries._raw(out, prec)


def theta_qseries(kind: int, order) -> QSeries:
    """Exact expansion of theta_2, theta_3 or theta_4 through ``q^order`` (exclusive)."""
    if kind not in (2, 3, 4):
        raise ValueError("theta kind must be 2, 3 or 4")
    order = _frac(order)
    if order <= 0:
        raise ValueError("order must be positive")
    prec = _to_index(order) if (order * GRID).denominator == 1 else int(order * GRID) + 1
    c = [Fraction(0)] * prec
    if kind == 2:
        # (n + 1/2)^2 = (2n+1)^2 / 4  -> index (2n+1)^2
        n = 0
        while (2 * n + 1) ** 2 < prec:
            c[(2 * n + 1) ** 2] += 2
            n += 1
    else:
        c[0] = Fraction(1)
        n = 1
        while GRID * n * n < prec:
            c[GRID * n * n] += 2 if (kind == 3 or n % 2 == 0) else -2
            n += 1
    return QSeries._raw(c, prec)


def scaled_z_series(scale2, order) -> QSeries:
    """Theta series of ``c*Z`` where ``scale2 = c^2``: ``sum_n q^(scale2 * n^2)``."""
    s = _frac(scale2)
    if s <= 0:
        raise ValueError("scale must be positive")
    if (s * GRID).denominator != 1:
        raise ValueError(f"norms {s}*n^2 leave the 1/{GRID} grid")
    prec = _to_index(order)
    c = [Fraction(0)] * prec
    c[0] = Fraction(1)
    step = int(s * GRID)
    n = 1
    while step * n * n < prec:
        c[step * n * n] += 2
        n += 1
    return QSeries._raw(c, prec)


# ---------------------------------------------------------------------------
# Polynomials


class RationalPoly:
    """Univariate polynomial over Q; ``coeffs[i]`` is the coefficient of ``x^i``."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        c = [_frac(v) for v in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs = tuple(c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lead(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __call__(self, x):
        acc = 0 * x if not isinstance(x, (int, Fraction)) else Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "RationalPoly":
        return RationalPoly(i * c for i, c in enumerate(self.coeffs) if i)

    def __eq__(self, other):
        if isinstance(other, RationalPoly):
            return self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __neg__(self):
        return RationalPoly(-c for c in self.coeffs)

    def __add__(self, other):
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return RationalPoly((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return RationalPoly(c * other for c in self.coeffs)
        if not self.coeffs or not other.coeffs:
            return RationalPoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, x in enumerate(self.coeffs):
            for j, y in enumerate(other.coeffs):
                out[i + j] += x * y
        return RationalPoly(out)

    __rmul__ = __mul__

    def divmod(self, other: "RationalPoly"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        quot = [Fraction(0)] * max(len(rem) - dq, 0)
        lead = other.lead
        for k in range(len(rem) - 1 - dq, -1, -1):
            c = rem[k + dq] / lead
            quot[k] = c
            if c:
                for j, d in enumerate(other.coeffs):
                    rem[k + j] -= c * d
        return RationalPoly(quot), RationalPoly(rem[:dq])

    def __repr__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            if mono and abs(c) == 1:
                s = mono
            else:
                s = f"{abs(c)}{'*' if mono else ''}{mono}"
            parts.append(("-" if c < 0 else "+", s))
        head = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        return head + "".join(f" {sg} {s}" for sg, s in parts[1:])

    def to_strings(self) -> list:
        return [str(c) for c in self.coeffs]


def sign(x) -> int:
    return (x > 0) - (x < 0)


def sturm_chain(p: RationalPoly) -> list:
    if p.is_zero():
        raise ValueError("Sturm chain of the zero polynomial")
    chain = [p, p.derivative()]
    while not chain[-1].is_zero():
        _, r = chain[-2].divmod(chain[-1])
        chain.append(-r)
    chain.pop()
    return chain


def sign_variations(chain: Sequence[RationalPoly], x) -> int:
    signs = [s for s in (sign(q(x)) for q in chain) if s]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


@dataclass(frozen=True)
class SturmCertificate:
    polynomial: RationalPoly
    lo: Fraction
    hi: Fraction
    root_count: int
    endpoint_sign: int  # sign of p(hi): +1, -1 or 0

    @property
    def interval(self) -> tuple:
        return (self.lo, self.hi)

    def check(self) -> bool:
        """Recompute the certificate from its own fields."""
        chain = sturm_chain(self.polynomial)
        count = sign_variations(chain, self.lo) - sign_variations(chain, self.hi)
        return count == self.root_count and sign(self.polynomial(self.hi)) == self.endpoint_sign

    def to_dict(self) -> dict:
        return {
            "root_count": self.root_count,
            "interval": [str(self.lo), str(self.hi)],
            "endpoint_sign": {1: "+", -1: "-", 0: "0"}[self.endpoint_sign],
        }


def sturm_root_count(p: RationalPoly, lo, hi) -> SturmCertificate:
    """Number of distinct real roots of ``p`` in the half-open interval ``(lo, hi]``."""
    lo, hi = _frac(lo), _frac(hi)
    if not lo < hi:
        raise ValueError("need lo < hi")
    if p.is_zero():
        raise ValueError("zero polynomial has no finite root count")
    chain = sturm_chain(p)
    count = sign_variations(chain, lo) - sign_variations(chain, hi)
    return SturmCertificate(p, lo, hi, count, sign(p(hi)))


def isolate_roots(p: RationalPoly, lo, hi, width=Fraction(1, 10**6)) -> list:
    """Disjoint intervals ``(a, b]`` inside ``(lo, hi]``, each holding exactly one
    distinct root of ``p``, refined by bisection until ``b - a <= width``."""
    lo, hi, width = _frac(lo), _frac(hi), _frac(width)
    chain = sturm_chain(p)

    def count(a, b):
        return sign_variations(chain, a) - sign_variations(chain, b)

    out = []
    stack = [(lo, hi)]
    while stack:
        a, b = stack.pop()
        n = count(a, b)
        if n == 0:
            continue
        if n == 1 and b - a <= width:
            out.append((a, b))
            continue
        m = (a + b) / 2
        stack.append((m, b))
        stack.append((a, m))
    return sorted(out)
