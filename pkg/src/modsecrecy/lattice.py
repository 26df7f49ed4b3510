"""Lattice specifications, exact theta-series coefficients and numeric theta values.

Spec grammar::

    spec     := term ("+" term)*
    term     := [coef "*"] base ["^" INT]
    base     := "Z" | "gram(" "[" row (";" row)* "]" ")"
    coef     := "sqrt(" RATIONAL ")" | RATIONAL
    row      := RATIONAL ("," RATIONAL)*
    RATIONAL := INT ["/" INT]

``c*Z`` scales lengths by ``c`` (Gram entry ``c^2``); ``base^k`` repeats a summand.
Row entries may carry a leading minus sign.
"""

from __future__ import annotations

import functools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import exact
from .series import GRID, QSeries, scaled_z_series, series_mul
from .theta import EPS, CertifiedValue, ToleranceError, _as_y, theta_eval


class SpecSyntaxError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class LatticeError(ValueError):
    """Invalid lattice data (non-symmetric or non-positive-definite Gram, off-grid norms)."""


@dataclass(frozen=True)
class Summand:
    scale2: Fraction
    block: tuple | None = None  # None means the integer lattice Z

    @property
    def dimension(self) -> int:
        return 1 if self.block is None else len(self.block)

    def gram(self) -> list:
        if self.block is None:
            return [[self.scale2]]
        return [[self.scale2 * v for v in row] for row in self.block]


@dataclass(frozen=True)
class LatticeSpec:
    summands: tuple
    text: str = field(default="", compare=False)

    @property
    def dimension(self) -> int:
        return sum(s.dimension for s in self.summands)

    @functools.cached_property
    def gram(self) -> tuple:
        n = self.dimension
        g = [[Fraction(0)] * n for _ in range(n)]
        off = 0
        for s in self.summands:
            for i, row in enumerate(s.gram()):
                for j, v in enumerate(row):
                    g[off + i][off + j] = v
            off += s.dimension
        return tuple(tuple(r) for r in g)

    @functools.cached_property
    def det(self) -> Fraction:
        return exact.det(self.gram)

    @property
    def volume(self) -> float:
        return math.sqrt(self.det)

    @property
    def is_diagonal_z(self) -> bool:
        return all(s.block is None for s in self.summands)

    @property
    def is_integral(self) -> bool:
        return all(v.denominator == 1 for row in self.gram for v in row)

    def __str__(self) -> str:
        return self.text or f"LatticeSpec(n={self.dimension})"


def gram_spec(matrix) -> LatticeSpec:
    """Spec for a single explicit Gram block."""
    m = exact.to_matrix(matrix)
    _check_block(m)
    return LatticeSpec((Summand(Fraction(1), tuple(tuple(r) for r in m)),))


def _check_block(m) -> None:
    if not exact.is_symmetric(m):
        raise LatticeError("Gram matrix is not symmetric")
    if not exact.is_positive_definite(m):
        raise LatticeError("Gram matrix is not positive definite")


# ---------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.open_parens: list = []

    def error(self, msg: str, at: int | None = None):
        if at is None:
            at = self.pos
            if at >= len(self.text) and self.open_parens:
                at = self.open_parens[-1]
                msg = f"{msg}; unterminated '('"
        raise SpecSyntaxError(msg, at)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self, s: str) -> bool:
        self.skip()
        return self.text.startswith(s, self.pos)

    def expect(self, s: str):
        if not self.peek(s):
            self.error(f"expected {s!r}")
        if s.endswith("("):
            self.open_parens.append(self.pos + len(s) - 1)
        elif s == ")":
            self.open_parens.pop()
        self.pos += len(s)

    def integer(self, signed=False) -> int:
        self.skip()
        start = self.pos
        if signed and self.pos < len(self.text) and self.text[self.pos] in "+-":
            self.pos += 1
        digits = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == digits:
            self.pos = start
            self.error("expected integer")
        return int(self.text[start:self.pos])

    def rational(self, signed=False) -> Fraction:
        start = self.pos
        num = self.integer(signed)
        if self.peek("/"):
            self.pos += 1
            den = self.integer()
            if den == 0:
                self.error("zero denominator", start)
            return Fraction(num, den)
        return Fraction(num)

    def parse(self) -> LatticeSpec:
        summands = list(self.term())
        while self.peek("+"):
            self.pos += 1
            summands.extend(self.term())
        self.skip()
        if self.pos != len(self.text):
            self.error("unexpected input")
        if not summands:
            self.error("empty spec")
        return LatticeSpec(tuple(summands), self.text)

    def term(self):
        self.skip()
        scale2 = Fraction(1)
        if self.peek("sqrt("):
            self.expect("sqrt(")
            at = self.pos
            r = self.rational()
            self.expect(")")
            if r <= 0:
                self.error("scale must be positive", at)
            scale2 = r
            self.expect("*")
        elif self.pos < len(self.text) and self.text[self.pos].isdigit():
            at = self.pos
            r = self.rational()
            if r <= 0:
                self.error("scale must be positive", at)
            scale2 = r * r
            self.expect("*")
        base_at = self.pos
        block = self.base()
        reps = 1
        if self.peek("^"):
            self.pos += 1
            at = self.pos
            reps = self.integer()
            if reps < 1:
                self.error("repeat count must be positive", at)
        if block is not None:
            try:
                _check_block(block)
            except LatticeError as exc:
                raise LatticeError(f"{exc} (block at offset {base_at})") from None
            block = tuple(tuple(r) for r in block)
        return [Summand(scale2, block)] * reps

    def base(self):
        if self.peek("gram("):
            self.expect("gram(")
            rows = self.matrix()
            self.expect(")")
            return rows
        if self.peek("Z"):
            self.pos += 1
            return None
        self.error("expected 'Z' or 'gram('")

    def matrix(self):
        self.expect("[")
        rows = [self.row()]
        while self.peek(";"):
            self.pos += 1
            rows.append(self.row())
        self.expect("]")
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise LatticeError("Gram matrix must be square")
        return rows

    def row(self):
        vals = [self.rational(signed=True)]
        while self.peek(","):
            self.pos += 1
            vals.append(self.rational(signed=True))
        return vals


def parse_spec(text: str) -> LatticeSpec:
    """Parse a lattice spec such as ``"Z + sqrt(2)*Z + 2*Z"``."""
    return _Parser(text).parse()


def parse_matrix(text: str) -> list:
    """Parse a square matrix literal ``[a, b; c, d]`` (optionally wrapped in ``gram(...)``).

    Unlike :func:`parse_spec` no definiteness check is made.
    """
    p = _Parser(text)
    if p.peek("gram("):
        p.expect("gram(")
        rows = p.matrix()
        p.expect(")")
    else:
        rows = p.matrix()
    p.skip()
    if p.pos != len(text):
        p.error("unexpected input")
    return rows


def as_spec(obj) -> LatticeSpec:
    return obj if isinstance(obj, LatticeSpec) else parse_spec(obj)


# ---------------------------------------------------------------------------
# exact enumeration


@dataclass(frozen=True)
class ThetaCoeffs:
    max_norm: Fraction
    counts: dict

    def to_qseries(self) -> QSeries:
        """Exact q-series, known through exponent ``max_norm`` inclusive."""
        order = (self.max_norm * GRID).__floor__() + 1
        return QSeries(self.counts, Fraction(order, GRID))

    def nonzero(self) -> dict:
        return {k: v for k, v in self.counts.items() if v}


def _int_range(c: Fraction, t: Fraction) -> range:
    """Integers ``x`` with ``(x - c)^2 <= t``."""
    if t < 0:
        return range(0)
    s = math.sqrt(float(t))
    lo, hi = math.ceil(float(c) - s), math.floor(float(c) + s)
    while (lo - 1 - c) ** 2 <= t:
        lo -= 1
    while lo <= hi + 1 and (lo - c) ** 2 > t:
        lo += 1
    while (hi + 1 - c) ** 2 <= t:
        hi += 1
    while hi >= lo and (hi - c) ** 2 > t:
        hi -= 1
    return range(lo, hi + 1)


@functools.lru_cache(maxsize=64)
def _enumerate_counts(gram: tuple, max_norm: Fraction) -> tuple:
    """Vector counts by norm for norms ``<= max_norm`` (Fincke-Pohst, exact)."""
    n = len(gram)
    den = math.lcm(*(v.denominator for row in gram for v in row))
    gi = [[int(v * den) for v in row] for row in gram]
    bound = math.floor(max_norm * den)
    fac = exact.ldl(gram)
    if fac is None or any(v <= 0 for v in fac[1]):
        raise LatticeError("Gram matrix is not positive definite")
    L, d = fac
    counts: Counter = Counter()
    x = [0] * n
    bound_q = Fraction(bound, den)
    g00 = gi[0][0]

    def leaf():
        b = sum(gi[0][j] * x[j] for j in range(1, n))
        c = sum(gi[i][j] * x[i] * x[j] for i in range(1, n) for j in range(1, n))
        # g00*x0^2 + 2*b*x0 + c <= bound
        center = Fraction(-b, g00)
        t = Fraction(bound - c, g00) + center * center
        for x0 in _int_range(center, t):
            counts[g00 * x0 * x0 + 2 * b * x0 + c] += 1

    def level(k: int, remaining: Fraction):
        if k == 0:
            leaf()
            return
        center = -sum((L[i][k] * x[i] for i in range(k + 1, n)), Fraction(0))
        for xk in _int_range(center, remaining / d[k]):
            x[k] = xk
            level(k - 1, remaining - d[k] * (xk - center) ** 2)
        x[k] = 0

    level(n - 1, bound_q)
    return tuple(sorted((Fraction(m, den), c) for m, c in counts.items()))


def _check_grid(gram) -> None:
    if any((v * GRID).denominator != 1 for row in gram for v in row):
        raise LatticeError(f"{GRID}*G is not integral; norms would leave the 1/{GRID} grid")


def _block_series(s: Summand, max_norm: Fraction) -> QSeries:
    order = Fraction((max_norm * GRID).__floor__() + 1, GRID)
    if s.block is None:
        return scaled_z_series(s.scale2, order)
    g = tuple(tuple(r) for r in s.gram())
    _check_grid(g)
    return QSeries(dict(_enumerate_counts(g, max_norm)), order)


def theta_coeffs(spec, max_norm, method: str = "enumerate") -> ThetaCoeffs:
    """Exact counts of lattice vectors of each norm ``<= max_norm``.

    ``method="enumerate"`` runs bounded enumeration on the full Gram matrix;
    ``method="product"`` multiplies the per-summand theta series (scaled-Z
    summands in closed form, Gram blocks enumerated separately).
    """
    spec = as_spec(spec)
    max_norm = Fraction(max_norm)
    if max_norm <= 0:
        raise ValueError("max_norm must be positive")
    _check_grid(spec.gram)
    if method == "enumerate":
        counts = dict(_enumerate_counts(spec.gram, max_norm))
    elif method == "product":
        series = None
        for s in spec.summands:
            b = _block_series(s, max_norm)
            series = b if series is None else series_mul(series, b)
        counts = {e: int(v) for e, v in series.coefficients().items() if e <= max_norm}
    else:
        raise ValueError(f"unknown method {method!r}")
    return ThetaCoeffs(max_norm, {k: int(v) for k, v in counts.items()})


# ---------------------------------------------------------------------------
# numeric evaluation


def _gershgorin_lower(g) -> Fraction:
    return min(g[i][i] - sum(abs(g[i][j]) for j in range(len(g)) if j != i) for i in range(len(g)))


@functools.lru_cache(maxsize=64)
def min_eigenvalue_lower_bound(gram: tuple) -> Fraction:
    """A positive rational ``mu`` with ``G - mu*I`` positive definite (certified exactly)."""
    mu = _gershgorin_lower(gram)
    if mu > 0:
        return mu
    lam = float(np.linalg.eigvalsh(np.array(gram, dtype=float)).min())
    mu = Fraction(lam * (1 - 1e-6)).limit_denominator(10**12)
    n = len(gram)
    for _ in range(200):
        if mu > 0:
            shifted = [[gram[i][j] - (mu if i == j else 0) for j in range(n)] for i in range(n)]
            if exact.is_positive_definite(shifted):
                return mu
        mu = mu / 2 if mu > 0 else Fraction(lam / 4).limit_denominator(10**12)
    raise LatticeError("could not certify a positive eigenvalue bound")


def _gram_theta_direct(gram: tuple, y: float, tol: float) -> CertifiedValue:
    n = len(gram)
    mu = min_eigenvalue_lower_bound(gram)
    # sum over Q(v) > M of e^{-pi y Q} <= e^{-pi y M/2} * theta_3(mu*y/2)^n
    t3 = theta_eval(3, float(mu) * y / 2, 1e-6)
    envelope = (t3.value + t3.err_bound) ** n
    need = 2.0 / (math.pi * y) * math.log(max(2 * envelope / tol, 1.0))
    m = max(8, 8 * math.ceil(need / 8))
    counts = _enumerate_counts(gram, Fraction(m))
    total = 0.0
    for norm, c in reversed(counts):
        total += c * math.exp(-math.pi * float(norm) * y)
    tail = math.exp(-math.pi * y * m / 2) * envelope
    err = tail + (len(counts) + 2) * EPS * total
    if err > tol:
        raise ToleranceError(f"Gram theta not certified to {tol:g} (bound {err:g})")
    return CertifiedValue(total, err)


def _gram_theta(gram: tuple, y: float, tol: float) -> CertifiedValue:
    if y >= 1.0:
        return _gram_theta_direct(gram, y, tol)
    # Poisson summation: Theta_G(y) = det(G)^{-1/2} y^{-n/2} Theta_{G^{-1}}(1/y)
    n = len(gram)
    dual = tuple(tuple(r) for r in exact.inverse(gram))
    factor = 1.0 / (math.sqrt(exact.det(gram)) * y ** (n / 2))
    inner = _gram_theta_direct(dual, 1.0 / y, tol / factor / 2)
    value = factor * inner.value
    return CertifiedValue(value, factor * inner.err_bound + 4 * EPS * value)


def _product(values) -> CertifiedValue:
    v, hi = 1.0, 1.0
    for cv in values:
        v *= cv.value
        hi *= abs(cv.value) + cv.err_bound
    return CertifiedValue(v, (hi - abs(v)) + 4 * len(values) * EPS * abs(v))


def _summand_theta(s: Summand, y: float, tol: float) -> CertifiedValue:
    if s.block is None:
        return theta_eval(3, float(s.scale2) * y, tol)
    return _gram_theta(tuple(tuple(r) for r in s.gram()), y, tol)


def theta_eval_numeric(spec, point, tol: float = 1e-12) -> CertifiedValue:
    """``Theta_spec(i*y)`` as a product of per-summand values, each certified.

    Every factor is >= 1, so an error ``e_i`` in factor ``v_i`` moves the
    product ``P`` by at most ``e_i * P / v_i``; a rough first pass sizes ``P``.
    """
    spec = as_spec(spec)
    y = _as_y(point)
    parts = spec.summands
    rough = [_summand_theta(s, y, 1e-6 * max(1.0, 1.0 / (float(s.scale2) * y)) ** s.dimension) for s in parts]
    p_hi = math.prod(v.value + v.err_bound for v in rough)
    out = _product([_summand_theta(s, y, tol * r.value / (2 * len(parts) * p_hi)) for s, r in zip(parts, rough)])
    if out.err_bound > tol:
        raise ToleranceError(f"theta of {spec} not certified to {tol:g} (bound {out.err_bound:g})")
    return out


def theta_value(spec, y: float, rtol: float = 1e-13) -> CertifiedValue:
    """Certified value with a tolerance relative to a rough magnitude estimate."""
    spec = as_spec(spec)
    n = spec.dimension
    mag = max(1.0, 1.0 / (math.sqrt(float(spec.det)) * y ** (n / 2)))
    return theta_eval_numeric(spec, y, rtol * mag)


def modularity_residual(spec, l: int, y: float, rtol: float = 1e-13) -> float:
    """``|Theta(1/(l y)) - l^(n/4) y^(n/2) Theta(y)|``; vanishes for l-modular lattices."""
    spec = as_spec(spec)
    if l < 1:
        raise ValueError("l must be a positive integer")
    n = spec.dimension
    lhs = theta_value(spec, 1.0 / (l * y), rtol).value
    rhs = l ** (n / 4) * y ** (n / 2) * theta_value(spec, y, rtol).value
    return abs(lhs - rhs)
