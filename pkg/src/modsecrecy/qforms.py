"""Rational quadratic forms: diagonalization, Hilbert symbols, Hasse-Witt invariants
and the rational-equivalence test (discriminant, signature, local invariants).

Places are odd primes, ``2``, or the string ``"inf"`` for the real place.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from sympy import factorint, isprime

from . import exact

INF = "inf"


class DegenerateFormError(ValueError):
    pass


@dataclass(frozen=True)
class SymmetricForm:
    matrix: tuple

    def __post_init__(self):
        m = exact.to_matrix(self.matrix)
        if not exact.is_symmetric(m):
            raise ValueError("matrix is not symmetric")
        object.__setattr__(self, "matrix", tuple(tuple(r) for r in m))

    @property
    def dim(self) -> int:
        return len(self.matrix)

    @property
    def det(self) -> Fraction:
        return exact.det(self.matrix)

    @classmethod
    def diagonal(cls, entries) -> "SymmetricForm":
        n = len(entries)
        return cls(tuple(tuple(Fraction(entries[i]) if i == j else Fraction(0) for j in range(n)) for i in range(n)))


def as_form(a) -> SymmetricForm:
    return a if isinstance(a, SymmetricForm) else SymmetricForm(a)


@dataclass(frozen=True)
class CongruenceResult:
    D: tuple  # diagonal entries
    S: tuple
    mode: str  # "global" or "local(p)"

    def diagonal_matrix(self) -> list:
        n = len(self.D)
        return [[self.D[i] if i == j else Fraction(0) for j in range(n)] for i in range(n)]

    def verify(self, a) -> bool:
        a = as_form(a).matrix
        s = [list(r) for r in self.S]
        return exact.matmul(exact.matmul(exact.transpose(s), a), s) == self.diagonal_matrix()


def vp(x: Fraction, p: int) -> int:
    """p-adic valuation of a nonzero rational."""
    x = Fraction(x)
    if x == 0:
        raise ValueError("valuation of zero")
    v = 0
    n, d = x.numerator, x.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


class _Congruence:
    """Working copy of ``M = S^T A S`` with ``S`` updated by column operations."""

    def __init__(self, a):
        self.m = [list(r) for r in a]
        n = len(a)
        self.s = exact.identity(n)

    def swap(self, i, j):
        if i == j:
            return
        m, s = self.m, self.s
        m[i], m[j] = m[j], m[i]
        for r in m:
            r[i], r[j] = r[j], r[i]
        for r in s:
            r[i], r[j] = r[j], r[i]

    def add(self, target, src, c):
        """b_target += c * b_src."""
        m, s = self.m, self.s
        for r in s:
            r[target] += c * r[src]
        for r in m:
            r[target] += c * r[src]
        for k in range(len(m)):
            m[target][k] += c * m[src][k]

    def eliminate(self, k):
        piv = self.m[k][k]
        for r in range(k + 1, len(self.m)):
            c = self.m[k][r]
            if c:
                self.add(r, k, -c / piv)


def diagonalize(a, p: int | None = None) -> CongruenceResult:
    """Find ``S`` with ``S^T A S`` diagonal.

    With ``p`` (an odd prime not dividing ``det A``, entries p-integral) all
    steps stay in ``Z_(p)``: ``det S = +-1`` and every diagonal entry is a p-unit.
    """
    form = as_form(a)
    n = form.dim
    if form.det == 0:
        raise DegenerateFormError("form is degenerate (det = 0)")
    if p is not None:
        if p == 2 or not isprime(p):
            raise ValueError("local mode needs an odd prime")
        if any(v and vp(v, p) < 0 for row in form.matrix for v in row):
            raise ValueError(f"entries are not {p}-integral")
        if vp(form.det, p) != 0:
            raise ValueError(f"{p} divides the determinant")
    w = _Congruence(form.matrix)
    m = w.m

    def unit(x):
        return x != 0 and (p is None or vp(x, p) == 0)

    for k in range(n):
        i = next((i for i in range(k, n) if unit(m[i][i])), None)
        if i is not None:
            w.swap(k, i)
        else:
            pair = next(((i, j) for i in range(k, n) for j in range(i + 1, n) if unit(m[i][j])), None)
            if pair is None:
                raise DegenerateFormError("no usable pivot")
            i, j = pair
            # e_k -> e_i + e_j, e_i -> e_k
            w.swap(k, i)
            w.add(k, j, Fraction(1))
            assert unit(m[k][k])
        w.eliminate(k)
    mode = "global" if p is None else f"local({p})"
    return CongruenceResult(tuple(m[i][i] for i in range(n)), tuple(tuple(r) for r in w.s), mode)


# ---------------------------------------------------------------------------
# symbols


def legendre(u: int, p: int) -> int:
    if p == 2 or p < 2 or not isprime(p):
        raise ValueError("p must be an odd prime")
    if u % p == 0:
        raise ValueError("p divides u")
    return 1 if pow(u % p, (p - 1) // 2, p) == 1 else -1


def _square_class_int(x) -> int:
    """Integer in the same square class as the nonzero rational ``x``."""
    x = Fraction(x)
    if x == 0:
        raise ValueError("zero has no square class")
    return x.numerator * x.denominator


def squarefree_part(x) -> int:
    n = _square_class_int(x)
    out = -1 if n < 0 else 1
    for q, e in factorint(abs(n)).items():
        if e % 2:
            out *= q
    return out


def _split(a: int, p: int):
    alpha = 0
    while a % p == 0:
        a //= p
        alpha += 1
    return alpha, a


def hilbert(a, b, v) -> int:
    """Hilbert symbol ``(a, b)_v`` for nonzero rationals."""
    a, b = _square_class_int(a), _square_class_int(b)
    if v == INF:
        return -1 if a < 0 and b < 0 else 1
    p = int(v)
    if p == 2:
        al, u = _split(a, 2)
        be, w = _split(b, 2)

        def eps(x):
            return ((x - 1) // 2) % 2

        def omega(x):
            return ((x * x - 1) // 8) % 2

        e = eps(u) * eps(w) + al * omega(w) + be * omega(u)
        return -1 if e % 2 else 1
    if not isprime(p):
        raise ValueError(f"{v} is not a place")
    al, u = _split(a, p)
    be, w = _split(b, p)
    s = -1 if (al * be * (p - 1) // 2) % 2 else 1
    if be % 2:
        s *= legendre(u, p)
    if al % 2:
        s *= legendre(w, p)
    return s


def hasse_witt_diag(entries, v) -> int:
    out = 1
    for x, y in combinations(entries, 2):
        out *= hilbert(x, y, v)
    return out


def hasse_witt(a, v) -> int:
    return hasse_witt_diag(diagonalize(a).D, v)


def relevant_primes(*entry_lists) -> list:
    ps = {2}
    for entries in entry_lists:
        for x in entries:
            x = Fraction(x)
            for n in (x.numerator, x.denominator):
                ps.update(factorint(abs(n)).keys())
    ps.discard(1)
    return sorted(ps)


@dataclass(frozen=True)
class QFormInvariants:
    dim: int
    signature: int
    disc_class: int
    hasse: dict = field(hash=False)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "signature": self.signature,
            "disc_class": self.disc_class,
            "hasse": {str(k): v for k, v in self.hasse.items()},
        }


def invariants(a, primes=None) -> QFormInvariants:
    form = as_form(a)
    d = diagonalize(form).D
    if primes is None:
        primes = relevant_primes(d)
    sig = sum(1 if x > 0 else -1 for x in d)
    hasse = {p: hasse_witt_diag(d, p) for p in primes}
    hasse[INF] = hasse_witt_diag(d, INF)
    return QFormInvariants(form.dim, sig, squarefree_part(form.det), hasse)


@dataclass(frozen=True)
class EquivalenceReport:
    equivalent: bool
    a: QFormInvariants | None
    b: QFormInvariants | None
    reason: str

    def to_dict(self) -> dict:
        return {
            "equivalent": self.equivalent,
            "reason": self.reason,
            "a": self.a.to_dict() if self.a else None,
            "b": self.b.to_dict() if self.b else None,
        }


def rationally_equivalent(a, b) -> EquivalenceReport:
    """Decide equivalence over Q of two nondegenerate forms."""
    fa, fb = as_form(a), as_form(b)
    if fa.dim != fb.dim:
        return EquivalenceReport(False, None, None, f"dimensions differ ({fa.dim} vs {fb.dim})")
    da, db = diagonalize(fa).D, diagonalize(fb).D
    primes = relevant_primes(da, db)
    ia, ib = invariants(fa, primes), invariants(fb, primes)
    if ia.signature != ib.signature:
        return EquivalenceReport(False, ia, ib, f"signatures differ ({ia.signature} vs {ib.signature})")
    if ia.disc_class != ib.disc_class:
        return EquivalenceReport(False, ia, ib, f"discriminants differ ({ia.disc_class} vs {ib.disc_class})")
    for v in [*primes, INF]:
        if ia.hasse[v] != ib.hasse[v]:
            return EquivalenceReport(False, ia, ib, f"Hasse-Witt invariants differ at {v}")
    return EquivalenceReport(True, ia, ib, "all invariants agree")
