"""Small exact-rational matrix helpers (matrices are lists of lists of Fractions)."""

from __future__ import annotations

from fractions import Fraction


def to_matrix(rows) -> list:
    return [[Fraction(v) for v in row] for row in rows]


def identity(n: int) -> list:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def transpose(a) -> list:
    return [list(col) for col in zip(*a)]


def matmul(a, b) -> list:
    bt = transpose(b)
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt] for row in a]


def is_symmetric(a) -> bool:
    n = len(a)
    return all(len(r) == n for r in a) and all(a[i][j] == a[j][i] for i in range(n) for j in range(i))


def det(a) -> Fraction:
    m = [list(map(Fraction, r)) for r in a]
    n = len(m)
    d = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            d = -d
        d *= m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            if f:
                for k in range(c, n):
                    m[r][k] -= f * m[c][k]
    return d


def inverse(a) -> list:
    n = len(a)
    m = [list(map(Fraction, r)) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(a)]
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        m[c], m[piv] = m[piv], m[c]
        p = m[c][c]
        m[c] = [v / p for v in m[c]]
        for r in range(n):
            if r != c and m[r][c]:
                f = m[r][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return [row[n:] for row in m]


def ldl(a):
    """``a = L diag(d) L^T`` with unit lower-triangular ``L``; ``None`` if a pivot vanishes.

    For a symmetric matrix all ``d > 0`` iff it is positive definite.
    """
    n = len(a)
    L = [[Fraction(0)] * n for _ in range(n)]
    d = [Fraction(0)] * n
    for j in range(n):
        s = Fraction(a[j][j]) - sum((L[j][k] ** 2 * d[k] for k in range(j)), Fraction(0))
        if s == 0:
            return None
        d[j] = s
        L[j][j] = Fraction(1)
        for i in range(j + 1, n):
            t = Fraction(a[i][j]) - sum((L[i][k] * L[j][k] * d[k] for k in range(j)), Fraction(0))
            L[i][j] = t / s
    return L, d


def is_positive_definite(a) -> bool:
    f = ldl(a)
    return f is not None and all(v > 0 for v in f[1])
