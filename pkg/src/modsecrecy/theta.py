"""Jacobi theta functions on the imaginary axis, with certified truncation bounds.

All functions take ``y > 0`` and work with the nome ``q = exp(-pi*y)``.
For ``y < 1`` the imaginary transformation is applied first so that the
series is always summed at an argument ``>= 1`` (``q <= e^-pi``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

EPS = 2.0**-52
MAX_TERMS = 64


class ToleranceError(ArithmeticError):
    """Requested tolerance cannot be certified within the term budget."""


@dataclass(frozen=True)
class EvalPoint:
    y: float

    def __post_init__(self):
        if not (self.y > 0 and math.isfinite(self.y)):
            raise ValueError(f"y must be a positive finite real, got {self.y!r}")

    @property
    def q(self) -> float:
        return math.exp(-math.pi * self.y)


@dataclass(frozen=True)
class CertifiedValue:
    value: float
    err_bound: float

    @property
    def lo(self) -> float:
        return self.value - self.err_bound

    @property
    def hi(self) -> float:
        return self.value + self.err_bound

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class ModularQuantities:
    k: float
    kprime: float
    l: float
    lprime: float
    m2: float


def _as_y(point) -> float:
    if isinstance(point, EvalPoint):
        return point.y
    return EvalPoint(float(point)).y


def _sum_direct(kind: int, y: float, tol: float, max_terms: int) -> CertifiedValue:
    # y >= 1 here, so q <= e^-pi and 1/(1-q) < 1.05
    q = math.exp(-math.pi * y)
    geo = 1.0 / (1.0 - q)
    if kind == 2:
        total = 0.0
        for n in range(max_terms):
            total += 2.0 * q ** ((n + 0.5) ** 2)
            tail = 2.0 * q ** ((n + 1.5) ** 2) * geo
            err = tail + 4 * (n + 1) * EPS * total
            if err <= tol:
                return CertifiedValue(total, err)
    else:
        sign = -1.0 if kind == 4 else 1.0
        total = 1.0
        for n in range(1, max_terms + 1):
            total += 2.0 * sign**n * q ** (n * n)
            tail = 2.0 * q ** ((n + 1) ** 2) * geo
            err = tail + 4 * (n + 1) * EPS * total
            if err <= tol:
                return CertifiedValue(total, err)
    raise ToleranceError(f"theta_{kind}(i*{y}) not certified to {tol:g} in {max_terms} terms")


# theta_j(1/y) = sqrt(y) * theta_{swap[j]}(y)
_SWAP = {2: 4, 3: 3, 4: 2}


def theta_eval(kind: int, point, tol: float = 1e-12, max_terms: int = MAX_TERMS) -> CertifiedValue:
    """Evaluate ``theta_kind(i*y)`` for kind in {2, 3, 4}.

    The returned ``err_bound`` covers the truncated tail and a floating-point
    rounding allowance.  Raises :class:`ToleranceError` if ``tol`` cannot be met.
    """
    if kind not in (2, 3, 4):
        raise ValueError(f"theta kind must be 2, 3 or 4, got {kind!r}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    y = _as_y(point)
    if y >= 1.0:
        return _sum_direct(kind, y, tol, max_terms)
    yt = 1.0 / y
    scale = math.sqrt(yt)
    inner = _sum_direct(_SWAP[kind], yt, tol / scale / 2, max_terms)
    value = scale * inner.value
    return CertifiedValue(value, scale * inner.err_bound + 2 * EPS * value)


def theta(kind: int, y: float, tol: float = 1e-13) -> float:
    """Plain float convenience wrapper around :func:`theta_eval`."""
    return theta_eval(kind, y, tol).value


def modular_quantities(point, tol: float = 1e-13) -> ModularQuantities:
    y = _as_y(point)
    t2, t3, t4 = (theta_eval(j, y, tol).value for j in (2, 3, 4))
    h2, h3, h4 = (theta_eval(j, y / 2, tol).value for j in (2, 3, 4))
    return ModularQuantities(
        k=(t2 / t3) ** 2,
        kprime=(t4 / t3) ** 2,
        l=(h2 / h3) ** 2,
        lprime=(h4 / h3) ** 2,
        m2=(t3 / h3) ** 2,
    )


def agm(a: float, b: float, max_iter: int = 100) -> float:
    for _ in range(max_iter):
        if abs(a - b) <= 4 * EPS * a:
            return a
        a, b = (a + b) / 2, math.sqrt(a * b)
    raise ArithmeticError("AGM failed to converge")


def elliptic_K(k: float, kprime: float | None = None) -> float:
    """Complete elliptic integral of the first kind, ``K(k) = pi / (2 AGM(1, k'))``.

    Pass ``kprime`` directly when it is known more accurately than
    ``sqrt(1 - k^2)`` (e.g. when ``k`` is close to 1).
    """
    if not 0.0 <= k < 1.0:
        raise ValueError(f"elliptic_K needs 0 <= k < 1, got {k!r}")
    if kprime is None:
        kprime = math.sqrt((1.0 - k) * (1.0 + k))
    return math.pi / (2.0 * agm(1.0, kprime))


def elliptic_K_prime(k: float, kprime: float | None = None) -> float:
    """``K'(k) = K(k')``."""
    if kprime is None:
        kprime = math.sqrt((1.0 - k) * (1.0 + k))
    return elliptic_K(kprime, k)


def nome_ratio(point, tol: float = 1e-13) -> float:
    """``pi * K'(k)/K(k)`` with ``k = theta_2^2/theta_3^2``; equals ``-log q``."""
    y = _as_y(point)
    t2, t3, t4 = (theta_eval(j, y, tol).value for j in (2, 3, 4))
    k, kp = (t2 / t3) ** 2, (t4 / t3) ** 2
    return math.pi * elliptic_K(kp, k) / elliptic_K(k, kp)


def _term(kind: int, idx: int, q: float) -> float:
    """The idx-th term (in increasing exponent) of the q-series of theta_kind."""
    if kind == 2:
        return 2.0 * q ** ((idx + 0.5) ** 2)
    if idx == 0:
        return 1.0
    return 2.0 * (-1.0 if kind == 4 and idx % 2 else 1.0) * q ** (idx * idx)


def _exponent(kind: int, idx: int) -> float:
    return (idx + 0.5) ** 2 if kind == 2 else float(idx * idx)


def theta_excess(kind: int, point, head: int = 1, rtol: float = 1e-12,
                 max_terms: int = MAX_TERMS) -> CertifiedValue:
    """``theta_kind(i*y)`` minus the first ``head`` terms of its q-series.

    For ``y >= 1`` the remaining terms are summed directly, so the result keeps
    full relative precision even when it is far below the double resolution of
    ``theta`` itself (e.g. ``theta_4 - (1 - 2q) ~ 2q^4``).
    """
    if kind not in (2, 3, 4):
        raise ValueError(f"theta kind must be 2, 3 or 4, got {kind!r}")
    y = _as_y(point)
    q = math.exp(-math.pi * y)
    if y < 1.0:
        full = theta_eval(kind, y, rtol * max(1.0, 1.0 / math.sqrt(y)))
        h = math.fsum(_term(kind, i, q) for i in range(head))
        v = full.value - h
        return CertifiedValue(v, full.err_bound + 4 * EPS * (abs(full.value) + abs(h)))
    geo = 1.0 / (1.0 - q)
    lead = abs(_term(kind, head, q))
    total = 0.0
    # q itself carries a relative error of about pi*y*EPS, magnified by the exponent
    q_err = 0.0
    for i in range(head, head + max_terms):
        t = _term(kind, i, q)
        total += t
        q_err += abs(t) * _exponent(kind, i) * (math.pi * y + 1.0) * 2 * EPS
        nxt = abs(_term(kind, i + 1, q)) * geo
        err = nxt + 4 * (i - head + 1) * EPS * abs(total) + q_err
        if err <= rtol * lead:
            return CertifiedValue(total, err)
    raise ToleranceError(f"theta_{kind} excess at y={y} not certified")
