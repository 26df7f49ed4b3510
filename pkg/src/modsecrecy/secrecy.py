"""Secrecy functions of lattices and location of their extrema.

Two variants are supported for an l-modular lattice ``L`` of dimension ``n``:

* ``classic``: ``theta_3(sqrt(l) y)^n / Theta_L(y)`` (cubic lattice scaled to volume ``l^(n/4)``)
* ``modular``: ``(theta_3(y) theta_3(l y))^k / Theta_L(y)`` with ``k = n/2`` for ``l > 1``
  (``k = n`` and the numerator is ``theta_3(y)^n`` for ``l = 1``)

``k`` may be half-integral (e.g. ``n = 3``, ``l = 4``); the power is then the
positive real power of a positive number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .lattice import LatticeSpec, as_spec, theta_value
from .theta import EPS, CertifiedValue, ToleranceError, theta_eval

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SecrecyCurve:
    spec: LatticeSpec
    l: int
    variant: str = "classic"

    def __post_init__(self):
        if self.variant not in ("classic", "modular"):
            raise ValueError(f"variant must be 'classic' or 'modular', got {self.variant!r}")
        if int(self.l) != self.l or self.l < 1:
            raise ValueError("l must be a positive integer")
        object.__setattr__(self, "spec", as_spec(self.spec))

    @property
    def k(self) -> Fraction:
        n = self.spec.dimension
        return Fraction(n) if self.l == 1 else Fraction(n, 2)

    @property
    def center(self) -> float:
        """Fixed point ``1/sqrt(l)`` of the multiplicative symmetry."""
        return 1.0 / math.sqrt(self.l)

    def evaluate(self, y: float, tol: float = 1e-11) -> CertifiedValue:
        if self.variant == "classic":
            return xi_classic(self, y, tol)
        return xi_modular(self, y, tol)

    def __call__(self, y: float) -> float:
        return self.evaluate(y).value


def _power(cv: CertifiedValue, p: float) -> CertifiedValue:
    v = cv.value**p
    hi = (cv.value + cv.err_bound) ** p
    return CertifiedValue(v, hi - v + 4 * EPS * v * max(1.0, abs(p)))


def _ratio(num: CertifiedValue, den: CertifiedValue) -> CertifiedValue:
    if den.value <= den.err_bound:
        raise ToleranceError("denominator not bounded away from zero")
    v = num.value / den.value
    err = (num.err_bound + abs(v) * den.err_bound) / (den.value - den.err_bound)
    return CertifiedValue(v, err + 2 * EPS * abs(v))


def _finish(result: CertifiedValue, tol: float, what: str) -> CertifiedValue:
    if result.err_bound > tol:
        raise ToleranceError(f"{what} not certified to {tol:g} (bound {result.err_bound:g})")
    return result


def _theta_rel(t: float, rtol: float = 1e-14) -> CertifiedValue:
    mag = max(1.0, 1.0 / math.sqrt(t))
    return theta_eval(3, t, rtol * mag)


def xi_classic(curve: SecrecyCurve, y: float, tol: float = 1e-11) -> CertifiedValue:
    if not y > 0:
        raise ValueError("y must be positive")
    n = curve.spec.dimension
    num = _power(_theta_rel(math.sqrt(curve.l) * y), n)
    den = theta_value(curve.spec, y)
    return _finish(_ratio(num, den), tol, "classic secrecy function")


def dl_theta(l: int, y: float) -> CertifiedValue:
    """Theta value of ``D^(l) = Z + sqrt(l) Z`` (just ``Z`` when ``l = 1``)."""
    a = _theta_rel(y)
    if l == 1:
        return a
    b = _theta_rel(l * y)
    v = a.value * b.value
    err = (a.value + a.err_bound) * (b.value + b.err_bound) - v
    return CertifiedValue(v, err + 2 * EPS * v)


def xi_modular(curve: SecrecyCurve, y: float, tol: float = 1e-11) -> CertifiedValue:
    if not y > 0:
        raise ValueError("y must be positive")
    num = _power(dl_theta(curve.l, y), float(curve.k))
    den = theta_value(curve.spec, y)
    return _finish(_ratio(num, den), tol, "l-modular secrecy function")


def symmetry_residual(curve: SecrecyCurve, a: float, tol: float = 1e-11) -> float:
    """``|Xi(a) - Xi(1/(l a))|`` for the curve's own variant."""
    if not a > 0:
        raise ValueError("a must be positive")
    b = 1.0 / (curve.l * a)
    if abs(b - a) <= 4 * EPS * a:
        return 0.0
    return abs(curve.evaluate(a, tol).value - curve.evaluate(b, tol).value)


# ---------------------------------------------------------------------------
# extremum scan


@dataclass
class ExtremumReport:
    kind: str  # "min", "max" or "monotone"
    location: float | None
    value: float | None
    bracket_width: float | None
    monotone_segments: list
    ambiguous: bool = False
    grid: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "location": self.location,
            "value": self.value,
            "bracket_width": self.bracket_width,
            "ambiguous": self.ambiguous,
            "monotone_segments": [
                {"interval": [a, b], "direction": d} for (a, b), d in self.monotone_segments
            ],
        }


def golden_section(f: Callable[[float], float], a: float, b: float, tol: float, maximize: bool = False):
    """Golden-section search on ``[a, b]``; returns the final bracket ``(a, b)``."""
    g = (lambda t: -f(t)) if maximize else f
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc, fd = g(c), g(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - INVPHI * (b - a)
            fc = g(c)
        else:
            a, c, fc = c, d, fd
            d = a + INVPHI * (b - a)
            fd = g(d)
    return a, b


def _segments(ys, signs) -> list:
    segs = []
    for i, s in enumerate(signs):
        d = "+" if s > 0 else "-" if s < 0 else "0"
        if segs and segs[-1][1] == d:
            segs[-1] = ((segs[-1][0][0], ys[i + 1]), d)
        else:
            segs.append(((ys[i], ys[i + 1]), d))
    return segs


def scan_extremum(curve, y_lo: float, y_hi: float, grid_points: int = 64,
                  refine_tol: float = 1e-7, center: float | None = None) -> ExtremumReport:
    """Locate and classify the interior extremum of a 1-D function of ``y``.

    ``curve`` is any callable ``y -> float`` (a :class:`SecrecyCurve` works).
    A logarithmic grid brackets the extremum, golden-section search refines it.
    When no interior extremum exists a ``monotone`` report is returned.
    """
    if not 0 < y_lo < y_hi:
        raise ValueError("need 0 < y_lo < y_hi")
    if grid_points < 16:
        raise ValueError("grid_points must be at least 16")
    if center is None:
        center = getattr(curve, "center", None)
    f = curve if callable(curve) else curve.evaluate
    ys = [float(v) for v in np.geomspace(y_lo, y_hi, grid_points)]
    ys[0], ys[-1] = y_lo, y_hi
    vals = [float(f(y)) for y in ys]
    diffs = [b - a for a, b in zip(vals, vals[1:])]
    signs = [(d > 0) - (d < 0) for d in diffs]
    segs = _segments(ys, signs)
    grid = list(zip(ys, vals))

    # sign changes across nonzero differences; a run of exactly-equal values
    # between them (e.g. two grid points mirrored about the symmetry center)
    # is treated as one plateau
    nz = [(i, sg) for i, sg in enumerate(signs) if sg]
    candidates = []
    for (i, si), (j, sj) in zip(nz, nz[1:]):
        if si > 0 and sj < 0:
            candidates.append((i, j + 1, "max"))
        elif si < 0 and sj > 0:
            candidates.append((i, j + 1, "min"))
    if not candidates:
        return ExtremumReport("monotone", None, None, None, segs, grid=grid)

    def peak(c):
        return vals[c[0] + 1]

    ref = (vals[0] + vals[-1]) / 2
    candidates.sort(key=lambda c: -abs(peak(c) - ref))
    best = candidates[0]
    ambiguous = False
    ties = [c for c in candidates[1:]
            if c[2] == best[2] and abs(peak(c) - peak(best)) <= max(refine_tol, 1e-12)]
    if ties:
        ambiguous = True
        if center is not None:
            for c in [best, *ties]:
                if ys[c[0]] <= center <= ys[c[1]]:
                    best = c
                    break

    lo, hi, kind = best
    a, b = golden_section(f, ys[lo], ys[hi], refine_tol, maximize=(kind == "max"))
    loc = (a + b) / 2
    return ExtremumReport(kind, loc, float(f(loc)), b - a, segs, ambiguous, grid)
