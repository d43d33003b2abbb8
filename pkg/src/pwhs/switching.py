"""The switching line and what happens on it.

A :class:`PWSystem` glues two holomorphic fields along a straight line.  On the
line every point is sewing, attracting sliding, repelling sliding or a
tangency, depending on the signs of the two normal components.  This module
classifies single points and whole intervals, evaluates the Filippov sliding
field and measures the order of contact of a field with the line.

All logic is written in a frame adapted to the line: the normal coordinate is
``x - c`` for a vertical line and ``y - c`` for a horizontal one, and the line
parameter is ``y`` or ``x`` respectively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from .complexfield import FieldSpec
from .errors import (
    DegenerateDenominator,
    MultiplicityExceedsKMax,
    NotInSlidingRegion,
    PreconditionViolation,
    ValidationError,
)

#: dead zone for sign decisions on normal components
TOL = 1e-9
#: how far from the line a point may sit and still count as on it
ON_LINE_TOL = 1e-9


@dataclass(frozen=True)
class SwitchingLine:
    """``Re z = offset`` (vertical) or ``Im z = offset`` (horizontal)."""

    orientation: str = "vertical"
    offset: float = 0.0

    def __post_init__(self):
        if self.orientation not in ("vertical", "horizontal"):
            raise ValidationError(f"orientation must be 'vertical' or 'horizontal', got {self.orientation!r}")
        c = float(self.offset)
        if not math.isfinite(c):
            raise ValidationError("line offset must be finite")
        object.__setattr__(self, "offset", c)

    @property
    def vertical(self) -> bool:
        return self.orientation == "vertical"

    @property
    def nhat(self) -> complex:
        """Unit normal, pointing to the plus side."""
        return 1 + 0j if self.vertical else 1j

    @property
    def that(self) -> complex:
        """Unit tangent, the direction of increasing line parameter."""
        return 1j if self.vertical else 1 + 0j

    def normal(self, z: complex) -> float:
        return (z.real if self.vertical else z.imag) - self.offset

    def param(self, z: complex) -> float:
        return z.imag if self.vertical else z.real

    def point(self, s: float) -> complex:
        return complex(self.offset, s) if self.vertical else complex(s, self.offset)

    def normal_part(self, w: complex) -> float:
        return w.real if self.vertical else w.imag

    def tangential_part(self, w: complex) -> float:
        return w.imag if self.vertical else w.real

    def project(self, z: complex) -> complex:
        return self.point(self.param(z))


VERTICAL = SwitchingLine("vertical", 0.0)
HORIZONTAL = SwitchingLine("horizontal", 0.0)


@dataclass(frozen=True)
class PWSystem:
    """``plus`` acts where the normal coordinate is positive, ``minus`` where negative."""

    plus: FieldSpec
    minus: FieldSpec
    line: SwitchingLine = VERTICAL

    def field(self, side: str) -> FieldSpec:
        if side == "plus":
            return self.plus
        if side == "minus":
            return self.minus
        raise ValidationError(f"side must be 'plus' or 'minus', got {side!r}")


class RegionClass(str, Enum):
    SEWING = "Sewing"
    SLIDING_ATTRACT = "SlidingAttract"
    SLIDING_REPEL = "SlidingRepel"
    TANGENCY = "Tangency"


def _on_line(sys: PWSystem, p: complex) -> complex:
    p = complex(p)
    if abs(sys.line.normal(p)) > ON_LINE_TOL:
        raise PreconditionViolation(f"point {p!r} is not on the switching line")
    return p


def normal_components(sys: PWSystem, p: complex) -> tuple[float, float]:
    """Normal components ``(plus, minus)`` of the two fields at ``p``."""
    p = _on_line(sys, p)
    return sys.line.normal_part(sys.plus(p)), sys.line.normal_part(sys.minus(p))


def tangential_components(sys: PWSystem, p: complex) -> tuple[float, float]:
    """Rates of change of the line parameter under each field at ``p``."""
    p = _on_line(sys, p)
    return sys.line.tangential_part(sys.plus(p)), sys.line.tangential_part(sys.minus(p))


def classify_components(up: float, um: float, tol: float = TOL) -> RegionClass:
    if abs(up) <= tol or abs(um) <= tol:
        return RegionClass.TANGENCY
    if up * um > 0:
        return RegionClass.SEWING
    return RegionClass.SLIDING_ATTRACT if up < 0 else RegionClass.SLIDING_REPEL


def classify_point(sys: PWSystem, p: complex, tol: float = TOL) -> RegionClass:
    return classify_components(*normal_components(sys, p), tol=tol)


def sliding_tangential(up: float, um: float, tp: float, tm: float, tol: float = TOL) -> float:
    """Tangential part of the Filippov convex combination."""
    den = up - um
    if abs(den) < tol:
        raise DegenerateDenominator("normal components are too close to combine")
    return (up * tm - um * tp) / den


def sliding_field(sys: PWSystem, p: complex, tol: float = TOL) -> complex:
    """Filippov sliding vector at ``p``; its normal component is exactly zero."""
    up, um = normal_components(sys, p)
    cls = classify_components(up, um, tol)
    if cls not in (RegionClass.SLIDING_ATTRACT, RegionClass.SLIDING_REPEL):
        raise NotInSlidingRegion(f"{p!r} is classified {cls.value}")
    tp, tm = tangential_components(sys, p)
    return sliding_tangential(up, um, tp, tm, tol) * sys.line.that


# -- interval classification ----------------------------------------------------------

class Segment(NamedTuple):
    lo: float
    hi: float
    cls: RegionClass


@dataclass(frozen=True)
class RegionReport:
    lo: float
    hi: float
    segments: tuple[Segment, ...]
    tangency_points: tuple[float, ...]
    singular_points: tuple[float, ...]

    def class_at(self, s: float) -> RegionClass | None:
        for seg in self.segments:
            if seg.lo < s < seg.hi:
                return seg.cls
        return None

    def csv_rows(self) -> list[tuple[str, float, float, str]]:
        rows = [("segment", seg.lo, seg.hi, seg.cls.value) for seg in self.segments]
        rows += [("tangency", s, s, RegionClass.TANGENCY.value) for s in self.tangency_points]
        rows += [("singular", s, s, "Singular") for s in self.singular_points]
        return rows


def _component(sys: PWSystem, side: str):
    f, line = sys.field(side), sys.line

    def c(s: float) -> float:
        return line.normal_part(f(line.point(s)))

    def dc(s: float) -> float:
        return line.normal_part(f.derivative(line.point(s)) * line.that)

    return c, dc


def _component_roots(c, dc, grid: np.ndarray, tol: float) -> list[float]:
    vals = np.array([c(s) for s in grid])
    ders = np.array([dc(s) for s in grid])
    roots = []
    for i in range(len(grid) - 1):
        a, b = grid[i], grid[i + 1]
        va, vb = vals[i], vals[i + 1]
        if max(abs(va), abs(vb)) <= tol:
            continue  # component vanishes along this stretch
        if va == 0.0:
            roots.append(a)
        elif va * vb < 0:
            roots.append(brentq(c, a, b, xtol=1e-14, rtol=4 * np.finfo(float).eps))
        elif ders[i] * ders[i + 1] < 0 and min(abs(va), abs(vb)) > tol:
            # even-order zero: c touches 0 where c' changes sign
            s = brentq(dc, a, b, xtol=1e-14, rtol=4 * np.finfo(float).eps)
            if abs(c(s)) <= tol:
                roots.append(s)
    if vals[-1] == 0.0 and abs(vals[-2]) > tol:
        roots.append(grid[-1])
    return roots


def _dedupe(points: list[float], gap: float = 1e-9) -> list[float]:
    out: list[float] = []
    for s in sorted(points):
        if not out or s - out[-1] > gap * max(1.0, abs(s)):
            out.append(s)
    return out


def classify_regions(
    sys: PWSystem, y_lo: float, y_hi: float, resolution: int = 256, tol: float = TOL
) -> RegionReport:
    """Partition ``[y_lo, y_hi]`` of the line into sewing, sliding and tangency segments.

    Sign changes of each normal component are bracketed on a uniform grid and
    refined with Brent's method; even-order zeros are found as sign changes of
    the component's derivative.  A pole lying on the line splits the report
    and is listed under ``singular_points``.
    """
    if not y_lo < y_hi:
        raise ValidationError("need y_lo < y_hi")
    if resolution < 2:
        raise ValidationError("resolution must be at least 2")
    line = sys.line
    poles = sorted(
        {
            float(line.param(s))
            for f in (sys.plus, sys.minus)
            for s in f.singularities()
            if abs(line.normal(s)) <= 1e-12 and y_lo < line.param(s) < y_hi
        }
    )
    y_lo, y_hi = float(y_lo), float(y_hi)
    edges = [y_lo, *poles, y_hi]
    comps = [_component(sys, "plus"), _component(sys, "minus")]
    roots: list[float] = []
    for a, b in zip(edges[:-1], edges[1:]):
        pad = 1e-7 * (b - a)
        a2 = a + pad if a in poles else a
        b2 = b - pad if b in poles else b
        grid = np.linspace(a2, b2, resolution)
        for c, dc in comps:
            roots += _component_roots(c, dc, grid, tol)
    roots = [float(r) for r in _dedupe(roots) if all(abs(r - p) > 1e-9 for p in poles) and y_lo < r < y_hi]

    breaks = sorted(roots + poles)
    bounds = [y_lo, *breaks, y_hi]
    segments: list[Segment] = []
    for a, b in zip(bounds[:-1], bounds[1:]):
        if b - a <= 1e-12:
            continue
        cls = classify_point(sys, line.point(0.5 * (a + b)), tol)
        if segments and segments[-1].cls == cls and a not in poles:
            segments[-1] = Segment(segments[-1].lo, b, cls)
        else:
            segments.append(Segment(a, b, cls))
    return RegionReport(y_lo, y_hi, tuple(segments), tuple(roots), tuple(poles))


# -- contacts --------------------------------------------------------------------------

class Contact(NamedTuple):
    k: int | str  # multiplicity, or "regular"
    visibility: str  # "visible", "invisible" or "n/a"


def _frame_taylor(f: FieldSpec, q: complex, line: SwitchingLine, order: int) -> np.ndarray:
    # rotate so the line becomes vertical with the plus side to the right;
    # the rotation is conformal, so the rotated field is holomorphic too
    nh = line.nhat
    return np.conj(nh) * f.taylor(q, order) * nh ** np.arange(order + 1)


def contact_multiplicity(
    f: FieldSpec,
    q: complex,
    k_max: int = 8,
    side: str = "plus",
    line: SwitchingLine = VERTICAL,
    tol: float = TOL,
) -> Contact:
    """Order of contact of ``f`` with the line at ``q``.

    With ``u, v`` the normal and tangential components in the line frame, ``q``
    is a contact of multiplicity ``k`` when ``u(q) = 0``, ``v(q) != 0`` and the
    chain ``D_j = d^j/ds^j (dv/dn)`` vanishes for ``j < k-2`` but not at
    ``j = k-2``.  For even ``k`` the plus side is visible when
    ``v**(k-1) * D < 0`` and the minus side when it is ``> 0``.
    """
    if k_max < 2:
        raise ValidationError("k_max must be at least 2")
    if side not in ("plus", "minus"):
        raise ValidationError(f"side must be 'plus' or 'minus', got {side!r}")
    q = complex(q)
    if abs(line.normal(q)) > ON_LINE_TOL:
        raise PreconditionViolation(f"point {q!r} is not on the switching line")
    g = _frame_taylor(f, q, line, k_max - 1)
    u, v = g[0].real, g[0].imag
    scale = max(1.0, abs(g[0]))
    if abs(u) > tol * scale:
        return Contact("regular", "n/a")
    if abs(v) <= tol * scale:
        raise MultiplicityExceedsKMax(f"field vanishes at {q!r}; contact order undefined")
    for k in range(2, k_max + 1):
        j = k - 2
        d = (1j**j * math.factorial(j + 1) * g[j + 1]).imag
        if abs(d) > tol * math.factorial(j + 1) * scale:
            if k % 2:
                return Contact(k, "n/a")
            s = v ** (k - 1) * d
            visible = s < 0 if side == "plus" else s > 0
            return Contact(k, "visible" if visible else "invisible")
    raise MultiplicityExceedsKMax(f"no contact order <= {k_max} certified at {q!r}")


def fold_predicate(f: FieldSpec, q: complex, line: SwitchingLine = VERTICAL, tol: float = TOL) -> bool:
    """``u(q) = 0``, ``v(q) != 0`` and ``Im F'(q) != 0``, each within ``tol`` relative to the values' size."""
    q = complex(q)
    w, dw = f(q), f.derivative(q)
    u, v = line.normal_part(w), line.tangential_part(w)
    scale = max(1.0, abs(w))
    return abs(u) < tol * scale and abs(v) > tol * scale and abs(dw.imag) > tol * max(1.0, abs(dw))


@dataclass(frozen=True)
class TangencyReport:
    point: complex
    side: str  # "plus", "minus" or "both"
    plus: Contact
    minus: Contact
    label: str


def _pairing(plus: Contact, minus: Contact) -> str:
    if plus.k == "regular" or minus.k == "regular":
        other = minus if plus.k == "regular" else plus
        return "regular-fold" if other.k == 2 else "regular-higher-order"
    if plus.visibility == "n/a" or minus.visibility == "n/a":
        return "degenerate"  # an odd-order contact on one side
    # the minus side's visibility is named first
    return f"{minus.visibility}-{plus.visibility}"


def classify_tangency(sys: PWSystem, q: complex, k_max: int = 8) -> TangencyReport:
    q = _on_line(sys, q)
    if classify_point(sys, q) is not RegionClass.TANGENCY:
        raise PreconditionViolation(f"{q!r} is not a tangency point")
    plus = contact_multiplicity(sys.plus, q, k_max, "plus", sys.line)
    minus = contact_multiplicity(sys.minus, q, k_max, "minus", sys.line)
    if plus.k != "regular" and minus.k != "regular":
        side = "both"
    else:
        side = "minus" if plus.k == "regular" else "plus"
    return TangencyReport(q, side, plus, minus, _pairing(plus, minus))


__all__ = [
    "TOL",
    "SwitchingLine",
    "VERTICAL",
    "HORIZONTAL",
    "PWSystem",
    "RegionClass",
    "Segment",
    "RegionReport",
    "Contact",
    "TangencyReport",
    "normal_components",
    "tangential_components",
    "classify_components",
    "classify_point",
    "sliding_tangential",
    "sliding_field",
    "classify_regions",
    "contact_multiplicity",
    "fold_predicate",
    "classify_tangency",
]
