"""One concrete instantiation per row of the Case 1-5 region tables.

Expected segments are written from the closed forms (y0 - (a/b) x0, y0 +- x0,
the min/max pairs) and never from the classifier itself.  Infinite ends are
clipped to the query window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from pwhs.complexfield import Constant, Linear, Pole, Power, Rational
from pwhs.switching import PWSystem, RegionClass, VERTICAL

SEW = RegionClass.SEWING
ATT = RegionClass.SLIDING_ATTRACT
REP = RegionClass.SLIDING_REPEL
TAN = RegionClass.TANGENCY
INF = math.inf

LO, HI = -5.0, 5.0


@dataclass(frozen=True)
class Row:
    name: str
    system: PWSystem
    segments: tuple  # (lo, hi, class), possibly infinite or empty
    tangencies: tuple = ()
    singular: tuple = ()


def _sys(plus, minus):
    return PWSystem(plus, minus, VERTICAL)


def _case1(a, b, x0, y0, segs, tang=()):
    return _sys(Linear(a, b, complex(x0, y0)), Constant(1)), segs, tang


def _case2(a, b, c, d, x0, y0, segs, tang):
    z0 = complex(x0, y0)
    return _sys(Linear(c, d, z0), Linear(a, b, z0)), segs, tang


def _case3(a, b, x0, y0):
    """Power n=2 above, linear below; segments derived from the row formulas."""
    z0 = complex(x0, y0)
    lo_p, hi_p = y0 - abs(x0), y0 + abs(x0)
    if b == 0:
        inside = REP if x0 * a > 0 else SEW
        outside = SEW if x0 * a > 0 else ATT
        segs = ((-INF, lo_p, outside), (lo_p, hi_p, inside), (hi_p, INF, outside))
        return _sys(Power(2, z0), Linear(a, b, z0)), segs, (lo_p, hi_p)
    yc = y0 - a / b * x0
    ymin, ymax = min(yc, y0 - x0), max(yc, y0 - x0)
    if b > 0 and x0 == 0:
        segs = ((-INF, y0, ATT), (y0, INF, SEW))
        tang = (y0,)
    elif b > 0 and x0 > 0:
        segs = ((-INF, ymin, ATT), (ymin, ymax, SEW), (ymax, y0 + x0, REP), (y0 + x0, INF, SEW))
        tang = (y0 - x0, yc, y0 + x0)
    elif b > 0:
        segs = (
            (-INF, y0 + x0, ATT), (y0 + x0, ymin, SEW), (ymax, INF, SEW),
            (y0 - x0, yc, ATT), (yc, y0 - x0, REP),
        )
        tang = (y0 + x0, yc, y0 - x0)
    elif x0 == 0:
        segs = ((-INF, y0, SEW), (y0, INF, ATT))
        tang = (y0,)
    elif x0 > 0:
        segs = (
            (-INF, ymin, SEW), (ymax, y0 + x0, SEW), (yc, y0 - x0, ATT),
            (y0 + x0, INF, ATT), (y0 - x0, yc, REP),
        )
        tang = (y0 - x0, yc, y0 + x0)
    else:
        segs = ((-INF, y0 + x0, SEW), (ymin, ymax, SEW), (ymax, INF, ATT), (y0 + x0, ymin, REP))
        tang = (y0 + x0, yc, y0 - x0)
    return _sys(Power(2, z0), Linear(a, b, z0)), segs, tuple(sorted(set(tang)))


def _case4(a, b, x0, y0, segs, tang=(), sing=()):
    z0 = complex(x0, y0)
    return _sys(Pole(1, z0), Linear(a, b, z0)), segs, tang, sing


def _case5(a, b, y0, segs):
    z0 = complex(0, y0)
    return _sys(Rational(1, 2, z0), Linear(a, b, z0)), segs, (y0,)


def _rows() -> list[Row]:
    rows: list[Row] = []

    def add(name, system, segs, tang=(), sing=()):
        rows.append(Row(name, system, tuple(segs), tuple(tang), tuple(sing)))

    # Case 1: linear above, constant 1 below
    add("case1 a>0 b=0 x0=0", *_case1(1, 0, 0, 1, [(-INF, INF, TAN)]))
    add("case1 a>0 b=0 x0>0", *_case1(1, 0, 1, 1, [(-INF, INF, ATT)]))
    add("case1 a>0 b=0 x0<0", *_case1(1, 0, -1, 1, [(-INF, INF, SEW)]))
    add("case1 a<0 b=0 x0=0", *_case1(-1, 0, 0, 1, [(-INF, INF, TAN)]))
    add("case1 a<0 b=0 x0>0", *_case1(-1, 0, 1, 1, [(-INF, INF, SEW)]))
    add("case1 a<0 b=0 x0<0", *_case1(-1, 0, -1, 1, [(-INF, INF, ATT)]))
    # yc = y0 - (a/b) x0
    add("case1 b>0", *_case1(1, 1, 2, 2, [(-INF, 0.0, SEW), (0.0, INF, ATT)], (0.0,)))
    add("case1 b<0", *_case1(1, -2, 1, 1, [(-INF, 1.5, ATT), (1.5, INF, SEW)], (1.5,)))

    # Case 2: two linear fields sharing z0 (minus a,b; plus c,d)
    add("case2 a=0 b>0 c=0 d>0", *_case2(0, 1, 0, 2, 1, -2, [(-INF, INF, SEW)], (-2.0,)))
    add("case2 a=0 b>0 c=0 d<0", *_case2(0, 1, 0, -1, 1, -2, [(-INF, -2.0, ATT), (-2.0, INF, REP)], (-2.0,)))
    add("case2 a>0 b>0 c=0 d<0 x0=0", *_case2(1, 1, 0, -1, 0, 1, [(-INF, 1.0, ATT), (1.0, INF, REP)], (1.0,)))
    add(
        "case2 a>0 b>0 c=0 d<0 x0>0",
        *_case2(1, 1, 0, -1, 1, 0, [(-INF, -1.0, ATT), (-1.0, 0.0, SEW), (0.0, INF, REP)], (-1.0, 0.0)),
    )
    add(
        "case2 a>0 b>0 c=0 d<0 x0<0",
        *_case2(1, 1, 0, -1, -1, 0, [(-INF, 0.0, ATT), (0.0, 1.0, SEW), (1.0, INF, REP)], (0.0, 1.0)),
    )

    # Case 3: z^2 above, linear below; sub-cases instantiated with a=1, b=+-2
    for a, b, x0, y0, tag in [
        (1, 2, 0, 1, "b>0 x0=0"),
        (1, 2, 1, 1, "b>0 x0>0"),
        (1, 2, -1, 1, "b>0 x0<0"),
        (1, -2, 0, 1, "b<0 x0=0"),
        (1, -2, 1, 1, "b<0 x0>0"),
        (1, -2, -1, 1, "b<0 x0<0"),
        (1, 0, 1, 1, "b=0 sgn(x0)=sgn(a)"),
        (1, 0, -1, 1, "b=0 sgn(x0)!=sgn(a)"),
    ]:
        add(f"case3 {tag}", *_case3(a, b, x0, y0))

    # Case 4: 1/z above, linear below
    add("case4 x0=0", *_case4(1, 1, 0, 1, [(-INF, 1.0, TAN), (1.0, INF, TAN)], (), (1.0,)))
    add("case4 b>0 x0>0", *_case4(1, 1, 1, -1, [(-INF, -2.0, ATT), (-2.0, INF, SEW)], (-2.0,)))
    add("case4 b>0 x0<0", *_case4(1, 1, -1, -1, [(-INF, 0.0, SEW), (0.0, INF, REP)], (0.0,)))
    add("case4 b<0 x0>0", *_case4(1, -1, 1, -1, [(-INF, 0.0, SEW), (0.0, INF, ATT)], (0.0,)))
    add("case4 b<0 x0<0", *_case4(1, -1, -1, -1, [(-INF, -2.0, REP), (-2.0, INF, SEW)], (-2.0,)))

    # Case 5: z^2/(1+z) above, linear below, both centred on the line
    add("case5 b>0", *_case5(1, 1, 1, [(-INF, 1.0, ATT), (1.0, INF, SEW)]))
    add("case5 b<0", *_case5(1, -1, 1, [(-INF, 1.0, SEW), (1.0, INF, ATT)]))
    return rows


ROWS = _rows()


def check_row(row: Row, report) -> list[str]:
    """Return a list of mismatches between ``report`` and the row's closed forms."""
    problems = []
    tol = 1e-8
    expected_t = sorted(t for t in row.tangencies if LO < t < HI)
    got_t = sorted(report.tangency_points)
    if len(got_t) != len(expected_t) or any(abs(g - e) > tol for g, e in zip(got_t, expected_t)):
        problems.append(f"tangencies {got_t} != {expected_t}")
    expected_s = sorted(row.singular)
    got_s = sorted(report.singular_points)
    if len(got_s) != len(expected_s) or any(abs(g - e) > tol for g, e in zip(got_s, expected_s)):
        problems.append(f"singular points {got_s} != {expected_s}")
    # every reported boundary must be one of the closed-form endpoints
    ends = {e for lo, hi, _ in row.segments for e in (lo, hi) if math.isfinite(e)}
    for seg in report.segments:
        for e in (seg.lo, seg.hi):
            if e in (LO, HI):
                continue
            if not any(abs(e - x) <= tol for x in ends):
                problems.append(f"boundary {e!r} is not a closed-form endpoint")
    # every non-empty expected segment must carry its class throughout
    for lo, hi, cls in row.segments:
        lo, hi = max(lo, LO), min(hi, HI)
        if not hi > lo:
            continue
        for frac in (0.01, 0.25, 0.5, 0.75, 0.99):
            s = lo + frac * (hi - lo)
            if any(abs(s - t) < 1e-6 for t in expected_t):
                continue
            got = report.class_at(s)
            if got is not cls:
                problems.append(f"class at {s:.4f} is {got} not {cls.value}")
    return problems
