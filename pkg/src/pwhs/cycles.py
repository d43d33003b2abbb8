"""Limit cycles and homoclinic orbits of systems glued along ``Im z = 0``.

Every construction here composes two half-plane landing maps into a return
map on the real axis.  Where the landing maps are known in closed form
(linear halves, and halves that are symmetric about the imaginary axis) the
return map is affine and its fixed point is explicit; the orbit is then
rebuilt numerically and checked for closure.  For other systems the fixed
point is found by shooting on the displacement ``Pi(s) - s``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .complexfield import FieldSpec, Linear, Pole, Power
from .errors import (
    ConditionViolated,
    DegenerateParameters,
    IntegrationFailure,
    NoAdmissibleCycle,
    NoSignChange,
    PreconditionViolation,
    TableRowMismatch,
)
from .flow import (
    Event,
    EventKind,
    IntegratorOptions,
    Mode,
    Sample,
    Trajectory,
    follow,
    half_return,
    half_return_path,
)
from .switching import HORIZONTAL, TOL, PWSystem

CLOSURE_TOL = 1e-6
_EPS4 = 4 * np.finfo(float).eps


def _sgn(x: float) -> int:
    return int(x > 0) - int(x < 0)


def _stability(derivative: float | None) -> str:
    if derivative is None or abs(derivative) == 1.0:
        return "none"
    return "stable" if abs(derivative) < 1.0 else "unstable"


@dataclass(frozen=True)
class PoincareResult:
    """Return map on the section, ``Pi(s) = A s + B`` when known in closed form."""

    A: float | None
    B: float | None
    fixed_point: float | None
    derivative: float | None
    stability: str
    admissible: bool = True


@dataclass(frozen=True)
class ShootingResult:
    fixed_point: float
    derivative: float
    stability: str
    displacement_lo: float
    displacement_hi: float
    residual: float


@dataclass
class CycleResult:
    poincare: PoincareResult
    orbit: Trajectory
    period: float
    closure: float
    system: PWSystem
    section_side: str
    w0: float  # the closed-form expression as printed for this family
    admissible_segment: tuple[float, float]
    shooting: ShootingResult | None = None

    @property
    def fixed_point(self) -> float | None:
        return self.poincare.fixed_point

    @property
    def stability(self) -> str:
        return self.poincare.stability


# -- generic machinery --------------------------------------------------------------

def entry_side(sys: PWSystem, s: float) -> str:
    """The side whose field leaves the line into its own half-plane at ``s``."""
    p = sys.line.point(s)
    if sys.line.normal_part(sys.plus(p)) > TOL:
        return "plus"
    if sys.line.normal_part(sys.minus(p)) < -TOL:
        return "minus"
    raise PreconditionViolation(f"no field leaves the line at s={s!r}")


def _other(side: str) -> str:
    return "minus" if side == "plus" else "plus"


def return_map(sys: PWSystem, s: float, first_side: str, opts: IntegratorOptions | None = None) -> float:
    """Composition of the two half-plane landing maps, starting on ``first_side``."""
    s1, _ = half_return(sys, first_side, s, opts)
    s2, _ = half_return(sys, _other(first_side), s1, opts)
    return s2


def closed_orbit(
    sys: PWSystem, s_star: float, first_side: str, opts: IntegratorOptions | None = None
) -> tuple[Trajectory, float, float]:
    """Orbit through the section point ``s_star``: (trajectory, period, closure gap)."""
    first = half_return_path(sys, first_side, s_star, opts)
    second = half_return_path(sys, _other(first_side), first.s_end, opts)
    mode1 = Mode.FREE_PLUS if first_side == "plus" else Mode.FREE_MINUS
    mode2 = Mode.FREE_MINUS if first_side == "plus" else Mode.FREE_PLUS
    traj = Trajectory()
    for t, z in first.samples:
        traj.samples.append(Sample(t, z, mode1))
    traj.events.append(Event(first.time, EventKind.CROSSING, first.samples[-1][1]))
    for t, z in second.samples[1:]:
        traj.samples.append(Sample(first.time + t, z, mode2))
    traj.events.append(Event(first.time + second.time, EventKind.CROSSING, second.samples[-1][1]))
    line = sys.line
    closure = abs(line.point(second.s_end) - line.point(s_star))
    return traj, first.time + second.time, closure


def shooting_fixed_point(
    sys: PWSystem,
    bracket: tuple[float, float],
    opts: IntegratorOptions | None = None,
    first_side: str | None = None,
    secant_step: float = 1e-6,
) -> ShootingResult:
    """Fixed point of the return map inside ``bracket`` by root-finding on ``Pi(s) - s``.

    The derivative is a centered secant of ``Pi`` with step ``secant_step``.
    """
    lo, hi = map(float, bracket)
    side = first_side or entry_side(sys, lo)

    def disp(s):
        return return_map(sys, s, side, opts) - s

    try:
        d_lo, d_hi = disp(lo), disp(hi)
        if d_lo * d_hi > 0:
            raise NoSignChange(f"displacement has the same sign at both ends ({d_lo:.3e}, {d_hi:.3e})")
        w = brentq(disp, lo, hi, xtol=1e-13, rtol=_EPS4) if d_lo * d_hi < 0 else (lo if d_lo == 0 else hi)
        res = disp(w)
        deriv = (return_map(sys, w + secant_step, side, opts) - return_map(sys, w - secant_step, side, opts)) / (
            2 * secant_step
        )
    except (IntegrationFailure, PreconditionViolation) as exc:
        raise IntegrationFailure(f"shooting failed: {exc}") from exc
    return ShootingResult(w, deriv, _stability(deriv), d_lo, d_hi, abs(res))


def fixed_points_in(
    sys: PWSystem,
    segment: tuple[float, float],
    first_side: str,
    seeds: int = 50,
    opts: IntegratorOptions | None = None,
) -> list[float]:
    """Scan ``seeds`` interior points of ``segment`` and refine every sign change of the displacement."""
    lo, hi = segment
    grid = np.linspace(lo, hi, seeds + 2)[1:-1]
    vals: list[float | None] = []
    for s in grid:
        try:
            vals.append(return_map(sys, s, first_side, opts) - s)
        except (IntegrationFailure, PreconditionViolation):
            vals.append(None)
    found = []
    for (a, da), (b, db) in zip(zip(grid[:-1], vals[:-1]), zip(grid[1:], vals[1:])):
        if da is None or db is None:
            continue
        if da == 0.0:
            found.append(float(a))
        elif da * db < 0:
            found.append(shooting_fixed_point(sys, (a, b), opts, first_side).fixed_point)
    if vals and vals[-1] == 0.0:
        found.append(float(grid[-1]))
    return found


def _finish(
    sys: PWSystem,
    pr: PoincareResult,
    side: str,
    w0: float,
    segment: tuple[float, float],
    opts: IntegratorOptions | None,
    shoot: bool,
) -> CycleResult:
    try:
        orbit, period, closure = closed_orbit(sys, pr.fixed_point, side, opts)
    except (IntegrationFailure, PreconditionViolation) as exc:
        raise NoAdmissibleCycle(f"closed-form fixed point {pr.fixed_point!r} is not realized: {exc}") from exc
    if closure > CLOSURE_TOL:
        raise NoAdmissibleCycle(f"orbit through {pr.fixed_point!r} fails to close (gap {closure:.2e})")
    result = CycleResult(pr, orbit, period, closure, sys, side, w0, segment)
    if shoot:
        s = pr.fixed_point
        half = 0.25 * min(s - segment[0], segment[1] - s)
        result.shooting = shooting_fixed_point(sys, (s - half, s + half), opts, side)
    return result


# -- piecewise linear ----------------------------------------------------------------

def linear_system(a: float, b: float, c: float, d: float, x0: float) -> PWSystem:
    """``(a+ib)(z-x0)`` above the real axis, ``(c+id)z`` below."""
    return PWSystem(Linear(a, b, x0), Linear(c, d, 0.0), HORIZONTAL)


def linear_w0(a: float, b: float, c: float, d: float, x0: float) -> float:
    """The fixed-point expression as printed for the two rotation senses."""
    ea, s = math.exp(a * math.pi / b), a / b + c / d
    if b > 0:
        return math.exp(c * math.pi / d) * (1 + ea) * x0 / (-1 + math.exp(s * math.pi))
    return (1 + ea) * x0 / (-1 + math.exp(s * math.pi))


def linear_poincare(a: float, b: float, c: float, d: float, x0: float) -> PoincareResult:
    """Return map of :func:`linear_system` on the real axis, section at the start of the upper arc.

    For ``b, d > 0`` the section point is the printed ``w0``; for ``b, d < 0``
    the orbit starts the upper arc at ``-w0``, and that signed value is what
    ``fixed_point`` holds.
    """
    if b == 0 or d == 0 or x0 == 0:
        raise DegenerateParameters("b, d and x0 must all be nonzero for a limit cycle")
    if _sgn(b) != _sgn(d):
        raise DegenerateParameters("b and d must have the same sign: half-turns of opposite senses do not compose")
    sg = _sgn(b)
    ratio = a / b + c / d
    A = math.exp(sg * ratio * math.pi)
    B = -x0 * math.exp(sg * c * math.pi / d) * (math.exp(sg * a * math.pi / b) + 1)
    if ratio == 0:
        return PoincareResult(A, B, None, 1.0, "none", admissible=False)
    p = B / (1 - A)
    z1 = x0 - (p - x0) * math.exp(sg * a * math.pi / b)  # landing of the upper arc
    admissible = sg * (p - x0) > 0 and sg * z1 < 0
    return PoincareResult(A, B, p, A, _stability(A), admissible)


_TABLE_GENERIC = [
    (1, 1, 1, 1, 1),
    (-1, 1, -1, 1, -1),
    (-1, -1, -1, -1, 1),
    (1, -1, 1, -1, -1),
    (1, 1, -1, 1, "s"),
    (-1, 1, 1, 1, "s"),
    (-1, -1, 1, -1, "s"),
    (1, -1, -1, -1, "s"),
]
_TABLE_ZERO = [
    (0, 1, 1, 1, 1),
    (0, 1, -1, 1, -1),
    (0, -1, 1, -1, -1),
    (0, -1, -1, -1, 1),
    (1, 1, 0, 1, 1),
    (-1, 1, 0, 1, -1),
    (-1, -1, 0, -1, 1),
    (1, -1, 0, -1, -1),
]


def corollary_table_check(a: float, b: float, c: float, d: float, x0: float) -> bool:
    """Whether the sign pattern of ``(a, b, c, d, x0)`` is a row of the uniqueness tables.

    ``"s"`` in a row means ``sgn(x0) = sgn(a/b + c/d)``.
    """
    if b == 0 or d == 0:
        return False
    ratio = a / b + c / d
    if ratio == 0:
        return False
    pattern = (_sgn(a), _sgn(b), _sgn(c), _sgn(d))
    for row in _TABLE_GENERIC + _TABLE_ZERO:
        if row[:4] != pattern:
            continue
        want = _sgn(ratio) if row[4] == "s" else row[4]
        if _sgn(x0) == want:
            return True
    return False


def linear_cycle(
    a: float, b: float, c: float, d: float, x0: float, opts: IntegratorOptions | None = None, shoot: bool = True
) -> CycleResult:
    pr = linear_poincare(a, b, c, d, x0)
    if pr.fixed_point is None:
        raise NoAdmissibleCycle("a/b + c/d = 0: the return map has no fixed point")
    if not pr.admissible:
        raise NoAdmissibleCycle(f"fixed point {pr.fixed_point!r} does not give an orbit through both half-planes")
    sys = linear_system(a, b, c, d, x0)
    p = pr.fixed_point
    # starts s whose upper arc lands on the far side of the origin: measured as
    # the distance sg*(s - x0) from the focus, this is an open half-line
    sg = 1 if b > 0 else -1
    d_lo = max(0.0, sg * x0 * math.exp(-sg * a * math.pi / b))
    d_p = sg * (p - x0)
    ends = sorted((x0 + sg * d_lo, x0 + sg * (d_lo + 4 * (d_p - d_lo))))
    segment = (ends[0], ends[1])
    return _finish(sys, pr, "plus", linear_w0(a, b, c, d, x0), segment, opts, shoot)


# -- power and pole normal forms --------------------------------------------------------

def _cot(x: float) -> float:
    return math.cos(x) / math.sin(x)


def _check_m(n: int, m: int) -> None:
    if m != n % 2:
        raise ConditionViolated(f"premultiplier must be i^{n % 2} for n={n} (got m={m})")


def _need(cond: bool, what: str) -> None:
    if not cond:
        raise ConditionViolated(what)


def zn_system(n: int, m: int, a: float, b: float, d: float, y0: float, x0: float = 0.0) -> PWSystem:
    """``i^m (z + z0)^n`` above the real axis, ``(a+ib)(z-d)`` below, with ``z0 = x0 + i y0``."""
    return PWSystem(Power(n, -complex(x0, y0), m), Linear(a, b, d), HORIZONTAL)


def zn_cycle(
    n: int,
    m: int,
    a: float,
    b: float,
    d: float,
    y0: float,
    x0: float = 0.0,
    opts: IntegratorOptions | None = None,
    shoot: bool = True,
) -> CycleResult:
    """Stable cycle of :func:`zn_system` when the parameters satisfy the row for ``n``.

    ``x0`` may be nonzero only for ``n = 2``.
    """
    if n < 2:
        raise ConditionViolated("n must be at least 2")
    _check_m(n, m)
    _need(y0 > 0, "y0 > 0")
    ea = math.exp(a * math.pi / b) if b else math.nan
    if n == 2:
        _need(a < 0 < b, "a < 0 < b")
        _need(d > -x0, "d > -x0")
        w0 = (d + ea * (d + 2 * x0)) / (1 - ea)
        A, B = ea, d + (d + 2 * x0) * ea
        fixed = w0
        lo = max(-x0, -2 * x0 - d)
        segment = (lo, fixed + 3 * (fixed - lo))
    elif n % 4 in (0, 3):
        _need(a < 0 and b < 0 and d < 0, "a, b, d < 0")
        _need(x0 == 0, "x0 = 0")
        w0 = d * (1 + ea) / (1 - ea)
        bound = _cot(n * math.pi / (2 * (n - 1))) * y0
        _need(bound < -w0 < 0, f"cot(n pi/(2(n-1))) y0 = {bound:.6g} < -d(1+e^(a pi/b))/(1-e^(a pi/b)) = {-w0:.6g} < 0")
        A, B = 1 / ea, d * (1 + 1 / ea)
        fixed = -w0
        segment = (bound, 0.0)
    else:
        _need(n >= 5, "n = 4k-2 needs k > 1")
        _need(a < 0 < b and d > 0, "a < 0 < b and d > 0")
        _need(x0 == 0, "x0 = 0")
        w0 = d * (1 + ea) / (1 - ea)
        bound = _cot((n - 2) * math.pi / (2 * (n - 1))) * y0
        _need(0 < w0 < bound, f"0 < d(1+e^(a pi/b))/(1-e^(a pi/b)) = {w0:.6g} < cot((n-2) pi/(2(n-1))) y0 = {bound:.6g}")
        A, B = ea, d * (1 + ea)
        fixed = w0
        segment = (0.0, bound)
    pr = PoincareResult(A, B, fixed, A, _stability(A))
    return _finish(zn_system(n, m, a, b, d, y0, x0), pr, "plus", w0, segment, opts, shoot)


def pole_system(n: int, m: int, a: float, b: float, d: float, y0: float) -> PWSystem:
    """``(a+ib)(z-d)`` above the real axis, ``i^m / (z + i y0)^n`` below."""
    return PWSystem(Linear(a, b, d), Pole(n, -1j * y0, m), HORIZONTAL)


def pole_cycle(
    n: int,
    m: int,
    a: float,
    b: float,
    d: float,
    y0: float,
    opts: IntegratorOptions | None = None,
    shoot: bool = True,
) -> CycleResult:
    """Stable cycle of :func:`pole_system`; the section sits where the lower arc starts."""
    if n < 1:
        raise ConditionViolated("n must be at least 1")
    _check_m(n, m)
    _need(y0 > 0, "y0 > 0")
    ea = math.exp(a * math.pi / b) if b else math.nan
    if n % 4 in (2, 3):
        _need(a < 0 and b < 0, "a, b < 0")
        _need(d > 0, "d > 0")
        w0 = d * (1 + ea) / (-1 + ea)
        bound = _cot(n * math.pi / (2 * (n + 1))) * y0
        _need(0 < w0 < bound, f"0 < d(1+e^(a pi/b))/(-1+e^(a pi/b)) = {w0:.6g} < cot(n pi/(2(n+1))) y0 = {bound:.6g}")
        A, B = 1 / ea, d * (1 + 1 / ea)
        fixed = w0
        segment = (0.0, bound)
    else:
        _need(a < 0 < b, "a < 0 < b")
        _need(d < 0, "d < 0")
        w0 = d * (1 + ea) / (-1 + ea)
        bound = _cot((n + 2) * math.pi / (2 * (n + 1))) * y0
        _need(bound < -w0 < 0, f"cot((n+2) pi/(2(n+1))) y0 = {bound:.6g} < -d(1+e^(a pi/b))/(-1+e^(a pi/b)) = {-w0:.6g} < 0")
        A, B = ea, d * (1 + ea)
        fixed = -w0
        segment = (bound, 0.0)
    pr = PoincareResult(A, B, fixed, A, _stability(A))
    return _finish(pole_system(n, m, a, b, d, y0), pr, "minus", w0, segment, opts, shoot)


# -- homoclinic orbits ---------------------------------------------------------------------

@dataclass
class HomoclinicResult:
    family: str
    endpoints: tuple[float, float]  # where the two bounding rays meet the real axis
    arrival: float  # endpoint where the lower orbit reaches the axis
    departure: float  # endpoint where it leaves again
    arc_radius: float
    ray_angles: tuple[float, float]
    orbit: np.ndarray  # stitched polyline ray - arc - ray
    closure: float
    system: PWSystem


def homoclinic_rays(n: int, family: str) -> tuple[float, float]:
    """Angles, about the lower field's center, of the two rays bounding the loop."""
    if family == "PoleFamily":
        return n * math.pi / (2 * (n + 1)), (n + 2) * math.pi / (2 * (n + 1))
    if family == "PowerFamily":
        return (n - 2) * math.pi / (2 * (n - 1)), n * math.pi / (2 * (n - 1))
    raise ConditionViolated(f"family must be PoleFamily or PowerFamily, got {family!r}")


def homoclinic_lower_field(n: int, m: int, y0: float, family: str) -> FieldSpec:
    if family == "PoleFamily":
        return Pole(n, -1j * y0, m)
    return Power(n, -1j * y0, m)


def homoclinic_required_sign(n: int, m: int, family: str, y0: float = 1.0) -> int:
    """Sign of ``b`` for which the upper arc runs with the flow on both rays.

    The lower field moves radially on each bounding ray.  The arc has to start
    where the lower orbit arrives at the axis and end where it leaves, so the
    rotation sense of ``ibz`` is fixed by the lower field at the right endpoint.
    """
    f = homoclinic_lower_field(n, m, y0, family)
    ta, tb = homoclinic_rays(n, family)
    up_a = f(y0 * _cot(ta)).imag
    up_b = f(y0 * _cot(tb)).imag
    if _sgn(up_a) == _sgn(up_b) or up_a == 0:
        raise TableRowMismatch(f"n={n}: the lower field does not enter and leave along the rays")
    return _sgn(up_a)


def homoclinic(
    n: int, m: int, b: float, y0: float, family: str, opts: IntegratorOptions | None = None
) -> HomoclinicResult:
    """Loop made of two invariant rays of the lower field and a half circle of ``ibz``."""
    ta, tb = homoclinic_rays(n, family)
    if family == "PowerFamily" and n <= 2:
        raise TableRowMismatch("the power family needs n > 2")
    if n < 1:
        raise TableRowMismatch("n must be at least 1")
    if m != n % 2:
        raise TableRowMismatch(f"premultiplier must be i^{n % 2} for n={n} (got m={m})")
    if not y0 > 0:
        raise TableRowMismatch("y0 must be positive")
    if b == 0:
        raise TableRowMismatch("b must be nonzero")
    need = homoclinic_required_sign(n, m, family, y0)
    if _sgn(b) != need:
        raise TableRowMismatch(f"n={n} (n mod 4 = {n % 4}) in {family} needs b {'>' if need > 0 else '<'} 0")

    opts = opts or IntegratorOptions()
    center = -1j * y0
    xa, xb = y0 * _cot(ta), y0 * _cot(tb)
    arrival, departure = (xa, xb) if need > 0 else (xb, xa)
    lower = homoclinic_lower_field(n, m, y0, family)
    sys = PWSystem(Linear(0.0, b, 0.0), lower, HORIZONTAL)

    # incoming ray: from halfway along it up to the axis
    u_in = (arrival - center) / abs(arrival - center)
    status, ray_in = follow(lower, center + 0.5 * abs(arrival - center) * u_in, opts, stop=lambda z: -z.imag)
    if status != "event":
        raise IntegrationFailure(f"incoming ray orbit did not reach the axis ({status})")
    err_in = abs(ray_in[-1][1].real - arrival)

    # upper half circle
    arc = half_return_path(sys, "plus", arrival, opts)
    err_arc = abs(arc.s_end - departure)

    # outgoing ray: followed down to half its length, mirroring the incoming leg
    r_out = abs(departure - center)
    u_out = (departure - center) / r_out
    status, ray_out = follow(
        lower, complex(departure, 0.0), replace(opts, t_max=min(opts.t_max, 50.0)),
        stop=lambda z: abs(z - center) - 0.5 * r_out,
    )
    if status != "event":
        raise IntegrationFailure(f"outgoing ray orbit does not approach the center ({status})")
    off_ray = max(abs(((z - center) * u_out.conjugate()).imag) for _, z in ray_out)

    orbit = np.array([z for _, z in ray_in] + [z for _, z in arc.samples[1:]] + [z for _, z in ray_out[1:]])
    return HomoclinicResult(
        family=family,
        endpoints=(xa, xb),
        arrival=arrival,
        departure=departure,
        arc_radius=abs(xa),
        ray_angles=(ta, tb),
        orbit=orbit,
        closure=max(err_in, err_arc, off_ray),
        system=sys,
    )


__all__ = [
    "CLOSURE_TOL",
    "PoincareResult",
    "ShootingResult",
    "CycleResult",
    "HomoclinicResult",
    "entry_side",
    "return_map",
    "closed_orbit",
    "shooting_fixed_point",
    "fixed_points_in",
    "linear_system",
    "linear_w0",
    "linear_poincare",
    "corollary_table_check",
    "linear_cycle",
    "zn_system",
    "zn_cycle",
    "pole_system",
    "pole_cycle",
    "homoclinic_rays",
    "homoclinic_lower_field",
    "homoclinic_required_sign",
    "homoclinic",
]
