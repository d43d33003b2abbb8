"""Orbits: closed forms where they exist, Filippov integration otherwise.

The numerical integrator is a Dormand-Prince 5(4) pair with step-size control.
Inside an open half-plane it follows the active field; when the normal
coordinate changes sign the crossing is pinned down by bisecting the step
fraction, and the point on the line decides what comes next (cross, slide,
stop).  Sliding motion is integrated as a one-dimensional ODE for the line
parameter driven by the Filippov convex combination.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, NamedTuple

import numpy as np

from .complexfield import FieldSpec, Pole, Power
from .errors import (
    EvaluationAtSingularity,
    HitSingularity,
    NoReturn,
    OrbitUnboundedAtAngle,
    PreconditionViolation,
    StartAtDoubleTangency,
    StepSizeUnderflow,
    UnsupportedVariant,
    ValidationError,
)
from .switching import (
    TOL,
    PWSystem,
    RegionClass,
    classify_components,
    sliding_tangential,
)


@dataclass(frozen=True)
class IntegratorOptions:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = 0.1
    event_tol: float = 1e-11
    singularity_standoff: float = 1e-6
    t_max: float = 1e3
    escape_radius: float = 1e6

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "max_step", "event_tol", "singularity_standoff", "t_max", "escape_radius"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValidationError(f"{name} must be a positive finite number, got {v!r}")


class Mode(str, Enum):
    FREE_PLUS = "FreePlus"
    FREE_MINUS = "FreeMinus"
    SLIDING = "Sliding"


class EventKind(str, Enum):
    CROSSING = "Crossing"
    SLIDE_ENTRY = "SlideEntry"
    SLIDE_EXIT = "SlideExit"
    TANGENCY_HIT = "TangencyHit"
    SINGULARITY_STOP = "SingularityStop"
    ESCAPE = "Escape"


class Sample(NamedTuple):
    t: float
    z: complex
    mode: Mode


class Event(NamedTuple):
    t: float
    kind: EventKind
    z: complex


@dataclass
class Trajectory:
    samples: list[Sample] = field(default_factory=list)
    events: list[Event] = field(default_factory=list)

    @property
    def t(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    @property
    def z(self) -> np.ndarray:
        return np.array([s.z for s in self.samples], dtype=complex)

    def csv_rows(self) -> list[tuple[float, float, float, str]]:
        return [(s.t, s.z.real, s.z.imag, s.mode.value) for s in self.samples]


# -- closed forms ----------------------------------------------------------------------

def solve_linear(a: float, b: float, z0: complex, w: complex, t: float) -> complex:
    """Solution of ``z' = (a+ib)(z - z0)`` with ``z(0) = w``."""
    return (w - z0) * math.exp(a * t) * complex(math.cos(b * t), math.sin(b * t)) + z0


class PolarKind(str, Enum):
    POWER_EVEN = "PowerEven"  # z**n
    POWER_ODD_TIMES_I = "PowerOddTimesI"  # i z**n
    POLE_EVEN = "PoleEven"  # 1/z**n
    POLE_ODD_TIMES_I = "PoleOddTimesI"  # i/z**n


def polar_orbit_radius(kind: PolarKind | str, n: int, theta: float, C: float) -> float:
    """Radius of the orbit with constant ``C`` at polar angle ``theta`` about the center."""
    kind = PolarKind(kind)
    if kind is PolarKind.POWER_EVEN:
        return abs(math.sin((n - 1) * theta)) ** (1 / (n - 1)) * math.exp(C)
    if kind is PolarKind.POWER_ODD_TIMES_I:
        return abs(math.cos((n - 1) * theta)) ** (1 / (n - 1)) * math.exp(C)
    trig = math.sin if kind is PolarKind.POLE_EVEN else math.cos
    s = abs(trig((n + 1) * theta))
    if s < 1e-14:
        raise OrbitUnboundedAtAngle(f"orbit is unbounded at theta={theta!r}")
    return math.exp(C) / s ** (1 / (n + 1))


def polar_orbit_constant(kind: PolarKind | str, n: int, w: complex) -> float:
    """The constant ``C`` of the orbit through the offset ``w`` from the center."""
    r, theta = abs(w), cmath.phase(w)
    return math.log(r / polar_orbit_radius(kind, n, theta, 0.0))


def invariant_rays(f: FieldSpec) -> list[float]:
    """Angles in ``[0, 2pi)`` of the rays through the center that the flow preserves."""
    if isinstance(f, Power):
        k = f.n - 1
    elif isinstance(f, Pole):
        k = f.n + 1
    else:
        raise UnsupportedVariant(f"invariant rays are defined for Power and Pole, not {type(f).__name__}")
    shift = 0.5 if f.m else 0.0
    return [(j + shift) * math.pi / k for j in range(2 * k)]


# -- Dormand-Prince 5(4) ---------------------------------------------------------------

_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# fifth-order minus embedded fourth-order weights
_E1, _E3, _E4, _E5, _E6, _E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40


def _dopri_step(f: Callable[[complex], complex], y: complex, h: float, k1: complex):
    k2 = f(y + h * _A21 * k1)
    k3 = f(y + h * (_A31 * k1 + _A32 * k2))
    k4 = f(y + h * (_A41 * k1 + _A42 * k2 + _A43 * k3))
    k5 = f(y + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4))
    k6 = f(y + h * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5))
    y5 = y + h * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
    k7 = f(y5)
    err = h * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7)
    return y5, err, k7


class _Run(NamedTuple):
    status: str  # "event", "bounce", "t_max", "escape", "singular"
    t: float
    y: complex
    samples: list[tuple[float, complex]]


def _advance(
    rhs: Callable[[complex], complex],
    t0: float,
    y0: complex,
    t_end: float,
    opts: IntegratorOptions,
    g: Callable[[complex], float] | None = None,
    to_z: Callable[[complex], complex] = lambda y: y,
    poles: tuple[complex, ...] = (),
) -> _Run:
    """Integrate ``y' = rhs(y)`` until ``t_end`` or until ``g`` drops to zero.

    ``g`` is positive in the region being followed.  A crossing inside an
    accepted step is located by bisecting the step fraction, re-stepping from
    the start of the step each time.
    """
    t, y = t0, y0
    samples = [(t, y)]
    k1 = rhs(y)
    speed = abs(k1)
    h = min(opts.max_step, t_end - t, 1e-2 * (1 + abs(y)) / speed if speed > 0 else opts.max_step)
    g_old = g(y) if g else 1.0
    near = min((abs(to_z(y) - p) for p in poles), default=math.inf)
    while t < t_end:
        if t_end - t <= 1e-14 * max(1.0, abs(t_end)):
            break  # roundoff remainder of the window
        h = min(h, opts.max_step, t_end - t)
        if h <= 1e-15 * max(1.0, abs(t)):
            if near < 1e-2:
                return _Run("singular", t, y, samples)
            raise StepSizeUnderflow(f"step size underflow at t={t!r}, z={to_z(y)!r}")
        try:
            y_new, err, k7 = _dopri_step(rhs, y, h, k1)
        except EvaluationAtSingularity:
            h *= 0.25
            continue
        scale = opts.abs_tol + opts.rel_tol * max(abs(y), abs(y_new))
        en = abs(err) / scale
        if en > 1.0 or not math.isfinite(en):
            h *= max(0.2, 0.9 * en**-0.2) if math.isfinite(en) else 0.25
            continue

        if g is not None:
            g_new = g(y_new)
            if g_new <= 0.0 and g_old <= opts.event_tol:
                return _Run("bounce", t, y, samples)
            if g_new <= 0.0:
                lo, hi, y_hit = 0.0, 1.0, y_new
                for _ in range(60):
                    mid = 0.5 * (lo + hi)
                    y_mid = _dopri_step(rhs, y, mid * h, k1)[0]
                    g_mid = g(y_mid)
                    if abs(g_mid) <= opts.event_tol:
                        hi, y_hit = mid, y_mid
                        break
                    if g_mid > 0:
                        lo = mid
                    else:
                        hi, y_hit = mid, y_mid
                t_hit = t + hi * h
                samples.append((t_hit, y_hit))
                return _Run("event", t_hit, y_hit, samples)
            if g_new <= opts.event_tol < g_old:
                samples.append((t + h, y_new))
                return _Run("event", t + h, y_new, samples)
            g_old = g_new

        t, y, k1 = t + h, y_new, k7
        samples.append((t, y))
        z = to_z(y)
        if abs(z) > opts.escape_radius:
            return _Run("escape", t, y, samples)
        near = min((abs(z - p) for p in poles), default=math.inf)
        if near < opts.singularity_standoff:
            return _Run("singular", t, y, samples)
        h *= min(5.0, 0.9 * en**-0.2) if en > 0 else 5.0
    return _Run("t_max", t, y, samples)


# -- Filippov integration --------------------------------------------------------------

def _free_side(up: float, um: float, tol: float) -> Mode | None:
    """Side to follow from a line point where no sliding takes place."""
    if up > tol and um >= -tol:
        return Mode.FREE_PLUS
    if um < -tol and up <= tol:
        return Mode.FREE_MINUS
    if abs(up) <= tol and um > tol:
        return Mode.FREE_PLUS
    if abs(um) <= tol and up < -tol:
        return Mode.FREE_MINUS
    return None


def _start_mode(sys: PWSystem, p: complex, tol: float) -> Mode:
    up, um = sys.line.normal_part(sys.plus(p)), sys.line.normal_part(sys.minus(p))
    if abs(up) <= tol and abs(um) <= tol:
        raise StartAtDoubleTangency(f"{p!r} is a tangency of both fields")
    cls = classify_components(up, um, tol)
    if cls in (RegionClass.SLIDING_ATTRACT, RegionClass.SLIDING_REPEL):
        return Mode.SLIDING
    return _free_side(up, um, tol)


def integrate(sys: PWSystem, z_init: complex, opts: IntegratorOptions | None = None) -> Trajectory:
    """Forward Filippov orbit of ``sys`` from ``z_init``.

    Stops at ``opts.t_max``, on escape beyond ``opts.escape_radius``, within
    ``opts.singularity_standoff`` of a pole, or at a point where both normal
    components vanish.  Sliding can only be entered from a free orbit on an
    attracting segment; a start on a repelling segment slides along it.
    """
    opts = opts or IntegratorOptions()
    line = sys.line
    z = complex(z_init)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValidationError("initial point must be finite")
    traj = Trajectory()
    t = 0.0

    if sys.plus == sys.minus:
        # one smooth field: the line is not a discontinuity
        run = _advance(sys.plus, t, z, opts.t_max, opts, poles=sys.plus.singularities())
        for s, p in run.samples:
            traj.samples.append(Sample(s, p, Mode.FREE_PLUS if line.normal(p) >= 0 else Mode.FREE_MINUS))
        if run.status == "escape":
            traj.events.append(Event(run.t, EventKind.ESCAPE, run.y))
        elif run.status == "singular":
            traj.events.append(Event(run.t, EventKind.SINGULARITY_STOP, run.y))
        return traj

    def comps(p):
        return line.normal_part(sys.plus(p)), line.normal_part(sys.minus(p))

    if abs(line.normal(z)) <= opts.event_tol:
        z = line.project(z)
        mode = _start_mode(sys, z, TOL)
    else:
        mode = Mode.FREE_PLUS if line.normal(z) > 0 else Mode.FREE_MINUS
    repelling = False
    if mode is Mode.SLIDING:
        up, um = comps(z)
        repelling = up > 0
    traj.samples.append(Sample(t, z, mode))
    stalls = 0

    while t < opts.t_max:
        if mode is Mode.SLIDING:
            sigma = -1.0 if repelling else 1.0

            def rhs(y, _s=sigma):
                p = line.point(y.real)
                a, b = sys.plus(p), sys.minus(p)
                v = sliding_tangential(line.normal_part(a), line.normal_part(b), line.tangential_part(a), line.tangential_part(b))
                return complex(v, 0.0)

            def g(y, _s=sigma):
                up, um = comps(line.point(y.real))
                return min(-_s * up, _s * um)

            poles = sys.plus.singularities() + sys.minus.singularities()
            run = _advance(rhs, t, complex(line.param(z), 0.0), opts.t_max, opts, g, lambda y: line.point(y.real), poles)
            z_end = line.point(run.y.real)
            samples = [(s, line.point(y.real)) for s, y in run.samples]
        else:
            f = sys.plus if mode is Mode.FREE_PLUS else sys.minus
            sigma = 1.0 if mode is Mode.FREE_PLUS else -1.0

            def g(y, _s=sigma):
                return _s * line.normal(y)

            run = _advance(f, t, z, opts.t_max, opts, g, poles=f.singularities())
            z_end = line.project(run.y) if run.status in ("event", "bounce") else run.y
            samples = run.samples
            if run.status == "event":
                samples = samples[:-1] + [(run.t, z_end)]

        for s, p in samples[1:]:
            traj.samples.append(Sample(s, p, mode))
        stalled = run.t - t <= opts.event_tol
        t, z = run.t, z_end

        if run.status == "t_max":
            break
        if run.status == "escape":
            traj.events.append(Event(t, EventKind.ESCAPE, z))
            break
        if run.status == "singular":
            traj.events.append(Event(t, EventKind.SINGULARITY_STOP, z))
            break

        stalls = stalls + 1 if stalled else 0
        if stalls > 4:
            traj.events.append(Event(t, EventKind.TANGENCY_HIT, z))
            break

        up, um = comps(z)
        if abs(up) <= TOL and abs(um) <= TOL:
            traj.events.append(Event(t, EventKind.TANGENCY_HIT, z))
            break
        cls = classify_components(up, um, TOL)

        if mode is Mode.SLIDING:
            # one normal component reached zero; the other one now decides the side
            other = um if -sigma * up <= sigma * um else up
            new = Mode.FREE_PLUS if other > 0 else Mode.FREE_MINUS
            traj.events.append(Event(t, EventKind.SLIDE_EXIT, z))
            mode, repelling = new, False
            continue

        if run.status == "bounce":
            # the field turned back at once: the orbit cannot stay on this side
            other = Mode.FREE_MINUS if mode is Mode.FREE_PLUS else Mode.FREE_PLUS
            if cls is RegionClass.SLIDING_ATTRACT:
                mode = Mode.SLIDING
                traj.events.append(Event(t, EventKind.SLIDE_ENTRY, z))
            elif _free_side(up, um, TOL) is other:
                mode = other
                traj.events.append(Event(t, EventKind.CROSSING, z))
            else:
                traj.events.append(Event(t, EventKind.TANGENCY_HIT, z))
                break
            continue

        if cls is RegionClass.SEWING:
            new = Mode.FREE_PLUS if up > 0 else Mode.FREE_MINUS
            kind = EventKind.CROSSING if new is not mode else EventKind.TANGENCY_HIT
            traj.events.append(Event(t, kind, z))
            mode = new
        elif cls is RegionClass.SLIDING_ATTRACT:
            traj.events.append(Event(t, EventKind.SLIDE_ENTRY, z))
            mode, repelling = Mode.SLIDING, False
        elif cls is RegionClass.SLIDING_REPEL:
            # forward orbits cannot reach a repelling segment transversally
            traj.events.append(Event(t, EventKind.TANGENCY_HIT, z))
            break
        else:
            own = up if mode is Mode.FREE_PLUS else um
            traj.events.append(Event(t, EventKind.TANGENCY_HIT, z))
            if abs(own) > TOL:
                # the other field is tangent here: follow the Filippov combination
                mode, repelling = Mode.SLIDING, False
    return traj


class HalfReturn(NamedTuple):
    s_end: float
    time: float
    samples: list[tuple[float, complex]]


def half_return_path(
    sys: PWSystem, side: str, s_start: float, opts: IntegratorOptions | None = None
) -> HalfReturn:
    """Follow one field from the line point ``s_start`` until it meets the line again."""
    opts = opts or IntegratorOptions()
    line = sys.line
    f = sys.field(side)
    sigma = 1.0 if side == "plus" else -1.0
    p = line.point(float(s_start))
    if sigma * line.normal_part(f(p)) <= TOL:
        raise PreconditionViolation(f"the {side} field at s={s_start!r} does not point into its half-plane")
    run = _advance(f, 0.0, p, opts.t_max, opts, lambda z: sigma * line.normal(z), poles=f.singularities())
    if run.status == "event":
        end = line.project(run.y)
        return HalfReturn(line.param(end), run.t, run.samples[:-1] + [(run.t, end)])
    if run.status == "singular":
        raise HitSingularity(f"orbit from s={s_start!r} ran into a singularity at t={run.t!r}")
    raise NoReturn(f"orbit from s={s_start!r} did not return to the line ({run.status})")


def half_return(
    sys: PWSystem, side: str, s_start: float, opts: IntegratorOptions | None = None
) -> tuple[float, float]:
    """Landing parameter and transit time of the ``side`` field started on the line."""
    hr = half_return_path(sys, side, s_start, opts)
    return hr.s_end, hr.time


def follow(
    f: FieldSpec,
    z0: complex,
    opts: IntegratorOptions | None = None,
    stop: Callable[[complex], float] | None = None,
) -> tuple[str, list[tuple[float, complex]]]:
    """Integrate a single smooth field, optionally until ``stop`` changes sign.

    ``stop`` must be positive at ``z0``.  Returns the final status and samples.
    """
    opts = opts or IntegratorOptions()
    run = _advance(f, 0.0, complex(z0), opts.t_max, opts, stop, poles=f.singularities())
    return run.status, run.samples


__all__ = [
    "IntegratorOptions",
    "Mode",
    "EventKind",
    "Sample",
    "Event",
    "Trajectory",
    "solve_linear",
    "PolarKind",
    "polar_orbit_radius",
    "polar_orbit_constant",
    "invariant_rays",
    "integrate",
    "HalfReturn",
    "half_return_path",
    "half_return",
    "follow",
]
