"""Smoothing a piecewise holomorphic system across its switching line.

The regularized field blends the two sides with a transition function of the
scaled normal coordinate.  Near the line the blend is not holomorphic unless
the two fields agree; :func:`holomorphy_defect` measures that.  In the
stretched coordinate ``xbar = normal / eps`` the blend becomes a slow-fast
system whose critical manifold reproduces Filippov sliding, and
:func:`transition_map_experiment` measures how orbits leave a visible fold.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.optimize import brentq

from .complexfield import Constant, FieldSpec, Linear, PlanarField, Pole, Power, Rational, cr_residual
from .errors import (
    IntegrationFailure,
    InvalidFieldSpec,
    NoCriticalPoint,
    PreconditionViolation,
    StencilHitsSingularity,
)
from .flow import IntegratorOptions, follow
from .switching import VERTICAL, PWSystem, normal_components, tangential_components


# -- transition functions ---------------------------------------------------------------

def _poly_st(t: float) -> float:
    if t >= 1.0:
        return 1.0
    if t <= -1.0:
        return -1.0
    return t * (3.0 - t * t) / 2.0


def _poly_st_d(t: float) -> float:
    return 1.5 * (1.0 - t * t) if -1.0 < t < 1.0 else 0.0


def _quintic(t: float) -> float:
    if t >= 1.0:
        return 1.0
    if t <= -1.0:
        return -1.0
    t2 = t * t
    return t * (15.0 - 10.0 * t2 + 3.0 * t2 * t2) / 8.0


def _quintic_d(t: float) -> float:
    if not -1.0 < t < 1.0:
        return 0.0
    s = 1.0 - t * t
    return 15.0 * s * s / 8.0


_KINDS = {
    # name: (phi, phi', flat order at +-1 or None for analytic)
    "PolyST": (_poly_st, _poly_st_d, 1),
    "Quintic": (_quintic, _quintic_d, 2),
    "Tanh": (math.tanh, lambda t: 1.0 / math.cosh(t) ** 2 if abs(t) < 350 else 0.0, None),
    "ArctanScaled": (lambda t: 2.0 / math.pi * math.atan(t), lambda t: 2.0 / (math.pi * (1.0 + t * t)), None),
}


@dataclass(frozen=True)
class TransitionFunction:
    """Monotone ``phi: R -> [-1, 1]``.

    ``PolyST`` and ``Quintic`` are constant outside ``[-1, 1]`` with ``order``
    vanishing derivatives at ``+-1``; ``Tanh`` and ``ArctanScaled`` are
    analytic and only approach ``+-1``.
    """

    kind: str = "PolyST"

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InvalidFieldSpec(f"unknown transition function {self.kind!r}; choose from {sorted(_KINDS)}")

    def __call__(self, t: float) -> float:
        return _KINDS[self.kind][0](t)

    def derivative(self, t: float) -> float:
        return _KINDS[self.kind][1](t)

    @property
    def order(self) -> int | None:
        return _KINDS[self.kind][2]

    @property
    def compact(self) -> bool:
        """Whether ``phi`` reaches ``+-1`` at ``t = +-1``."""
        return self.order is not None


# -- regularized field ----------------------------------------------------------------------

@dataclass(frozen=True)
class RegularizedSystem:
    base: PWSystem
    phi: TransitionFunction = field(default_factory=TransitionFunction)
    eps: float = 0.1

    def __post_init__(self):
        if not (self.eps > 0 and math.isfinite(self.eps)):
            raise PreconditionViolation("eps must be a positive finite number")

    def __call__(self, z: complex) -> complex:
        return reg_field(self, z)

    def singularities(self) -> tuple[complex, ...]:
        return tuple(self.base.plus.singularities()) + tuple(self.base.minus.singularities())


def reg_field(R: RegularizedSystem, z: complex) -> complex:
    """``(1+phi)/2 f+ + (1-phi)/2 f-`` with ``phi`` taken at ``normal(z)/eps``."""
    z = complex(z)
    ph = R.phi(R.base.line.normal(z) / R.eps)
    if ph == 1.0:
        return R.base.plus(z)
    if ph == -1.0:
        return R.base.minus(z)
    return 0.5 * (1.0 + ph) * R.base.plus(z) + 0.5 * (1.0 - ph) * R.base.minus(z)


def regularized_planar(R: RegularizedSystem) -> PlanarField:
    return PlanarField(u=lambda z: reg_field(R, z).real, v=lambda z: reg_field(R, z).imag, excluded=R.singularities())


def strip_box(R: RegularizedSystem, s_lo: float, s_hi: float, width: float = 1.0) -> tuple[float, float, float, float]:
    """``(xmin, xmax, ymin, ymax)`` covering ``|normal| <= width * eps`` over line parameters ``[s_lo, s_hi]``."""
    line, w = R.base.line, width * R.eps
    if line.vertical:
        return (line.offset - w, line.offset + w, s_lo, s_hi)
    return (s_lo, s_hi, line.offset - w, line.offset + w)


def holomorphy_defect(
    R: RegularizedSystem,
    box: tuple[float, float, float, float],
    grid: int | tuple[int, int] = 21,
    h: float | None = None,
) -> float:
    """Largest Cauchy-Riemann residual of the regularized field over a grid on ``box``.

    Grid points whose difference stencil meets a singularity are skipped.
    """
    nx, ny = (grid, grid) if isinstance(grid, int) else grid
    xmin, xmax, ymin, ymax = box
    step = h if h is not None else min(1e-5, 1e-3 * R.eps)
    pf = regularized_planar(R)
    worst = 0.0
    for x in np.linspace(xmin, xmax, nx):
        for y in np.linspace(ymin, ymax, ny):
            try:
                worst = max(worst, cr_residual(pf, complex(x, y), step))
            except StencilHitsSingularity:
                continue
    return worst


def sigma_gap(base: PWSystem, s_lo: float, s_hi: float, samples: int = 201) -> float:
    """``max |f+ - f-|`` along the line over ``[s_lo, s_hi]``, skipping singular points."""
    worst = 0.0
    for s in np.linspace(s_lo, s_hi, samples):
        p = base.line.point(float(s))
        try:
            worst = max(worst, abs(base.plus(p) - base.minus(p)))
        except ArithmeticError:
            continue
    return worst


# -- slow-fast system ----------------------------------------------------------------------------

class SlowFast(NamedTuple):
    """Critical manifold ``s -> xbar`` and reduced flow ``s -> ds/dt`` on it.

    ``layer(xbar, s)`` is ``eps * dxbar/dt`` of the fast subsystem.
    """

    critical: Callable[[float], float]
    reduced: Callable[[float], float]
    layer: Callable[[float, float], float]


def slow_fast(R: RegularizedSystem) -> SlowFast:
    base, phi = R.base, R.phi

    def comps(s: float):
        p = base.line.point(float(s))
        return normal_components(base, p), tangential_components(base, p)

    def layer(xbar: float, s: float) -> float:
        (u1, u2), _ = comps(s)
        ph = phi(xbar)
        return 0.5 * ((1 + ph) * u1 + (1 - ph) * u2)

    def critical(s: float) -> float:
        (u1, u2), _ = comps(s)
        if u1 * u2 >= 0:
            raise NoCriticalPoint(f"no sliding at s={s!r}: normal components {u1!r}, {u2!r}")

        def blend(xb):
            ph = phi(xb)
            return (1 + ph) * u1 + (1 - ph) * u2

        if phi.compact:
            lo, hi = -1.0, 1.0
        else:
            # analytic phi reaches the target value at a finite but possibly large xbar
            target = (u1 + u2) / (u2 - u1)
            lo, hi = -1.0, 1.0
            while phi(hi) <= target and hi < 1e8:
                hi *= 2.0
            while phi(lo) >= target and lo > -1e8:
                lo *= 2.0
        a, b = blend(lo), blend(hi)
        if a * b < 0:
            return float(brentq(blend, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps))
        if a == 0.0:
            return lo
        if b == 0.0:
            return hi
        cells = np.linspace(lo, hi, 33)
        vals = [blend(c) for c in cells]
        for c0, c1, v0, v1 in zip(cells[:-1], cells[1:], vals[:-1], vals[1:]):
            if v0 == 0.0:
                return float(c0)
            if v0 * v1 < 0:
                return float(brentq(blend, c0, c1, xtol=1e-15, rtol=4 * np.finfo(float).eps))
        raise NoCriticalPoint(f"blend does not change sign across the layer at s={s!r}")

    def reduced(s: float) -> float:
        xb = critical(s)
        _, (t1, t2) = comps(s)
        ph = phi(xb)
        return 0.5 * ((1 + ph) * t1 + (1 - ph) * t2)

    return SlowFast(critical, reduced, layer)


# -- transition past a visible fold ------------------------------------------------------------

CASES = ("LinearCase", "PowerCase", "PoleCase", "RationalCase")


def fold_case_field(case: str, params: dict) -> FieldSpec:
    z0 = complex(params["x0"], params.get("y0", 0.0))
    if case == "LinearCase":
        return Linear(params["a"], params["b"], z0)
    if case == "PowerCase":
        return Power(2, z0)
    if case == "PoleCase":
        return Pole(2, z0)
    if case == "RationalCase":
        return Rational(1.0, 2, z0)
    raise PreconditionViolation(f"case must be one of {CASES}, got {case!r}")


def fold_point(case: str, params: dict) -> float:
    """Height ``p*`` of the visible fold on ``Re z = 0``."""
    x0, y0 = params["x0"], params.get("y0", 0.0)
    if case == "LinearCase":
        return y0 - params["a"] / params["b"] * x0
    if case == "PowerCase":
        return y0 - x0
    if case == "PoleCase":
        return y0 + x0
    if case == "RationalCase":
        return (-math.sqrt(x0 * x0 - x0**4) + y0 + x0 * y0) / (1 + x0)
    raise PreconditionViolation(f"case must be one of {CASES}, got {case!r}")


def fold_alpha(case: str, params: dict) -> float:
    """Leading coefficient of the slope ``dx/dy`` of the plus orbits at the fold."""
    x0 = params["x0"]
    if case == "LinearCase":
        a, b = params["a"], params["b"]
        return b * b / ((a * a + b * b) * x0)
    if case == "PowerCase":
        return 1.0 / x0
    if case == "PoleCase":
        return -1.0 / x0
    if case == "RationalCase":
        return (1 + x0) ** 2 / x0
    raise PreconditionViolation(f"case must be one of {CASES}, got {case!r}")


def check_case(case: str, params: dict) -> None:
    x0 = params.get("x0")
    if x0 is None:
        raise PreconditionViolation("x0 is required")
    if case == "LinearCase":
        if "a" not in params or "b" not in params:
            raise PreconditionViolation("LinearCase needs a and b")
        if not (params["b"] < 0 and x0 > 0):
            raise PreconditionViolation("LinearCase needs b < 0 and x0 > 0")
    elif case == "PowerCase":
        if not x0 > 0:
            raise PreconditionViolation("PowerCase needs x0 > 0")
    elif case == "PoleCase":
        if not x0 < 0:
            raise PreconditionViolation("PoleCase needs x0 < 0")
    elif case == "RationalCase":
        if not 0 < x0 < 1:
            raise PreconditionViolation("RationalCase needs 0 < x0 < 1")
    else:
        raise PreconditionViolation(f"case must be one of {CASES}, got {case!r}")


@dataclass
class TransitionExperiment:
    case: str
    params: dict
    eps_grid: Sequence[float] = (1e-2, 1e-3, 1e-4)
    theta_grid: Sequence[float] = tuple(np.linspace(0.02, 0.1, 9))
    lam: float | None = None
    phi: TransitionFunction = field(default_factory=lambda: TransitionFunction("Quintic"))
    rho: float = 0.2
    entry_offset: float = 2.0  # start at normal = entry_offset * eps
    # filled in by transition_map_experiment
    landings: np.ndarray | None = None
    alpha_fit: np.ndarray | None = None
    alpha_formula: float | None = None

    @property
    def lam_star(self) -> float:
        n = self.phi.order
        return n / (2 * n - 1)

    @property
    def q(self) -> float:
        return 1.0 - self.lam / self.lam_star

    def rel_errors(self) -> np.ndarray:
        return np.abs(self.alpha_fit - self.alpha_formula) / abs(self.alpha_formula)

    def csv_rows(self) -> list[tuple[float, float, float, float, float, float]]:
        rows = []
        for i, eps in enumerate(self.eps_grid):
            rel = abs(self.alpha_fit[i] - self.alpha_formula) / abs(self.alpha_formula)
            for j, th in enumerate(self.theta_grid):
                rows.append((eps, th, self.landings[i, j], self.alpha_fit[i], self.alpha_formula, rel))
        return rows


def _landings_for_eps(case: str, params: dict, eps: float, thetas: Sequence[float], kind: str, rho: float,
                      entry_offset: float) -> list[float]:
    base = PWSystem(fold_case_field(case, params), Constant(1.0), VERTICAL)
    R = RegularizedSystem(base, TransitionFunction(kind), eps)
    pstar = fold_point(case, params)
    opts = IntegratorOptions(max_step=0.01, t_max=100.0)
    z = complex(entry_offset * eps, pstar - rho)
    out = []
    for th in thetas:
        level = pstar + th
        status, samples = follow(R, z, opts, stop=lambda w, level=level: level - w.imag)
        if status != "event":
            raise IntegrationFailure(f"orbit from the entry section did not reach y = p* + {th!r} ({status})")
        z = samples[-1][1]
        out.append(z.real)
    return out


def fit_alpha(thetas: Sequence[float], offsets: Sequence[float]) -> float:
    """Least-squares ``alpha`` in ``offset ~ alpha theta^2/2 + c3 theta^3 + c0``."""
    th = np.asarray(thetas, dtype=float)
    A = np.column_stack([th**2 / 2, th**3, np.ones_like(th)])
    coef, *_ = np.linalg.lstsq(A, np.asarray(offsets, dtype=float), rcond=None)
    return float(coef[0])


def transition_map_experiment(E: TransitionExperiment, workers: int = 1) -> TransitionExperiment:
    """Integrate the regularized field past the fold for every ``eps`` and fit ``alpha``.

    Fills ``landings`` (rows follow ``eps_grid``, columns ``theta_grid``),
    ``alpha_fit`` (one per ``eps``) and ``alpha_formula``, and returns ``E``.
    """
    check_case(E.case, E.params)
    if E.phi.order is None or E.phi.order < 2:
        raise PreconditionViolation("the fold transition needs a compact transition function flat to order >= 2")
    if E.lam is None:
        E.lam = E.lam_star / 2
    if not 0 < E.lam < E.lam_star:
        raise PreconditionViolation(f"lambda must lie in (0, {E.lam_star!r})")
    thetas = sorted(float(t) for t in E.theta_grid)
    if not thetas or thetas[0] <= 0 or any(e <= 0 for e in E.eps_grid):
        raise PreconditionViolation("eps and theta grids must be positive and non-empty")
    if not E.rho > 0:
        raise PreconditionViolation("rho must be positive")
    E.theta_grid = thetas
    args = [(E.case, E.params, float(eps), thetas, E.phi.kind, E.rho, E.entry_offset) for eps in E.eps_grid]
    if workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(args))) as pool:
            rows = list(pool.map(_landings_for_eps, *zip(*args)))
    else:
        rows = [_landings_for_eps(*a) for a in args]
    E.landings = np.array(rows)
    E.alpha_fit = np.array([fit_alpha(thetas, E.landings[i] - eps) for i, eps in enumerate(E.eps_grid)])
    E.alpha_formula = fold_alpha(E.case, E.params)
    return E


def default_workers() -> int:
    env = os.environ.get("PWHS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


__all__ = [
    "TransitionFunction",
    "RegularizedSystem",
    "reg_field",
    "regularized_planar",
    "strip_box",
    "holomorphy_defect",
    "sigma_gap",
    "SlowFast",
    "slow_fast",
    "CASES",
    "fold_case_field",
    "fold_point",
    "fold_alpha",
    "check_case",
    "TransitionExperiment",
    "fit_alpha",
    "transition_map_experiment",
    "default_workers",
]
