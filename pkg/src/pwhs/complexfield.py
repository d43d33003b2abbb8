"""Holomorphic vector fields on the plane.

A field is a holomorphic function F and the planar system it generates is
``x' = Re F``, ``y' = Im F``.  The variants below cover the conformal normal
forms (constant, linear, power, pole, the rational form), a truncated Laurent
series and the essential singularity ``z**m * exp(z**-n)``.

Points are plain Python ``complex`` numbers.  Every variant can report its
value, its derivative and a vector of Taylor coefficients at a point; the
Taylor vector is computed with truncated power-series arithmetic, so higher
derivatives come out without finite differencing.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import EvaluationAtSingularity, InvalidFieldSpec, StencilHitsSingularity

ComplexPoint = complex

#: evaluation refuses points closer than this to a pole or essential center
SINGULAR_GUARD = 1e-12


def _complex(x, name: str) -> complex:
    try:
        z = complex(x)
    except (TypeError, ValueError) as exc:
        raise InvalidFieldSpec(f"{name} must be a number, got {x!r}") from exc
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise InvalidFieldSpec(f"{name} must be finite, got {x!r}")
    return z


def _finite(z: complex, where: str) -> complex:
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise EvaluationAtSingularity(f"non-finite value at {where}")
    return z


# -- truncated power series in h, stored as coefficient arrays -----------------

def _binomial_series(w0: complex, k: int, order: int) -> np.ndarray:
    """Coefficients of ``(w0 + h)**k`` up to ``h**order`` for any integer k."""
    c = np.zeros(order + 1, dtype=complex)
    if k >= 0:
        for j in range(min(k, order) + 1):
            c[j] = math.comb(k, j) * w0 ** (k - j)
        return c
    c[0] = w0**k
    for j in range(order):
        c[j + 1] = c[j] * (k - j) / ((j + 1) * w0)
    return c


def _series_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.convolve(a, b)[: len(a)]


def _series_div(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    q = np.zeros_like(a)
    for j in range(len(a)):
        acc = a[j]
        for i in range(1, j + 1):
            acc -= b[i] * q[j - i]
        q[j] = acc / b[0]
    return q


def _series_exp(s: np.ndarray) -> np.ndarray:
    # e' = s' e, matched term by term
    e = np.zeros_like(s)
    e[0] = cmath.exp(s[0])
    for j in range(1, len(s)):
        acc = 0j
        for i in range(1, j + 1):
            acc += i * s[i] * e[j - i]
        e[j] = acc / j
    return e


# -- field variants ----------------------------------------------------------------

class FieldSpec:
    """Common interface of the field variants."""

    center: complex = 0j

    def __call__(self, z: complex) -> complex:
        z = complex(z)
        self._guard(z)
        return _finite(self._value(z), f"z={z!r}")

    def derivative(self, z: complex) -> complex:
        z = complex(z)
        self._guard(z)
        return _finite(self._derivative(z), f"z={z!r}")

    def taylor(self, z: complex, order: int) -> np.ndarray:
        """Coefficients ``c_j`` with ``F(z + h) = sum c_j h**j`` for ``j <= order``."""
        z = complex(z)
        self._guard(z)
        c = self._taylor(z, order)
        if not np.all(np.isfinite(c)):
            raise EvaluationAtSingularity(f"non-finite Taylor coefficients at z={z!r}")
        return c

    def singularities(self) -> tuple[complex, ...]:
        """Points excluded from the domain."""
        return ()

    def _guard(self, z: complex) -> None:
        for s in self.singularities():
            if abs(z - s) < SINGULAR_GUARD:
                raise EvaluationAtSingularity(f"{type(self).__name__} is singular at {s!r}")

    def _value(self, z: complex) -> complex:
        raise NotImplementedError

    def _derivative(self, z: complex) -> complex:
        raise NotImplementedError

    def _taylor(self, z: complex, order: int) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(FieldSpec):
    value: complex = 1 + 0j

    def __post_init__(self):
        object.__setattr__(self, "value", _complex(self.value, "value"))

    def _value(self, z):
        return self.value

    def _derivative(self, z):
        return 0j

    def _taylor(self, z, order):
        c = np.zeros(order + 1, dtype=complex)
        c[0] = self.value
        return c


@dataclass(frozen=True)
class Linear(FieldSpec):
    """``(a + ib)(z - center)``."""

    a: float
    b: float
    center: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "a", float(_complex(self.a, "a").real))
        object.__setattr__(self, "b", float(_complex(self.b, "b").real))
        object.__setattr__(self, "center", _complex(self.center, "center"))

    @property
    def coeff(self) -> complex:
        return complex(self.a, self.b)

    def _value(self, z):
        return self.coeff * (z - self.center)

    def _derivative(self, z):
        return self.coeff

    def _taylor(self, z, order):
        c = np.zeros(order + 1, dtype=complex)
        c[0] = self._value(z)
        if order >= 1:
            c[1] = self.coeff
        return c


def _check_m(m) -> int:
    if m not in (0, 1):
        raise InvalidFieldSpec(f"premultiplier exponent m must be 0 or 1, got {m!r}")
    return int(m)


@dataclass(frozen=True)
class Power(FieldSpec):
    """``i**m (z - center)**n`` with ``n >= 2``."""

    n: int
    center: complex = 0j
    m: int = 0

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 2:
            raise InvalidFieldSpec(f"Power needs integer n >= 2, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "m", _check_m(self.m))
        object.__setattr__(self, "center", _complex(self.center, "center"))

    @property
    def premultiplier(self) -> complex:
        return 1j if self.m else 1 + 0j

    def _value(self, z):
        return self.premultiplier * (z - self.center) ** self.n

    def _derivative(self, z):
        return self.premultiplier * self.n * (z - self.center) ** (self.n - 1)

    def _taylor(self, z, order):
        return self.premultiplier * _binomial_series(z - self.center, self.n, order)


@dataclass(frozen=True)
class Pole(FieldSpec):
    """``i**m / (z - center)**n`` with ``n >= 1``."""

    n: int
    center: complex = 0j
    m: int = 0

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise InvalidFieldSpec(f"Pole needs integer n >= 1, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "m", _check_m(self.m))
        object.__setattr__(self, "center", _complex(self.center, "center"))

    @property
    def premultiplier(self) -> complex:
        return 1j if self.m else 1 + 0j

    def singularities(self):
        return (self.center,)

    def _value(self, z):
        return self.premultiplier / (z - self.center) ** self.n

    def _derivative(self, z):
        return -self.premultiplier * self.n / (z - self.center) ** (self.n + 1)

    def _taylor(self, z, order):
        return self.premultiplier * _binomial_series(z - self.center, -self.n, order)


@dataclass(frozen=True)
class Rational(FieldSpec):
    """``gamma (z - center)**n / (1 + (z - center)**(n-1))`` with ``n >= 2``."""

    gamma: float
    n: int
    center: complex = 0j

    def __post_init__(self):
        g = float(_complex(self.gamma, "gamma").real)
        if g == 0.0:
            raise InvalidFieldSpec("Rational needs gamma != 0")
        if not isinstance(self.n, (int, np.integer)) or self.n < 2:
            raise InvalidFieldSpec(f"Rational needs integer n >= 2, got {self.n!r}")
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "center", _complex(self.center, "center"))

    def singularities(self):
        k = self.n - 1
        return tuple(self.center + cmath.exp(1j * math.pi * (2 * j + 1) / k) for j in range(k))

    def _guard(self, z):
        w = z - self.center
        if abs(1 + w ** (self.n - 1)) < SINGULAR_GUARD:
            raise EvaluationAtSingularity("Rational denominator vanishes")

    def _value(self, z):
        w = z - self.center
        return self.gamma * w**self.n / (1 + w ** (self.n - 1))

    def _derivative(self, z):
        w = z - self.center
        q = w ** (self.n - 1)
        return self.gamma * q * (self.n + q) / (1 + q) ** 2

    def _taylor(self, z, order):
        w = z - self.center
        den = _binomial_series(w, self.n - 1, order)
        den[0] += 1
        return self.gamma * _series_div(_binomial_series(w, self.n, order), den)


@dataclass(frozen=True)
class Laurent(FieldSpec):
    """``sum_k B_k (z-center)**-k + sum_k A_k (z-center)**k``, both sums finite.

    ``principal`` holds ``B_1..B_N`` and ``analytic`` holds ``A_0..A_M``.
    """

    center: complex = 0j
    principal: tuple = ()
    analytic: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "center", _complex(self.center, "center"))
        bs = tuple(_complex(b, "principal coefficient") for b in self.principal)
        As = tuple(_complex(a, "analytic coefficient") for a in self.analytic)
        if not any(bs) and not any(As):
            raise InvalidFieldSpec("Laurent needs at least one nonzero coefficient")
        object.__setattr__(self, "principal", bs)
        object.__setattr__(self, "analytic", As)

    def singularities(self):
        return (self.center,) if any(self.principal) else ()

    def _value(self, z):
        w = z - self.center
        s = sum(a * w**k for k, a in enumerate(self.analytic))
        if self.principal:
            s += sum(b / w**k for k, b in enumerate(self.principal, start=1))
        return complex(s)

    def _derivative(self, z):
        w = z - self.center
        s = sum(k * a * w ** (k - 1) for k, a in enumerate(self.analytic) if k)
        if self.principal:
            s -= sum(k * b / w ** (k + 1) for k, b in enumerate(self.principal, start=1))
        return complex(s)

    def _taylor(self, z, order):
        w = z - self.center
        c = np.zeros(order + 1, dtype=complex)
        for k, a in enumerate(self.analytic):
            if a:
                c += a * _binomial_series(w, k, order)
        for k, b in enumerate(self.principal, start=1):
            if b:
                c += b * _binomial_series(w, -k, order)
        return c


@dataclass(frozen=True)
class EssentialExp(FieldSpec):
    """``(z - center)**m * exp((z - center)**-n)`` with ``m >= n + 1``."""

    m: int
    n: int
    center: complex = 0j

    def __post_init__(self):
        for name in ("m", "n"):
            if not isinstance(getattr(self, name), (int, np.integer)):
                raise InvalidFieldSpec(f"EssentialExp needs integer {name}")
        if self.n < 1 or self.m < self.n + 1:
            raise InvalidFieldSpec(f"EssentialExp needs n >= 1 and m >= n+1, got m={self.m}, n={self.n}")
        object.__setattr__(self, "center", _complex(self.center, "center"))

    def singularities(self):
        return (self.center,)

    def _exp(self, w):
        try:
            return cmath.exp(w ** (-self.n))
        except OverflowError as exc:
            raise EvaluationAtSingularity("exp overflow near the essential singularity") from exc

    def _value(self, z):
        w = z - self.center
        return w**self.m * self._exp(w)

    def _derivative(self, z):
        w = z - self.center
        return self._exp(w) * (self.m * w ** (self.m - 1) - self.n * w ** (self.m - self.n - 1))

    def _taylor(self, z, order):
        w = z - self.center
        self._exp(w)
        inner = _binomial_series(w, -self.n, order)
        return _series_mul(_binomial_series(w, self.m, order), _series_exp(inner))


# -- module-level operations -------------------------------------------------------

def eval(f: FieldSpec, z: ComplexPoint) -> ComplexPoint:  # noqa: A001
    """Value of the field at ``z``."""
    return f(z)


def eval_derivative(f: FieldSpec, z: ComplexPoint) -> ComplexPoint:
    """Complex derivative ``F'(z)``."""
    return f.derivative(z)


def nth_derivative(f: FieldSpec, z: ComplexPoint, k: int) -> ComplexPoint:
    """``F^(k)(z)`` read off the Taylor coefficients."""
    return complex(math.factorial(k) * f.taylor(z, k)[k])


@dataclass(frozen=True)
class PlanarField:
    """Component evaluators ``u, v`` of a planar vector field.

    The generating function need not be holomorphic; :func:`cr_residual`
    measures how far it is from being so.
    """

    u: Callable[[complex], float]
    v: Callable[[complex], float]
    excluded: tuple[complex, ...] = ()

    def __call__(self, z: complex) -> complex:
        return complex(self.u(z), self.v(z))


def to_planar(f: FieldSpec) -> PlanarField:
    return PlanarField(u=lambda z: f(z).real, v=lambda z: f(z).imag, excluded=f.singularities())


def cr_residual(pf: PlanarField, z: ComplexPoint, h: float = 1e-5) -> float:
    """Cauchy-Riemann residual ``max(|u_x - v_y|, |u_y + v_x|)`` by central differences."""
    if not h > 0:
        raise ValueError("step h must be positive")
    z = complex(z)
    stencil = (z + h, z - h, z + 1j * h, z - 1j * h)
    for p in stencil:
        for s in pf.excluded:
            if abs(p - s) < SINGULAR_GUARD:
                raise StencilHitsSingularity(f"stencil point {p!r} hits singularity {s!r}")
    try:
        ue, uw, un, us = (pf.u(p) for p in stencil)
        ve, vw, vn, vs = (pf.v(p) for p in stencil)
    except EvaluationAtSingularity as exc:
        raise StencilHitsSingularity(str(exc)) from exc
    ux, uy = (ue - uw) / (2 * h), (un - us) / (2 * h)
    vx, vy = (ve - vw) / (2 * h), (vn - vs) / (2 * h)
    return max(abs(ux - vy), abs(uy + vx))


__all__ = [
    "ComplexPoint",
    "FieldSpec",
    "Constant",
    "Linear",
    "Power",
    "Pole",
    "Rational",
    "Laurent",
    "EssentialExp",
    "PlanarField",
    "eval",
    "eval_derivative",
    "nth_derivative",
    "to_planar",
    "cr_residual",
    "SINGULAR_GUARD",
]
