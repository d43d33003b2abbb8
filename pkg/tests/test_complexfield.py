import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pwhs.complexfield import (
    Constant,
    EssentialExp,
    Laurent,
    Linear,
    PlanarField,
    Pole,
    Power,
    Rational,
    cr_residual,
    eval,
    eval_derivative,
    nth_derivative,
    to_planar,
)
from pwhs.errors import EvaluationAtSingularity, InvalidFieldSpec, StencilHitsSingularity

coord = st.floats(-2.0, 2.0, allow_nan=False)


def _fields():
    return [
        Constant(1 + 2j),
        Linear(1.0, -2.0, 0.5 + 0.3j),
        Power(2, 0.2 - 0.1j),
        Power(3, 0j, 1),
        Pole(1, 0.1j),
        Pole(2, -0.3 + 0.2j, 0),
        Pole(3, 0j, 1),
        Rational(1.0, 2, -0.2j),
        Rational(-2.0, 3, 0.1),
        Laurent(0.5j, (1.0, -0.5j), (0.2, 1j, 0.3)),
        EssentialExp(3, 1),
        EssentialExp(4, 2, 0.1),
    ]


def _away(f, z, margin=0.05):
    return all(abs(z - s) > margin for s in f.singularities())


def test_eval_examples():
    assert eval(Linear(1, 1, 2 + 2j), 2 + 2j) == 0
    assert eval(Power(2), 1j) == -1
    with pytest.raises(EvaluationAtSingularity):
        eval(Pole(1), 0)


def test_rational_matches_hand_evaluation():
    z0 = -0.2j
    w = 0.05 - z0
    expected = w * w / (1 + w)
    assert abs(eval(Rational(1, 2, z0), 0.05) - expected) < 1e-15
    # written out with real arithmetic
    x, y = 0.05, 0.2
    num = complex(x * x - y * y, 2 * x * y)
    den = complex(1 + x, y)
    assert abs(eval(Rational(1, 2, z0), 0.05) - num / den) < 1e-15


def test_derivative_examples():
    assert eval_derivative(Linear(3, -2, 1 + 1j), 5 - 7j) == 3 - 2j
    assert eval_derivative(Power(2), 1) == 2
    assert abs(eval_derivative(Pole(1), 1j) - 1) < 1e-15


def test_planar_matches_cartesian_forms():
    x0, y0 = 0.3, -0.7
    pf = to_planar(Power(2, complex(x0, y0)))
    for x, y in [(1.0, 2.0), (-0.5, 0.1), (0.0, 3.0)]:
        z = complex(x, y)
        assert abs(pf.u(z) - ((x - x0) ** 2 - (y - y0) ** 2)) < 1e-12
        assert abs(pf.v(z) - 2 * (x - x0) * (y - y0)) < 1e-12
    pf = to_planar(Pole(1, complex(x0, y0)))
    for x, y in [(1.0, 2.0), (-0.5, 0.1)]:
        z = complex(x, y)
        r2 = (x - x0) ** 2 + (y - y0) ** 2
        assert abs(pf.u(z) - (x - x0) / r2) < 1e-12
        assert abs(pf.v(z) + (y - y0) / r2) < 1e-12
    pf = to_planar(Constant(1))
    assert pf.u(3 + 4j) == 1 and pf.v(3 + 4j) == 0
    assert pf.excluded == ()
    assert to_planar(Pole(2, 1j)).excluded == (1j,)


def test_invalid_specs():
    with pytest.raises(InvalidFieldSpec):
        Rational(0, 2)
    with pytest.raises(InvalidFieldSpec):
        Power(1)
    with pytest.raises(InvalidFieldSpec):
        Pole(0)
    with pytest.raises(InvalidFieldSpec):
        Laurent(0j, (0,), (0, 0))
    with pytest.raises(InvalidFieldSpec):
        EssentialExp(1, 1)
    with pytest.raises(InvalidFieldSpec):
        Power(2, 0j, 2)


def test_rational_singularities_guarded():
    f = Rational(1, 3, 0j)
    for s in f.singularities():
        assert abs(1 + s**2) < 1e-12
        with pytest.raises(EvaluationAtSingularity):
            f(s)


def test_essential_overflow_signals():
    with pytest.raises(EvaluationAtSingularity):
        EssentialExp(2, 1)(1e-4)


@settings(max_examples=100, deadline=None)
@given(coord, coord)
def test_planar_agrees_with_eval(x, y):
    z = complex(x, y)
    for f in _fields():
        if not _away(f, z):
            continue
        w = f(z)
        pf = to_planar(f)
        scale = max(1.0, abs(w))
        assert abs(pf.u(z) - w.real) <= 1e-12 * scale
        assert abs(pf.v(z) - w.imag) <= 1e-12 * scale


@settings(max_examples=100, deadline=None)
@given(coord, coord)
def test_derivative_matches_central_difference(x, y):
    z = complex(x, y)
    h = 1e-5
    for f in _fields():
        if not _away(f, z, 0.3) or abs(f(z)) > 1e3:
            continue
        fd = (f(z + h) - f(z - h)) / (2 * h)
        scale = max(1.0, abs(f.derivative(z)))
        assert abs(fd - eval_derivative(f, z)) <= 1e-6 * scale


@settings(max_examples=100, deadline=None)
@given(coord, coord)
def test_pure_fields_are_holomorphic(x, y):
    z = complex(x, y)
    for f in _fields():
        if not _away(f, z, 0.3) or abs(f(z)) > 1e3:
            continue
        assert cr_residual(to_planar(f), z, 1e-5) <= 1e-6 * max(1.0, abs(f.derivative(z)))


def _richardson_derivative(f, z, k, h=0.02):
    """k-th derivative by Richardson-extrapolated central differences (independent of the series code)."""

    def cd(step):
        return sum((-1) ** j * math.comb(k, j) * f(z + (k / 2 - j) * step) for j in range(k + 1)) / step**k

    d1, d2 = cd(h), cd(h / 2)
    return (4 * d2 - d1) / 3


@pytest.mark.parametrize("f", _fields(), ids=lambda f: type(f).__name__)
def test_taylor_coefficients_against_finite_differences(f):
    z = 0.9 + 0.7j
    c = f.taylor(z, 4)
    assert abs(c[0] - f(z)) < 1e-12 * max(1, abs(f(z)))
    assert abs(c[1] - f.derivative(z)) < 1e-10 * max(1, abs(f.derivative(z)))
    for k in (2, 3):
        ref = _richardson_derivative(f, z, k)
        assert abs(nth_derivative(f, z, k) - ref) < 1e-4 * max(1.0, abs(ref))


def test_taylor_of_polynomials_is_exact():
    c = Power(3, 1j).taylor(2 + 1j, 5)  # (2 + h)^3
    assert np.allclose(c, [8, 12, 6, 1, 0, 0])
    c = Pole(1).taylor(1, 3)  # 1/(1+h)
    assert np.allclose(c, [1, -1, 1, -1])


def test_cr_residual_detects_non_holomorphic_field():
    pf = PlanarField(u=lambda z: 2 * z.imag, v=lambda z: 1.0)
    assert cr_residual(pf, 0.3 + 0.2j) >= 2 - 1e-6


def test_cr_residual_stencil_guard():
    with pytest.raises(StencilHitsSingularity):
        cr_residual(to_planar(Pole(1)), 1e-5, 1e-5)
    with pytest.raises(ValueError):
        cr_residual(to_planar(Pole(1)), 1, 0)


def _trig_form(m, n):
    """Time-rescaled real form of z^m exp(z^-n) written with the P_m, Q_m, R_n sums."""

    def P(x, y):
        return sum(math.comb(m, 2 * j) * x ** (m - 2 * j) * (-1) ** j * y ** (2 * j) for j in range(m // 2 + 1))

    def Q(x, y):
        return sum(
            math.comb(m, 2 * j - 1) * x ** (m - 2 * j + 1) * (-1) ** (j - 1) * y ** (2 * j - 1)
            for j in range(1, (m + 1) // 2 + 1)
        )

    def R(x, y):
        return sum(
            math.comb(n, 2 * j - 1) * x ** (n - 2 * j + 1) * (-1) ** j * y ** (2 * j - 1)
            for j in range(1, (n + 1) // 2 + 1)
        )

    def ang(x, y):
        return R(x, y) / (x * x + y * y) ** n

    def u(x, y):
        return P(x, y) * math.cos(ang(x, y)) - Q(x, y) * math.sin(ang(x, y))

    def v(x, y):
        return P(x, y) * math.sin(ang(x, y)) + Q(x, y) * math.cos(ang(x, y))

    return u, v


@pytest.mark.parametrize("m,n,k", [(2, 1, 1), (2, 1, 2), (4, 3, 1), (4, 1, 3)])
def test_essential_trig_form_reproduces_printed_values(m, n, k):
    u, v = _trig_form(m, n)
    val = 2 * (-1) ** ((n + 1) // 2) / ((2 * k + 1) * math.pi)
    y = math.copysign(abs(val) ** (1 / n), val)  # real n-th root, n odd
    h = 1e-6 * abs(y)
    assert abs(u(0, y)) < 1e-12
    assert abs(v(0, y) - y**m * (-1) ** (k + m // 2)) < 1e-9
    vx = (v(h, y) - v(-h, y)) / (2 * h)
    assert abs(vx) / max(1.0, abs(v(0, y)) / abs(y)) < 1e-6
    # the same point under the holomorphic field: u = 0, v != 0, but dv/dx = Im F' != 0
    F = EssentialExp(m, n)
    q = complex(0, y)
    assert abs(F(q).real) < 1e-12 * abs(F(q))
    assert abs(F.derivative(q).imag) > 1e-3
    # the trig form is F rescaled by exp(-Re z^-n) > 0, so both have the same orbits
    w = complex(0.1, y)
    assert abs(complex(u(0.1, y), v(0.1, y)) - F(w) * math.exp(-(w ** (-n)).real)) < 1e-9 * max(1.0, abs(F(w)))
    # and the trig form's normal-direction slope u_y is nonzero: a fold for its orbits too
    uy = (u(0, y + h) - u(0, y - h)) / (2 * h)
    assert abs(uy) > 1e-3 * abs(v(0, y)) / abs(y)
