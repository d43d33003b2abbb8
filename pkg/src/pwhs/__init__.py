"""Numerical laboratory for piecewise smooth holomorphic planar systems."""

from .complexfield import (
    Constant,
    EssentialExp,
    FieldSpec,
    Laurent,
    Linear,
    Pole,
    Power,
    Rational,
)

__version__ = "0.1.0"
