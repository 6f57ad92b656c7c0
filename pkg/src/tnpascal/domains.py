"""Scalar domains: the arithmetic a matrix routine runs in.

Every structural algorithm in this package is generic over a domain object
that knows how to convert inputs and take square roots.  Three concrete
domains are provided:

* ``BINARY64``            IEEE double precision (plain floats)
* ``RATIONAL``            exact ``fractions.Fraction`` arithmetic
* ``BigFloatDomain(b)``   mpmath binary floats at ``b`` bits of precision

BigFloat domains use a cloned mpmath context, so concurrent invocations at
different precisions never share mutable precision state.
"""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath

from .params import ParamExpr


def mpf_to_fraction(x) -> Fraction:
    """Exact rational value of a finite mpf (mpfs are dyadic rationals)."""
    sign, man, exp, _ = x._mpf_
    man = int(man)
    if man == 0:
        if exp != 0:
            raise ValueError("cannot convert non-finite mpf to Fraction")
        return Fraction(0)
    if sign:
        man = -man
    return Fraction(man, 1) * Fraction(2) ** exp if exp >= 0 else Fraction(man, 2 ** -exp)


class ScalarDomain:
    name: str = "abstract"

    @property
    def unit_roundoff(self) -> float:
        raise NotImplementedError

    def convert(self, value):
        raise NotImplementedError

    def sqrt(self, value):
        raise NotImplementedError

    @property
    def zero(self):
        return self.convert(0)

    @property
    def one(self):
        return self.convert(1)

    def __repr__(self):
        return self.name


class Binary64Domain(ScalarDomain):
    name = "binary64"

    @property
    def unit_roundoff(self) -> float:
        return 2.0 ** -53

    def convert(self, value):
        if isinstance(value, float):
            return value
        if isinstance(value, (int, Fraction)):
            return float(value)
        if isinstance(value, ParamExpr):
            return float(value)
        if isinstance(value, mpmath.mpf):
            return float(value)
        raise TypeError(f"cannot convert {type(value).__name__} to binary64")

    def sqrt(self, value):
        return math.sqrt(value)


class NotExactError(TypeError):
    """Raised when an irrational value is forced into the rational domain."""


class RationalDomain(ScalarDomain):
    name = "rational"

    @property
    def unit_roundoff(self) -> float:
        return 0.0

    def convert(self, value):
        if isinstance(value, Fraction):
            return value
        if isinstance(value, (int, float)):
            return Fraction(value)
        if isinstance(value, ParamExpr):
            if not value.is_rational:
                raise NotExactError(f"{value} is irrational, rational domain refuses to round")
            return value.as_fraction()
        if isinstance(value, mpmath.mpf):
            return mpf_to_fraction(value)
        raise TypeError(f"cannot convert {type(value).__name__} to Fraction")

    def sqrt(self, value):
        f = Fraction(value)
        if f < 0:
            raise ValueError("square root of negative rational")
        rn, rd = math.isqrt(f.numerator), math.isqrt(f.denominator)
        if rn * rn == f.numerator and rd * rd == f.denominator:
            return Fraction(rn, rd)
        raise NotExactError(f"sqrt({f}) is irrational, rational domain refuses to round")


class BigFloatDomain(ScalarDomain):
    def __init__(self, precision_bits: int):
        if precision_bits < 2:
            raise ValueError("precision must be at least 2 bits")
        self.precision_bits = precision_bits
        self.ctx = mpmath.mp.clone()
        self.ctx.prec = precision_bits
        self.name = f"bigfloat({precision_bits})"

    @property
    def unit_roundoff(self) -> float:
        return 2.0 ** (1 - self.precision_bits)

    def convert(self, value):
        ctx = self.ctx
        if isinstance(value, (int, float)):
            return ctx.mpf(value)
        if isinstance(value, Fraction):
            return ctx.make_mpf(mpmath.libmp.from_rational(
                value.numerator, value.denominator, ctx.prec,
                mpmath.libmp.round_nearest))
        if isinstance(value, ParamExpr):
            return value.to_mpf(ctx)
        if isinstance(value, mpmath.mpf):
            return ctx.mpf(value)
        raise TypeError(f"cannot convert {type(value).__name__} to bigfloat")

    def sqrt(self, value):
        return self.ctx.sqrt(value)


BINARY64 = Binary64Domain()
RATIONAL = RationalDomain()
