"""Instrumented scalars: count field operations and flag cancellation risk.

``CountingDomain`` wraps any base domain so that the generic matrix routines
run unchanged while every +, -, *, / on the produced scalars increments a
shared ``OpCounter``.  An addition whose operands have opposite signs (or a
subtraction of same-signed operands) is also recorded separately: those are
exactly the operations that can lose relative accuracy, and the structured
algorithms are expected to perform none of them on certified inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .domains import ScalarDomain


@dataclass
class OpCounter:
    additions: int = 0
    multiplications: int = 0
    divisions: int = 0
    square_roots: int = 0
    mixed_sign_additions: int = 0

    @property
    def total(self) -> int:
        return self.additions + self.multiplications + self.divisions

    def reset(self) -> None:
        self.additions = self.multiplications = self.divisions = 0
        self.square_roots = self.mixed_sign_additions = 0


def _sgn(x) -> int:
    if x > 0:
        return 1
    if x < 0:
        return -1
    return 0


def counting_value(x):
    """Unwrap a CountingScalar (identity on plain scalars)."""
    return x.value if isinstance(x, CountingScalar) else x


class CountingScalar:
    __slots__ = ("value", "counter")

    def __init__(self, value, counter: OpCounter):
        self.value = value
        self.counter = counter

    def _wrap(self, value):
        return CountingScalar(value, self.counter)

    def __add__(self, other):
        v = counting_value(other)
        self.counter.additions += 1
        if _sgn(self.value) * _sgn(v) == -1:
            self.counter.mixed_sign_additions += 1
        return self._wrap(self.value + v)

    __radd__ = __add__

    def __sub__(self, other):
        v = counting_value(other)
        self.counter.additions += 1
        if _sgn(self.value) * _sgn(v) == 1:
            self.counter.mixed_sign_additions += 1
        return self._wrap(self.value - v)

    def __rsub__(self, other):
        v = counting_value(other)
        self.counter.additions += 1
        if _sgn(self.value) * _sgn(v) == 1:
            self.counter.mixed_sign_additions += 1
        return self._wrap(v - self.value)

    def __mul__(self, other):
        self.counter.multiplications += 1
        return self._wrap(self.value * counting_value(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        self.counter.divisions += 1
        return self._wrap(self.value / counting_value(other))

    def __rtruediv__(self, other):
        self.counter.divisions += 1
        return self._wrap(counting_value(other) / self.value)

    def __neg__(self):
        return self._wrap(-self.value)

    def __abs__(self):
        return self._wrap(abs(self.value))

    def __eq__(self, other):
        return self.value == counting_value(other)

    def __lt__(self, other):
        return self.value < counting_value(other)

    def __le__(self, other):
        return self.value <= counting_value(other)

    def __gt__(self, other):
        return self.value > counting_value(other)

    def __ge__(self, other):
        return self.value >= counting_value(other)

    def __hash__(self):
        return hash(self.value)

    def __bool__(self):
        return bool(self.value)

    def __float__(self):
        return float(self.value)

    def __repr__(self):
        return f"CountingScalar({self.value!r})"


class CountingDomain(ScalarDomain):
    """Wrap a base domain; conversions are free, arithmetic is counted."""

    def __init__(self, base: ScalarDomain, counter: OpCounter | None = None):
        self.base = base
        self.counter = counter if counter is not None else OpCounter()
        self.name = f"counting({base.name})"

    @property
    def unit_roundoff(self) -> float:
        return self.base.unit_roundoff

    def convert(self, value):
        if isinstance(value, CountingScalar):
            return CountingScalar(value.value, self.counter)
        return CountingScalar(self.base.convert(value), self.counter)

    def sqrt(self, value):
        self.counter.square_roots += 1
        return CountingScalar(self.base.sqrt(counting_value(value)), self.counter)
