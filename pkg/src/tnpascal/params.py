"""Exact scalar arithmetic over rationals extended by integer square roots.

A ``ParamExpr`` is a finite sum ``sum(c_d * sqrt(d))`` where each radicand
``d`` is a positive squarefree integer and each coefficient ``c_d`` is a
nonzero ``Fraction``.  The rational part is the ``d == 1`` term.  This set is
closed under +, -, *, / and the representation is canonical: two expressions
are equal as real numbers iff their term dictionaries are equal (square roots
of distinct squarefree integers are linearly independent over the rationals).
That makes exact equality and exact sign tests decidable, which is what the
matrix constructors rely on to pick structure cases and certify positivity.
"""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath

_RATIONAL = (int, Fraction)


def _squarefree_split(k: int) -> tuple[int, int]:
    """Return (s, d) with k == s*s*d and d squarefree, for k >= 1."""
    s, d = 1, 1
    p = 2
    while p * p <= k:
        if k % p == 0:
            e = 0
            while k % p == 0:
                k //= p
                e += 1
            s *= p ** (e // 2)
            if e % 2:
                d *= p
        p += 1 if p == 2 else 2
    return s, d * k


class ParamExpr:
    """Canonical exact value in the field generated by integer square roots."""

    __slots__ = ("_terms",)

    def __init__(self, terms: dict[int, Fraction] | None = None):
        # invariant: keys squarefree >= 1, values nonzero Fractions
        self._terms = terms or {}

    @staticmethod
    def rational(value) -> "ParamExpr":
        c = Fraction(value)
        return ParamExpr({1: c} if c else {})

    @staticmethod
    def sqrt_rational(value) -> "ParamExpr":
        """Exact square root of a nonnegative rational: sqrt(p/q) = sqrt(p*q)/q."""
        v = Fraction(value)
        if v < 0:
            raise ValueError("square root of a negative value is not supported")
        if v == 0:
            return ParamExpr()
        s, d = _squarefree_split(v.numerator * v.denominator)
        return ParamExpr({d: Fraction(s, v.denominator)})

    # -- queries ---------------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return all(d == 1 for d in self._terms)

    def as_fraction(self) -> Fraction:
        if not self._terms:
            return Fraction(0)
        if not self.is_rational:
            raise ValueError(f"{self} is irrational, cannot convert to Fraction")
        return self._terms[1]

    def sign(self) -> int:
        """Exact sign in {-1, 0, +1}."""
        if not self._terms:
            return 0
        if len(self._terms) == 1:
            ((d, c),) = self._terms.items()
            return 1 if c > 0 else -1
        v, _ = self._approx(64)
        return 1 if v > 0 else -1

    def _approx(self, bits: int):
        """mpf approximation with relative error below 2**(1-bits).

        Terms are accumulated at a working precision that is raised until the
        accumulated rounding (bounded via the sum of term magnitudes) is small
        relative to the value itself, so cancellation between terms cannot
        produce a wrong sign or a loose result.  Nonzero values are bounded
        away from zero, hence the loop terminates.
        """
        if not self._terms:
            return mpmath.mpf(0), 0
        work = bits + 16
        while True:
            ctx = mpmath.mp.clone()
            ctx.prec = work + 8
            total = ctx.mpf(0)
            magnitude = ctx.mpf(0)
            for d, c in sorted(self._terms.items()):
                term = ctx.mpf(c.numerator) / c.denominator
                if d != 1:
                    term *= ctx.sqrt(d)
                total += term
                magnitude += abs(term)
            # per-term error ~ 4 ulp; n-term summation adds n more
            bound = magnitude * (4 * len(self._terms) + 8) * ctx.ldexp(1, -work - 8)
            if abs(total) > ctx.ldexp(1, bits) * bound:
                return total, work
            work *= 2

    def to_mpf(self, ctx):
        """Round to an mpf of ctx, accurate to about one ulp at ctx.prec."""
        if not self._terms:
            return ctx.mpf(0)
        if self.is_rational:
            c = self._terms[1]
            return ctx.make_mpf(
                mpmath.libmp.from_rational(c.numerator, c.denominator, ctx.prec,
                                           mpmath.libmp.round_nearest))
        v, _ = self._approx(ctx.prec)
        return ctx.mpf(v)

    def __float__(self) -> float:
        if not self._terms:
            return 0.0
        if self.is_rational:
            return float(self._terms[1])
        v, _ = self._approx(53)
        return float(v)

    # -- ring operations -------------------------------------------------

    @staticmethod
    def _coerce(other) -> "ParamExpr | None":
        if isinstance(other, ParamExpr):
            return other
        if isinstance(other, _RATIONAL):
            return ParamExpr.rational(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        terms = dict(self._terms)
        for d, c in o._terms.items():
            s = terms.get(d, Fraction(0)) + c
            if s:
                terms[d] = s
            else:
                terms.pop(d, None)
        return ParamExpr(terms)

    __radd__ = __add__

    def __neg__(self):
        return ParamExpr({d: -c for d, c in self._terms.items()})

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        terms: dict[int, Fraction] = {}
        for d1, c1 in self._terms.items():
            for d2, c2 in o._terms.items():
                if d1 == d2:
                    d, c = 1, c1 * c2 * d1
                else:
                    g = math.gcd(d1, d2)
                    # sqrt(d1)*sqrt(d2) = g*sqrt((d1//g)*(d2//g)), cofactors coprime
                    d, c = (d1 // g) * (d2 // g), c1 * c2 * g
                s = terms.get(d, Fraction(0)) + c
                if s:
                    terms[d] = s
                else:
                    terms.pop(d, None)
        return ParamExpr(terms)

    __rmul__ = __mul__

    def _inverse(self) -> "ParamExpr":
        if not self._terms:
            raise ZeroDivisionError("division by zero ParamExpr")
        if self.is_rational:
            return ParamExpr.rational(1 / self._terms[1])
        # pick a prime p dividing some radicand, split self = A + sqrt(p)*B
        # with A, B free of p; then 1/self = (A - sqrt(p)*B) / (A*A - p*B*B)
        # and the denominator involves strictly fewer primes, so this recurses
        # down to the rational case.
        p = None
        for d in self._terms:
            if d > 1:
                for q in range(2, d + 1):
                    if d % q == 0:
                        p = q
                        break
                break
        a_terms: dict[int, Fraction] = {}
        b_terms: dict[int, Fraction] = {}
        for d, c in self._terms.items():
            if d % p == 0:
                b_terms[d // p] = c
            else:
                a_terms[d] = c
        a, b = ParamExpr(a_terms), ParamExpr(b_terms)
        sp = ParamExpr({p: Fraction(1)})
        denom = a * a - b * b * p
        return (a - sp * b) * denom._inverse()

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o._inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self._inverse()

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out = ParamExpr.rational(1)
        for _ in range(n):
            out = out * self
        return out

    # -- comparisons -----------------------------------------------------

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self._terms == o._terms

    def __hash__(self):
        if self.is_rational:
            return hash(self._terms.get(1, Fraction(0)))
        return hash(frozenset(self._terms.items()))

    def _cmp(self, other) -> int:
        o = self._coerce(other)
        if o is None:
            raise TypeError(f"cannot compare ParamExpr with {type(other).__name__}")
        return (self - o).sign()

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __bool__(self):
        return bool(self._terms)

    # -- formatting ------------------------------------------------------

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for d, c in sorted(self._terms.items()):
            if d == 1:
                body = str(c)
            elif c == 1:
                body = f"sqrt({d})"
            elif c == -1:
                body = f"-sqrt({d})"
            elif c.denominator == 1:
                body = f"{c.numerator}*sqrt({d})"
            else:
                body = f"{c}*sqrt({d})"
            if parts and not body.startswith("-"):
                parts.append("+" + body)
            else:
                parts.append(body)
        return "".join(parts)

    def __repr__(self) -> str:
        return f"ParamExpr({self})"


def as_param(value) -> ParamExpr:
    """Promote int, Fraction, float (exact binary value), str, or ParamExpr."""
    if isinstance(value, ParamExpr):
        return value
    if isinstance(value, _RATIONAL):
        return ParamExpr.rational(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError("cannot promote a non-finite float")
        return ParamExpr.rational(Fraction(value))
    if isinstance(value, str):
        return parse_param(value)
    if hasattr(value, "_mpf_"):
        sign, man, exp, _ = value._mpf_
        man = int(man)
        if man == 0 and exp != 0:
            raise ValueError("cannot promote a non-finite value")
        frac = Fraction(-man if sign else man)
        frac = frac * Fraction(2) ** exp if exp >= 0 else frac / 2 ** -exp
        return ParamExpr.rational(frac)
    raise TypeError(f"cannot promote {type(value).__name__} to ParamExpr")


class ParamParseError(ValueError):
    pass


class _Parser:
    """Recursive descent over: expr := term (('+'|'-') term)*,
    term := unary (('*'|'/') unary)*, unary := '-'* atom,
    atom := NUMBER | 'sqrt' '(' expr ')' | '(' expr ')'."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg: str):
        raise ParamParseError(f"{msg} at position {self.pos} in {self.text!r}")

    def peek(self) -> str:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse(self) -> ParamExpr:
        value = self.expr()
        if self.peek():
            self.error("unexpected trailing input")
        return value

    def expr(self) -> ParamExpr:
        value = self.term()
        while self.peek() in ("+", "-"):
            op = self.text[self.pos]
            self.pos += 1
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> ParamExpr:
        value = self.unary()
        while self.peek() in ("*", "/"):
            op = self.text[self.pos]
            self.pos += 1
            rhs = self.unary()
            if op == "*":
                value = value * rhs
            else:
                if rhs.sign() == 0:
                    self.error("division by zero")
                value = value / rhs
        return value

    def unary(self) -> ParamExpr:
        if self.peek() == "-":
            self.pos += 1
            return -self.unary()
        return self.atom()

    def atom(self) -> ParamExpr:
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            value = self.expr()
            if self.peek() != ")":
                self.error("expected ')'")
            self.pos += 1
            return value
        if ch.isdigit() or ch == ".":
            return ParamExpr.rational(self.number())
        if self.text.startswith("sqrt", self.pos):
            self.pos += 4
            if self.peek() != "(":
                self.error("expected '(' after sqrt")
            self.pos += 1
            arg = self.expr()
            if self.peek() != ")":
                self.error("expected ')'")
            self.pos += 1
            if not arg.is_rational:
                self.error("nested radicals are not supported")
            return ParamExpr.sqrt_rational(arg.as_fraction())
        self.error("expected a number, sqrt(...), or '('")

    def number(self) -> Fraction:
        start = self.pos
        seen_dot = False
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch.isdigit():
                self.pos += 1
            elif ch == "." and not seen_dot:
                seen_dot = True
                self.pos += 1
            else:
                break
        token = self.text[start:self.pos]
        try:
            return Fraction(token)
        except ValueError:
            self.error("malformed number")


def parse_param(text: str) -> ParamExpr:
    """Parse expressions such as '3/2', 'sqrt(2)', '1+2*sqrt(3)', '-sqrt(5)/2'."""
    if not isinstance(text, str) or not text.strip():
        raise ParamParseError("empty parameter expression")
    return _Parser(text).parse()


PARAM_ZERO = ParamExpr()
PARAM_ONE = ParamExpr.rational(1)
