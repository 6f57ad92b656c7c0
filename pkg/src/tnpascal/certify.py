"""Precision-doubling certification ladder shared by the solvers and the oracle.

A computation is rerun at doubling working precisions until two successive
successful runs agree componentwise to a requested relative tolerance.  All
comparisons happen on exact rational snapshots of the computed values, so the
certificate itself never depends on rounded arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

LADDER_START_BITS = 106
LADDER_CEILING_BITS = 3392


class NoConvergence(RuntimeError):
    """Successive precision doublings never agreed to the requested tolerance."""

    def __init__(self, message: str, *, precision_bits: int = 0,
                 history: list | None = None):
        super().__init__(message)
        self.precision_bits = precision_bits
        self.history = history or []


class RungFailed(Exception):
    """Signals that the current working precision is insufficient to even
    produce a candidate result (e.g. spurious complex parts); the ladder
    escalates instead of comparing."""


@dataclass
class LadderOutcome:
    values: list[Fraction]
    precision_bits: int
    disagreement: Fraction = field(default_factory=Fraction)


def max_relative_disagreement(prev: Sequence[Fraction],
                              cur: Sequence[Fraction]) -> Fraction | None:
    """Exact max of |p - c| / |c| componentwise; None encodes +infinity."""
    worst = Fraction(0)
    for p, c in zip(prev, cur):
        if c == 0:
            if p == 0:
                continue
            return None
        worst = max(worst, abs(p - c) / abs(c))
    return worst


def run_ladder(compute: Callable[[int], Sequence[Fraction]],
               tolerance,
               *,
               start_bits: int = LADDER_START_BITS,
               ceiling_bits: int = LADDER_CEILING_BITS) -> LadderOutcome:
    """Run compute(bits) at doubling precisions until two successive rungs agree.

    compute must return the values as exact Fractions (snapshots of whatever
    floating-point format it worked in).  A RungFailed raise discards the rung
    and escalates.  Raises NoConvergence past the ceiling.
    """
    tol = Fraction(tolerance)
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    history: list[tuple[int, str]] = []
    prev: list[Fraction] | None = None
    bits = start_bits
    while bits <= ceiling_bits:
        try:
            cur = list(compute(bits))
        except RungFailed as exc:
            history.append((bits, f"rung failed: {exc}"))
            prev = None
            bits *= 2
            continue
        if prev is not None:
            if len(prev) != len(cur):
                history.append((bits, "rung size changed"))
            else:
                worst = max_relative_disagreement(prev, cur)
                if worst is not None and worst <= tol:
                    return LadderOutcome(cur, bits, worst)
                history.append(
                    (bits, "disagreement inf" if worst is None
                     else f"disagreement {float(worst):.3e}"))
        prev = cur
        bits *= 2
    raise NoConvergence(
        f"no agreement to relative {float(tol):.3e} within {ceiling_bits} bits",
        precision_bits=ceiling_bits, history=history)
