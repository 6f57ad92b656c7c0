"""Accuracy-preserving linear algebra driven by bidiagonal decompositions.

Solves, inverts, and computes spectra of the matrix represented by a BDMatrix
without ever forming it in fixed precision.  The solve and inverse sweep
through the elementary bidiagonal factors; on totally positive inputs with
alternating right-hand sides every fused subtraction combines same-signed
quantities, which is what preserves relative accuracy in binary64.  Eigenvalue
and singular-value routines evaluate the decomposition at increasing working
precisions until two successive runs agree to the requested tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .bd import BDMatrix, Certificate, SingularMatrixError, bd_expand, bd_validate
from .certify import (
    LADDER_CEILING_BITS,
    LADDER_START_BITS,
    NoConvergence,
    RungFailed,
    run_ladder,
)
from .domains import BINARY64, BigFloatDomain, ScalarDomain, mpf_to_fraction

__all__ = [
    "SignPattern",
    "sign_pattern",
    "AccuracyMode",
    "StructuredDouble",
    "STRUCTURED",
    "CertifiedPrecision",
    "SolveResult",
    "MatrixResult",
    "SpectralResult",
    "NoConvergence",
    "tn_solve",
    "tn_inverse",
    "tn_eigenvalues",
    "tn_singular_values",
]


# -- sign patterns -------------------------------------------------------------

@dataclass(frozen=True)
class SignPattern:
    """Classification of a right-hand side: strictly sign-alternating (up to
    zeros) with a leading sign, or mixed."""

    alternating: bool
    sign: int = 0

    def __bool__(self) -> bool:
        return self.alternating


MIXED = SignPattern(False, 0)


def sign_pattern(b: Sequence) -> SignPattern:
    """Alternating(s) iff s * (-1)^i * b_i >= 0 for every 0-based index i.

    Zeros are compatible with either sign; an all-zero vector reports
    Alternating(+1) by convention.
    """
    for s in (1, -1):
        ok = True
        for i, v in enumerate(b):
            signed = v if (i % 2 == 0) == (s == 1) else -v
            if signed < 0:
                ok = False
                break
        if ok:
            return SignPattern(True, s)
    return MIXED


# -- accuracy modes ------------------------------------------------------------

class AccuracyMode:
    pass


class StructuredDouble(AccuracyMode):
    """Subtraction-free factor sweeps carried out directly in binary64."""

    def __repr__(self):
        return "StructuredDouble()"


STRUCTURED = StructuredDouble()

_TAU_MAX = Fraction(1, 2 ** 20)


class CertifiedPrecision(AccuracyMode):
    """Rerun at doubling working precision until two successive runs agree
    componentwise to relative tolerance tau."""

    def __init__(self, tolerance):
        tau = Fraction(tolerance)
        if not 0 < tau <= _TAU_MAX:
            raise ValueError("tolerance must lie in (0, 2**-20]")
        self.tolerance = tau

    def __repr__(self):
        return f"CertifiedPrecision({float(self.tolerance):.3e})"


# -- results -------------------------------------------------------------------

@dataclass(frozen=True)
class SolveResult(Sequence):
    """Solution vector plus provenance.  Behaves as a sequence over x."""

    x: tuple
    hra_flag: bool
    rel_err_bound: float | None = None
    precision_bits: int | None = None

    def __len__(self):
        return len(self.x)

    def __getitem__(self, k):
        return self.x[k]


@dataclass(frozen=True)
class MatrixResult(Sequence):
    """Dense matrix plus provenance.  Behaves as a sequence over rows."""

    rows: tuple
    hra_flag: bool
    rel_err_bound: float | None = None
    precision_bits: int | None = None

    def __len__(self):
        return len(self.rows)

    def __getitem__(self, k):
        return self.rows[k]


@dataclass(frozen=True)
class SpectralResult(Sequence):
    """Descending certified values plus provenance."""

    values: tuple
    rel_err_bound: float
    precision_bits: int

    def __len__(self):
        return len(self.values)

    def __getitem__(self, k):
        return self.values[k]


# -- factor sweeps -------------------------------------------------------------

def _validate(bd: BDMatrix) -> None:
    problems = bd_validate(bd)
    if any("singular pivot" in p for p in problems):
        raise SingularMatrixError("; ".join(problems))
    if problems:
        raise ValueError("invalid decomposition: " + "; ".join(problems))


def _inverse_sweep(entries, order: int, y: list) -> list:
    """Overwrite y with A^{-1} y given the factor grid of A.

    Factor order: outermost lower factor first, then remaining lower factors,
    then the diagonal, then upper factors innermost to outermost.  Lower
    factors invert by a forward first-order recurrence over their active band,
    upper factors by the mirrored backward recurrence.  Zero multipliers are
    skipped; the comparison is exact in every supported domain.
    """
    for i in range(order - 1, 0, -1):
        for r in range(i, order):
            m = entries[r][r - i]
            if m != 0:
                y[r] = y[r] - m * y[r - 1]
    for k in range(order):
        y[k] = y[k] / entries[k][k]
    for i in range(1, order):
        for k in range(order - 2, i - 2, -1):
            g = entries[k + 1 - i][k + 1]
            if g != 0:
                y[k] = y[k] - g * y[k + 1]
    return y


def _converted_entries(bd: BDMatrix, dom: ScalarDomain):
    return [[dom.convert(v) for v in row] for row in bd.entries]


def _is_hra_solve(bd: BDMatrix, b: Sequence) -> bool:
    return bd.certificate != Certificate.UNCLASSIFIED and bool(sign_pattern(b))


def tn_solve(bd: BDMatrix, b: Sequence, mode: AccuracyMode | ScalarDomain = STRUCTURED) -> SolveResult:
    """Solve A x = b from the decomposition of A.

    mode selects the arithmetic: StructuredDouble sweeps in binary64 (the
    high-relative-accuracy route when hra_flag is true), CertifiedPrecision
    reruns the sweep at doubling precision until certified, and a ScalarDomain
    runs the sweep in that domain and returns its scalars unconverted.

    hra_flag is true iff the decomposition carries a totally positive
    certificate and b has an alternating sign pattern; only then is the sweep
    subtraction-free.
    """
    _validate(bd)
    order = bd.order
    if len(b) != order:
        raise ValueError(f"right-hand side has length {len(b)}, expected {order}")
    hra = _is_hra_solve(bd, b)

    if isinstance(mode, ScalarDomain):
        entries = _converted_entries(bd, mode)
        y = [mode.convert(v) for v in b]
        return SolveResult(tuple(_inverse_sweep(entries, order, y)), hra)

    if isinstance(mode, StructuredDouble):
        entries = _converted_entries(bd, BINARY64)
        y = [BINARY64.convert(v) for v in b]
        return SolveResult(tuple(_inverse_sweep(entries, order, y)), hra)

    if isinstance(mode, CertifiedPrecision):
        def compute(bits: int) -> list[Fraction]:
            dom = BigFloatDomain(bits)
            entries = _converted_entries(bd, dom)
            y = [dom.convert(v) for v in b]
            return [mpf_to_fraction(v) for v in _inverse_sweep(entries, order, y)]

        outcome = run_ladder(compute, mode.tolerance)
        return SolveResult(tuple(float(v) for v in outcome.values), hra,
                           float(mode.tolerance), outcome.precision_bits)

    raise TypeError(f"unsupported mode {mode!r}")


def tn_inverse(bd: BDMatrix, mode: AccuracyMode | ScalarDomain = STRUCTURED) -> MatrixResult:
    """Invert A column by column: column j is the solve against the j-th unit
    vector.  Unit vectors satisfy the alternating-sign compatibility, so on a
    totally positive certificate every column solve is subtraction-free and
    the result obeys the checkerboard sign rule."""
    _validate(bd)
    order = bd.order
    hra = bd.certificate != Certificate.UNCLASSIFIED

    def columns(dom: ScalarDomain):
        entries = _converted_entries(bd, dom)
        cols = []
        for j in range(order):
            y = [dom.one if k == j else dom.zero for k in range(order)]
            cols.append(_inverse_sweep(entries, order, y))
        return cols

    if isinstance(mode, (ScalarDomain, StructuredDouble)):
        dom = mode if isinstance(mode, ScalarDomain) else BINARY64
        cols = columns(dom)
        rows = tuple(tuple(cols[j][i] for j in range(order)) for i in range(order))
        return MatrixResult(rows, hra)

    if isinstance(mode, CertifiedPrecision):
        def compute(bits: int) -> list[Fraction]:
            cols = columns(BigFloatDomain(bits))
            return [mpf_to_fraction(cols[j][i])
                    for i in range(order) for j in range(order)]

        outcome = run_ladder(compute, mode.tolerance)
        flat = [float(v) for v in outcome.values]
        rows = tuple(tuple(flat[i * order + j] for j in range(order))
                     for i in range(order))
        return MatrixResult(rows, hra, float(mode.tolerance), outcome.precision_bits)

    raise TypeError(f"unsupported mode {mode!r}")


# -- certified spectra ---------------------------------------------------------

def _require_certified(mode) -> CertifiedPrecision:
    if not isinstance(mode, CertifiedPrecision):
        raise TypeError("spectral routines require CertifiedPrecision mode")
    return mode


def _spectral_ladder(bd: BDMatrix, mode: CertifiedPrecision, kernel) -> SpectralResult:
    def compute(bits: int) -> list[Fraction]:
        dom = BigFloatDomain(bits)
        dense = bd_expand(bd, dom)
        values = kernel(dom.ctx, dense, bits)
        return [mpf_to_fraction(v) for v in
                sorted(values, reverse=True)]

    outcome = run_ladder(compute, mode.tolerance)
    return SpectralResult(tuple(float(v) for v in outcome.values),
                          float(mode.tolerance), outcome.precision_bits)


def _eig_kernel(ctx, dense, bits: int):
    evs = ctx.eig(ctx.matrix(dense), left=False, right=False)
    # QR iteration on a real matrix can leave junk imaginary parts at low
    # precision; keep the real parts and let rung agreement arbitrate.  A
    # decisively complex pair never stabilizes and escalates to NoConvergence.
    junk = ctx.ldexp(1, -max(8, bits // 4))
    reals = []
    for ev in evs:
        re, im = ev.real, ev.imag
        if abs(im) > junk * (1 + abs(re)):
            raise RungFailed(f"complex eigenvalue at {bits} bits")
        reals.append(ctx.mpf(re))
    return reals


def _svd_kernel(ctx, dense, bits: int):
    sv = ctx.svd_r(ctx.matrix(dense), compute_uv=False)
    return [sv[k] for k in range(sv.rows * sv.cols)]


def tn_eigenvalues(bd: BDMatrix, mode: AccuracyMode) -> SpectralResult:
    """All eigenvalues of the represented matrix, descending, each certified
    to the mode's relative tolerance.  On a strictly totally positive
    certificate the values are positive and strictly decreasing."""
    _validate(bd)
    return _spectral_ladder(bd, _require_certified(mode), _eig_kernel)


def tn_singular_values(bd: BDMatrix, mode: AccuracyMode) -> SpectralResult:
    """All singular values of the represented matrix, descending, certified as
    for tn_eigenvalues.  Defined for any nonsingular decomposition."""
    _validate(bd)
    return _spectral_ladder(bd, _require_certified(mode), _svd_kernel)
