"""Arbitrary-precision reference computations used to score every other module.

The oracle deliberately avoids the bidiagonal route.  Dense matrices come from
the definitional entry formulas, eigenvalues from an in-package Householder
Hessenberg reduction plus shifted QR iteration, singular values as square
roots of the Gram matrix spectrum (the squared conditioning this costs is paid
for with working precision, which the certification ladder escalates until
successive runs agree), and inverses and solves from Gaussian elimination:
exact over rationals, magnitude-pivoted at working precision otherwise.
Floating-point results are certified by rerunning at doubled precision until
two successive runs agree componentwise to the requested decimal digits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .bd import SingularMatrixError
from .certify import (
    LADDER_START_BITS,
    NoConvergence,
    RungFailed,
    run_ladder,
)
from .domains import BigFloatDomain, RATIONAL, mpf_to_fraction
from .families import FamilySpec

__all__ = [
    "OracleResult",
    "ErrorStats",
    "ShapeMismatch",
    "NoConvergence",
    "oracle_eigenvalues",
    "oracle_singular_values",
    "oracle_inverse",
    "oracle_solve",
    "relative_errors",
]

DEFAULT_DIGITS = 100


# -- results -------------------------------------------------------------------

@dataclass(frozen=True)
class OracleResult:
    """Certified reference values.

    values holds exact rational snapshots: a tuple of Fractions for vectors, a
    tuple of row tuples for matrices.  precision_used is the working precision
    of the accepted run (0 for the exact rational path).  Rerunning at double
    precision moves every component by relative less than 10**-certified_digits.
    """

    values: tuple
    precision_used: int
    certified_digits: int
    exact: bool = False

    @property
    def is_matrix(self) -> bool:
        return bool(self.values) and isinstance(self.values[0], tuple)

    def as_floats(self):
        if self.is_matrix:
            return [[_to_float(v) for v in row] for row in self.values]
        return [_to_float(v) for v in self.values]


def _to_float(v: Fraction) -> float:
    try:
        return float(v)
    except OverflowError:
        return math.inf if v > 0 else -math.inf


class ShapeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class ErrorStats:
    componentwise: tuple
    mean: float
    max: float


# -- precision schedule --------------------------------------------------------

def _start_bits(digits: int) -> int:
    return max(LADDER_START_BITS, math.ceil(digits * math.log2(10)) + 64)


def _check_spec(spec: FamilySpec, digits: int) -> None:
    if not isinstance(spec, FamilySpec):
        raise TypeError("expected a FamilySpec")
    if digits < 1:
        raise ValueError("digits must be at least 1")
    if not spec.is_nonsingular():
        raise ValueError(f"family {spec.label()} is singular")


def _run(compute, digits: int, start_bits: int | None) -> tuple[list[Fraction], int]:
    start = start_bits if start_bits is not None else _start_bits(digits)
    outcome = run_ladder(compute, Fraction(10) ** -digits,
                         start_bits=start, ceiling_bits=start * 64)
    return outcome.values, outcome.precision_bits


# -- eigenvalues: Hessenberg reduction + shifted QR ------------------------------

def _hessenberg(ctx, A, n: int) -> None:
    """Reduce A (list of row lists, modified in place) to upper Hessenberg by
    Householder similarity transforms."""
    for k in range(n - 2):
        norm2 = ctx.fsum(A[i][k] * A[i][k] for i in range(k + 1, n))
        if norm2 == 0:
            continue
        norm = ctx.sqrt(norm2)
        a0 = A[k + 1][k]
        alpha = -norm if a0 >= 0 else norm
        v = [A[i][k] for i in range(k + 1, n)]
        v[0] = v[0] - alpha
        vnorm2 = ctx.fsum(vi * vi for vi in v)
        if vnorm2 == 0:
            continue
        two = ctx.mpf(2)
        for j in range(k, n):
            w = two * ctx.fsum(v[i - k - 1] * A[i][j] for i in range(k + 1, n)) / vnorm2
            if w != 0:
                for i in range(k + 1, n):
                    A[i][j] = A[i][j] - w * v[i - k - 1]
        for i in range(n):
            w = two * ctx.fsum(A[i][j] * v[j - k - 1] for j in range(k + 1, n)) / vnorm2
            if w != 0:
                for j in range(k + 1, n):
                    A[i][j] = A[i][j] - w * v[j - k - 1]
        A[k + 1][k] = alpha
        for i in range(k + 2, n):
            A[i][k] = ctx.zero


def _qr_step(ctx, H, lo: int, hi: int, sigma) -> None:
    """One explicit shifted QR step on the decoupled block H[lo..hi][lo..hi]."""
    for k in range(lo, hi + 1):
        H[k][k] = H[k][k] - sigma
    rotations = []
    for k in range(lo, hi):
        a, b = H[k][k], H[k + 1][k]
        r = ctx.hypot(a, b)
        if r == 0:
            c, s = ctx.one, ctx.zero
        else:
            c, s = a / r, b / r
        rotations.append((c, s))
        for j in range(k, hi + 1):
            t1, t2 = H[k][j], H[k + 1][j]
            H[k][j] = c * t1 + s * t2
            H[k + 1][j] = c * t2 - s * t1
        H[k + 1][k] = ctx.zero
    for k, (c, s) in zip(range(lo, hi), rotations):
        for i in range(lo, k + 2):
            t1, t2 = H[i][k], H[i][k + 1]
            H[i][k] = c * t1 + s * t2
            H[i][k + 1] = c * t2 - s * t1
    for k in range(lo, hi + 1):
        H[k][k] = H[k][k] + sigma


def _block_eigen_2x2(ctx, a, b, c, d):
    tr = a + d
    disc = (a - d) * (a - d) + 4 * (b * c)
    if disc < 0:
        raise RungFailed("complex 2x2 eigenvalue pair")
    root = ctx.sqrt(disc)
    l1 = (tr + root) / 2 if tr >= 0 else (tr - root) / 2
    det = a * d - b * c
    l2 = det / l1 if l1 != 0 else tr - l1
    return l1, l2


def _qr_eigenvalues(ctx, A, n: int):
    """All eigenvalues of A by Hessenberg reduction plus QR iteration: a couple
    of unshifted sweeps per block, then Wilkinson shifts with periodic
    exceptional shifts; deflation on relatively negligible subdiagonals."""
    if n == 1:
        return [A[0][0]]
    H = [list(row) for row in A]
    _hessenberg(ctx, H, n)
    eps = ctx.ldexp(1, -(ctx.prec - 8))
    evs = []
    hi = n - 1
    block_iters = 0
    total, cap = 0, 240 * n
    while hi >= 0:
        lo = hi
        while lo > 0:
            sub = abs(H[lo][lo - 1])
            if sub <= eps * (abs(H[lo - 1][lo - 1]) + abs(H[lo][lo])):
                H[lo][lo - 1] = ctx.zero
                break
            lo -= 1
        if lo == hi:
            evs.append(H[hi][hi])
            hi -= 1
            block_iters = 0
            continue
        if lo == hi - 1:
            l1, l2 = _block_eigen_2x2(ctx, H[lo][lo], H[lo][hi], H[hi][lo], H[hi][hi])
            evs.extend((l1, l2))
            hi -= 2
            block_iters = 0
            continue
        if block_iters >= 200:
            raise RungFailed(f"QR failed to deflate block [{lo},{hi}]")
        if block_iters < 2:
            sigma = ctx.zero
        elif block_iters % 12 == 11:
            sigma = H[hi][hi] + ctx.mpf("0.75") * abs(H[hi][hi - 1])
        else:
            a, b = H[hi - 1][hi - 1], H[hi - 1][hi]
            c, d = H[hi][hi - 1], H[hi][hi]
            disc = (a - d) * (a - d) + 4 * (b * c)
            if disc >= 0:
                root = ctx.sqrt(disc)
                m1 = (a + d + root) / 2
                m2 = (a + d - root) / 2
                sigma = m1 if abs(m1 - d) <= abs(m2 - d) else m2
            else:
                sigma = (a + d) / 2
        _qr_step(ctx, H, lo, hi, sigma)
        block_iters += 1
        total += 1
        if total > cap:
            raise RungFailed("QR iteration budget exhausted")
    return evs


# -- singular values: Gram spectrum --------------------------------------------

def _gram_singular_values(ctx, A, n: int):
    """Singular values as square roots of the eigenvalues of A^T A.  Forming
    the Gram matrix squares the conditioning; the certification ladder simply
    climbs to whatever precision absorbs that, so the result is still exact to
    the requested digits."""
    gram = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            v = ctx.fsum(A[k][i] * A[k][j] for k in range(n))
            gram[i][j] = v
            gram[j][i] = v
    out = []
    for ev in _qr_eigenvalues(ctx, gram, n):
        if ev <= 0:
            raise RungFailed("nonpositive Gram eigenvalue at this precision")
        out.append(ctx.sqrt(ev))
    return out


# -- elimination ----------------------------------------------------------------

def _solve_columns(A, rhs, *, exact: bool):
    """Gaussian elimination on A (destroyed) solving all right-hand sides in
    rhs simultaneously.  Exact mode takes the first nonzero pivot; the
    floating mode pivots on the largest magnitude in the column."""
    n = len(A)
    for k in range(n):
        piv = None
        if exact:
            for i in range(k, n):
                if A[i][k] != 0:
                    piv = i
                    break
        else:
            best = None
            for i in range(k, n):
                m = abs(A[i][k])
                if best is None or m > best:
                    best, piv = m, i
            if best == 0:
                piv = None
        if piv is None:
            raise SingularMatrixError("oracle elimination hit a zero column")
        if piv != k:
            A[k], A[piv] = A[piv], A[k]
            for r in rhs:
                r[k], r[piv] = r[piv], r[k]
        pk = A[k][k]
        for i in range(k + 1, n):
            f = A[i][k] / pk
            if f != 0:
                for j in range(k + 1, n):
                    A[i][j] = A[i][j] - f * A[k][j]
                for r in rhs:
                    r[i] = r[i] - f * r[k]
    solutions = []
    for r in rhs:
        x = [None] * n
        for i in range(n - 1, -1, -1):
            s = r[i]
            for j in range(i + 1, n):
                s = s - A[i][j] * x[j]
            x[i] = s / A[i][i]
        solutions.append(x)
    return solutions


# -- public operations -----------------------------------------------------------

def oracle_eigenvalues(spec: FamilySpec, digits: int = DEFAULT_DIGITS, *,
                       start_bits: int | None = None) -> OracleResult:
    """All eigenvalues of the family's dense matrix, descending, certified to
    `digits` decimal digits by precision doubling."""
    _check_spec(spec, digits)
    size = spec.order

    def compute(bits: int) -> list[Fraction]:
        dom = BigFloatDomain(bits)
        dense = spec.dense(dom)
        evs = _qr_eigenvalues(dom.ctx, dense, size)
        return [mpf_to_fraction(v) for v in sorted(evs, reverse=True)]

    values, bits = _run(compute, digits, start_bits)
    return OracleResult(tuple(values), bits, digits)


def oracle_singular_values(spec: FamilySpec, digits: int = DEFAULT_DIGITS, *,
                           start_bits: int | None = None) -> OracleResult:
    """All singular values, descending, certified as for oracle_eigenvalues."""
    _check_spec(spec, digits)
    size = spec.order

    def compute(bits: int) -> list[Fraction]:
        dom = BigFloatDomain(bits)
        dense = spec.dense(dom)
        svs = _gram_singular_values(dom.ctx, dense, size)
        return [mpf_to_fraction(v) for v in sorted(svs, reverse=True)]

    values, bits = _run(compute, digits, start_bits)
    return OracleResult(tuple(values), bits, digits)


def _rational_dense(spec: FamilySpec):
    return [[Fraction(v) for v in row] for row in spec.dense(RATIONAL)]


def _spec_is_rational(spec: FamilySpec) -> bool:
    values = list(spec.params.values()) + list(spec.weights or ())
    return all(v.is_rational for v in values)


def oracle_inverse(spec: FamilySpec, digits: int = DEFAULT_DIGITS, *,
                   start_bits: int | None = None) -> OracleResult:
    """Inverse of the family's dense matrix: exact rational elimination when
    every parameter is rational, certified high-precision elimination else."""
    _check_spec(spec, digits)
    size = spec.order

    if _spec_is_rational(spec):
        A = _rational_dense(spec)
        eye = [[Fraction(int(i == j)) for j in range(size)] for i in range(size)]
        cols = _solve_columns(A, eye, exact=True)
        rows = tuple(tuple(cols[j][i] for j in range(size)) for i in range(size))
        return OracleResult(rows, 0, digits, exact=True)

    def compute(bits: int) -> list[Fraction]:
        dom = BigFloatDomain(bits)
        A = spec.dense(dom)
        eye = [[dom.one if i == j else dom.zero for i in range(size)]
               for j in range(size)]
        cols = _solve_columns(A, eye, exact=False)
        return [mpf_to_fraction(cols[j][i]) for i in range(size) for j in range(size)]

    flat, bits = _run(compute, digits, start_bits)
    rows = tuple(tuple(flat[i * size + j] for j in range(size)) for i in range(size))
    return OracleResult(rows, bits, digits)


def _rhs_fraction(v) -> Fraction:
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ValueError("non-finite right-hand side entry")
        return Fraction(v)
    if hasattr(v, "_mpf_"):
        return mpf_to_fraction(v)
    if hasattr(v, "is_rational") and v.is_rational:
        return v.as_fraction()
    raise TypeError(f"cannot take {v!r} as an exact right-hand side entry")


def oracle_solve(spec: FamilySpec, b: Sequence, digits: int = DEFAULT_DIGITS, *,
                 start_bits: int | None = None) -> OracleResult:
    """Certified solution of A x = b for the family's dense matrix A.

    Every finite binary float is a rational number, so b always enters the
    exact path unchanged; the matrix decides which route runs.
    """
    _check_spec(spec, digits)
    size = spec.order
    if len(b) != size:
        raise ShapeMismatch(f"right-hand side has length {len(b)}, expected {size}")

    if _spec_is_rational(spec):
        A = _rational_dense(spec)
        rhs = [[_rhs_fraction(v) for v in b]]
        (x,) = _solve_columns(A, rhs, exact=True)
        return OracleResult(tuple(x), 0, digits, exact=True)

    def compute(bits: int) -> list[Fraction]:
        dom = BigFloatDomain(bits)
        A = spec.dense(dom)
        rhs = [[dom.convert(v) for v in b]]
        (x,) = _solve_columns(A, rhs, exact=False)
        return [mpf_to_fraction(v) for v in x]

    values, bits = _run(compute, digits, start_bits)
    return OracleResult(tuple(values), bits, digits)


# -- scoring ----------------------------------------------------------------------

def _reference_shape(values) -> list:
    if values and isinstance(values[0], (tuple, list)):
        return [len(row) for row in values]
    return [-1] * len(values)


def _flatten(values):
    if values and isinstance(values[0], (tuple, list)):
        return [v for row in values for v in row]
    return list(values)


def _approx_fraction(v):
    """Exact rational snapshot of an approximation; None encodes non-finite."""
    if isinstance(v, float):
        return Fraction(v) if math.isfinite(v) else None
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    if hasattr(v, "_mpf_"):
        try:
            return mpf_to_fraction(v)
        except ValueError:
            return None
    if hasattr(v, "is_rational"):
        if v.is_rational:
            return v.as_fraction()
        return Fraction(float(v))
    if isinstance(v, complex):
        return Fraction(v.real) if math.isfinite(v.real) and v.imag == 0 else None
    raise TypeError(f"cannot score value of type {type(v).__name__}")


def relative_errors(approx, reference) -> ErrorStats:
    """Componentwise |a - r| / |r| against the oracle, with 0/0 -> 0 and
    finite/0 -> +inf; plus the mean and max over all components."""
    ref_values = reference.values if isinstance(reference, OracleResult) else reference
    approx_values = getattr(approx, "rows", None)
    if approx_values is None:
        approx_values = getattr(approx, "x", None)
    if approx_values is None:
        approx_values = getattr(approx, "values", approx)
    if _reference_shape(approx_values) != _reference_shape(ref_values):
        raise ShapeMismatch(
            f"approximation shape {_reference_shape(approx_values)} does not "
            f"match reference shape {_reference_shape(ref_values)}")
    errs: list[Fraction | None] = []
    for a, r in zip(_flatten(approx_values), _flatten(ref_values)):
        r = Fraction(r) if not isinstance(r, Fraction) else r
        af = _approx_fraction(a)
        if af is None:
            errs.append(None)
        elif r == 0:
            errs.append(Fraction(0) if af == 0 else None)
        else:
            errs.append(abs(af - r) / abs(r))
    component = tuple(math.inf if e is None else _to_float(e) for e in errs)
    if any(e is None for e in errs):
        return ErrorStats(component, math.inf, math.inf)
    total = sum(errs, Fraction(0))
    return ErrorStats(component,
                      _to_float(total / len(errs)) if errs else 0.0,
                      _to_float(max(errs)) if errs else 0.0)
