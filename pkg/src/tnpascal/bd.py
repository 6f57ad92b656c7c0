"""Bidiagonal decomposition (BD) of square matrices via Neville elimination.

A nonsingular matrix admitting exchange-free Neville elimination factors as

    A = F_{N-1} ... F_1 . D . G_1 ... G_{N-1}

where each F_i is unit lower bidiagonal, each G_i unit upper bidiagonal, and
D is the diagonal of elimination pivots.  The whole factorization is stored
as one square array: pivots on the diagonal, the lower multipliers m_{ij} of
the elimination of A below it, and the multipliers of the elimination of the
transpose mirrored above it.  Factor F_i carries m_{r, r-i} at position
(r, r-1) for r = i+1..N; G_i is the mirrored upper layout.

Totally positive structure is recorded as a certificate: STP (all multipliers
and pivots positive), NONSINGULAR_TP (nonnegative multipliers, positive
pivots, and zeros only in bottom-contiguous runs per column), or UNCLASSIFIED.
The certificate is what downstream solvers consult before promising
subtraction-free sweeps.

Zero tests are exact in every domain, including binary64: the matrix families
served here produce structural zeros, never near-zeros, so no epsilon is
applied.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction

import mpmath

from .domains import BINARY64, RATIONAL, Binary64Domain, ScalarDomain
from .instrument import CountingScalar, counting_value
from .params import ParamExpr


class RowExchangeRequired(ValueError):
    """Neville elimination hit a zero above a nonzero in some column."""


class SingularMatrixError(ValueError):
    """A diagonal elimination pivot is zero."""


class NotLowerTriangular(ValueError):
    """Column scaling requires an upper-triangle-free decomposition."""


class SaturationError(OverflowError):
    """Binary64 expansion produced non-finite entries."""


class Certificate(enum.Enum):
    STP = "stp"
    NONSINGULAR_TP = "tp"
    UNCLASSIFIED = "unclassified"


def _is_zero(x) -> bool:
    return x == 0


def _is_positive(x) -> bool:
    return x > 0


def _is_negative(x) -> bool:
    return x < 0


@dataclass(frozen=True)
class BDMatrix:
    """Bidiagonal decomposition stored as a single square array.

    entries[i][j] (0-based) holds: the pivot p_{i+1} when i == j, the lower
    multiplier m_{i+1, j+1} when i > j, and the transpose-side multiplier
    m~_{j+1, i+1} when i < j.
    """

    entries: tuple
    certificate: Certificate = Certificate.UNCLASSIFIED

    def __post_init__(self):
        n = len(self.entries)
        if n == 0 or any(len(row) != n for row in self.entries):
            raise ValueError("BD array must be square and nonempty")
        object.__setattr__(self, "entries", tuple(tuple(row) for row in self.entries))

    @property
    def order(self) -> int:
        return len(self.entries)

    @property
    def pivots(self) -> tuple:
        return tuple(self.entries[i][i] for i in range(self.order))

    def lower_multipliers(self) -> dict:
        """{(i, j): m_{ij}} for 1 <= j < i <= N."""
        return {(i + 1, j + 1): self.entries[i][j]
                for i in range(self.order) for j in range(i)}

    def upper_multipliers(self) -> dict:
        """{(i, j): m~_{ij}} for 1 <= j < i <= N (multipliers of the transpose)."""
        return {(i + 1, j + 1): self.entries[j][i]
                for i in range(self.order) for j in range(i)}

    @staticmethod
    def from_parts(pivots, lower=None, upper=None,
                   certificate: Certificate | None = None) -> "BDMatrix":
        """Assemble from a pivot sequence and multiplier dicts keyed (i, j), i > j."""
        n = len(pivots)
        entries = [[0] * n for _ in range(n)]
        for i in range(n):
            entries[i][i] = pivots[i]
        for (i, j), v in (lower or {}).items():
            if not 1 <= j < i <= n:
                raise ValueError(f"lower multiplier index ({i},{j}) out of range")
            entries[i - 1][j - 1] = v
        for (i, j), v in (upper or {}).items():
            if not 1 <= j < i <= n:
                raise ValueError(f"upper multiplier index ({i},{j}) out of range")
            entries[j - 1][i - 1] = v
        if certificate is None:
            certificate = classify_certificate(entries)
        return BDMatrix(tuple(tuple(row) for row in entries), certificate)


def classify_certificate(entries) -> Certificate:
    """Sign-inspect a BD array: STP, NONSINGULAR_TP, or UNCLASSIFIED."""
    n = len(entries)
    for i in range(n):
        if not _is_positive(entries[i][i]):
            return Certificate.UNCLASSIFIED
    strict = True
    for j in range(n - 1):
        for column in (
            [entries[i][j] for i in range(j + 1, n)],      # lower m_{ij}
            [entries[j][i] for i in range(j + 1, n)],      # upper m~_{ij}
        ):
            seen_zero = False
            for v in column:
                if _is_negative(v):
                    return Certificate.UNCLASSIFIED
                if _is_zero(v):
                    seen_zero = True
                    strict = False
                elif seen_zero:
                    # zero above a nonzero breaks the uniqueness pattern
                    return Certificate.UNCLASSIFIED
    return Certificate.STP if strict else Certificate.NONSINGULAR_TP


def bd_validate(bd: BDMatrix) -> list[str]:
    """Diagnostics for violations of the invariants claimed by the certificate.

    Empty list means the stored certificate is consistent with the entries.
    """
    diagnostics = []
    n = bd.order
    entries = bd.entries
    for i in range(n):
        if _is_zero(entries[i][i]):
            diagnostics.append(f"singular pivot at position {i + 1}")
        elif bd.certificate != Certificate.UNCLASSIFIED and not _is_positive(entries[i][i]):
            diagnostics.append(f"nonpositive pivot at position {i + 1}")
    if bd.certificate == Certificate.UNCLASSIFIED:
        return diagnostics
    for j in range(n - 1):
        for side, column in (
            ("lower", [(i + 1, entries[i][j]) for i in range(j + 1, n)]),
            ("upper", [(i + 1, entries[j][i]) for i in range(j + 1, n)]),
        ):
            seen_zero = False
            for i, v in column:
                if bd.certificate == Certificate.STP and not _is_positive(v):
                    diagnostics.append(
                        f"nonpositive {side} multiplier at ({i},{j + 1})")
                elif _is_negative(v):
                    diagnostics.append(
                        f"negative {side} multiplier at ({i},{j + 1})")
                if _is_zero(v):
                    seen_zero = True
                elif seen_zero and bd.certificate == Certificate.NONSINGULAR_TP:
                    diagnostics.append(
                        f"zero-propagation violated at column {j + 1} in {side} multipliers")
                    break
    return diagnostics


def _require_valid(bd: BDMatrix) -> None:
    problems = bd_validate(bd)
    if problems:
        raise ValueError("invalid decomposition: " + "; ".join(problems))


def bd_expand(bd: BDMatrix, dom: ScalarDomain):
    """Multiply out the factors; O(N^3) two-term row/column updates."""
    _require_valid(bd)
    n = bd.order
    e = [[dom.convert(x) for x in row] for row in bd.entries]
    zero = dom.zero
    m = [[zero] * n for _ in range(n)]
    for r in range(n):
        m[r][r] = e[r][r]
    # right-multiply by G_1 .. G_{N-1}: column c gains column c-1 times the
    # multiplier housed at (c-i, c); descending c keeps reads unmodified
    for i in range(1, n):
        for c in range(n - 1, i - 1, -1):
            g = e[c - i][c]
            if _is_zero(g):
                continue
            for r in range(n):
                if not _is_zero(m[r][c - 1]):
                    m[r][c] = m[r][c] + m[r][c - 1] * g
    # left-multiply by F_1 .. F_{N-1}: row r gains row r-1 times the
    # multiplier housed at (r, r-i); descending r keeps reads unmodified
    for i in range(1, n):
        for r in range(n - 1, i - 1, -1):
            f = e[r][r - i]
            if _is_zero(f):
                continue
            row, prev = m[r], m[r - 1]
            for c in range(n):
                if not _is_zero(prev[c]):
                    row[c] = row[c] + prev[c] * f
    if isinstance(dom, Binary64Domain):
        for row in m:
            for v in row:
                if not math.isfinite(counting_value(v)):
                    raise SaturationError("binary64 expansion saturated to non-finite values")
    return m


def bd_apply(bd: BDMatrix, v, dom: ScalarDomain):
    """A . v without forming A; O(N^2)."""
    _require_valid(bd)
    n = bd.order
    if len(v) != n:
        raise ValueError(f"vector length {len(v)} does not match order {n}")
    e = [[dom.convert(x) for x in row] for row in bd.entries]
    y = [dom.convert(x) for x in v]
    # rightmost factor acts first: G_{N-1}, ..., G_1, then D, then F_1, ..., F_{N-1}
    for i in range(n - 1, 0, -1):
        for s in range(i - 1, n - 1):
            g = e[s + 1 - i][s + 1]
            if not (_is_zero(g) or _is_zero(y[s + 1])):
                y[s] = y[s] + g * y[s + 1]
    for r in range(n):
        y[r] = e[r][r] * y[r]
    for i in range(1, n):
        for r in range(n - 1, i - 1, -1):
            f = e[r][r - i]
            if not (_is_zero(f) or _is_zero(y[r - 1])):
                y[r] = y[r] + f * y[r - 1]
    return y


@dataclass(frozen=True)
class NevilleTrace:
    """Pivot and multiplier tables of one exchange-free elimination run."""

    order: int
    pivots: dict          # {(i, j): p_{ij}} for 1 <= j <= i <= N
    multipliers: dict     # {(i, j): m_{ij}} for 1 <= j < i <= N
    row_exchange: bool    # always False: exchanges are refused, not performed


def neville_eliminate(A, dom: ScalarDomain) -> NevilleTrace:
    """Eliminate with the previous row (not the pivot row), no exchanges.

    Column k is zeroed below the diagonal by subtracting from each row the
    multiplier m_{ik} = p_{ik}/p_{i-1,k} times the row above; m_{ik} is 0 by
    convention when the denominator is 0.  A zero sitting above a nonzero in
    an elimination column would force a row exchange and raises instead.
    """
    n = len(A)
    if n == 0 or any(len(row) != n for row in A):
        raise ValueError("matrix must be square and nonempty")
    w = [[dom.convert(x) for x in row] for row in A]
    zero = dom.zero
    pivots = {}
    multipliers = {}
    for k in range(n):
        for i in range(k, n):
            pivots[(i + 1, k + 1)] = w[i][k]
        if k == n - 1:
            break
        seen_zero = False
        for i in range(k, n):
            if _is_zero(w[i][k]):
                seen_zero = True
            elif seen_zero:
                raise RowExchangeRequired(
                    f"column {k + 1} has a zero above a nonzero; "
                    "exchange-free Neville elimination is impossible")
        for i in range(n - 1, k, -1):
            if _is_zero(w[i - 1][k]):
                multipliers[(i + 1, k + 1)] = zero
                continue
            m = w[i][k] / w[i - 1][k]
            multipliers[(i + 1, k + 1)] = m
            if not _is_zero(m):
                for j in range(k + 1, n):
                    w[i][j] = w[i][j] - m * w[i - 1][j]
            w[i][k] = zero
    for i in range(n):
        if _is_zero(pivots[(i + 1, i + 1)]):
            raise SingularMatrixError(f"zero diagonal pivot at position {i + 1}")
    return NevilleTrace(order=n, pivots=pivots, multipliers=multipliers,
                        row_exchange=False)


def bd_from_dense(A, dom: ScalarDomain) -> BDMatrix:
    """Neville-eliminate A and A^T and assemble the classified BD array."""
    n = len(A)
    trace = neville_eliminate(A, dom)
    transpose = [[A[j][i] for j in range(n)] for i in range(n)]
    trace_t = neville_eliminate(transpose, dom)
    entries = [[None] * n for _ in range(n)]
    for i in range(n):
        entries[i][i] = trace.pivots[(i + 1, i + 1)]
        for j in range(i):
            entries[i][j] = trace.multipliers[(i + 1, j + 1)]
            entries[j][i] = trace_t.multipliers[(i + 1, j + 1)]
    return BDMatrix(tuple(tuple(row) for row in entries),
                    classify_certificate(entries))


def bd_determinant(bd: BDMatrix, dom: ScalarDomain | None = None):
    """Product of the diagonal pivots (the determinant of the expansion)."""
    _require_valid(bd)
    result = None
    for i in range(bd.order):
        p = dom.convert(bd.entries[i][i]) if dom is not None else bd.entries[i][i]
        result = p if result is None else result * p
    return result


def bd_scale_columns(bd: BDMatrix, diag) -> BDMatrix:
    """BD of expand(bd) . diag(d) for lower-triangular decompositions.

    Column scaling leaves the Neville multipliers of a lower-triangular
    matrix unchanged and multiplies pivot i by d_i.
    """
    _require_valid(bd)
    n = bd.order
    if len(diag) != n:
        raise ValueError(f"diagonal length {len(diag)} does not match order {n}")
    for i in range(n):
        for j in range(i + 1, n):
            if not _is_zero(bd.entries[i][j]):
                raise NotLowerTriangular(
                    f"upper multiplier at ({j + 1},{i + 1}) is nonzero")
    entries = [list(row) for row in bd.entries]
    for i in range(n):
        entries[i][i] = entries[i][i] * diag[i]
    return BDMatrix(tuple(tuple(row) for row in entries),
                    classify_certificate(entries))


# -- JSON serialization ----------------------------------------------------

def _encode_scalar(x) -> str:
    x = counting_value(x)
    if isinstance(x, bool):
        raise TypeError("bool is not a BD scalar")
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, ParamExpr):
        if x.is_rational:
            return _encode_scalar(x.as_fraction())
        ctx = mpmath.mp.clone()
        ctx.prec = 180
        return mpmath.nstr(x.to_mpf(ctx), 50)   # lossy for irrationals, documented
    if isinstance(x, mpmath.mpf):
        prec = getattr(getattr(x, "context", None), "prec", mpmath.mp.prec)
        return mpmath.nstr(x, max(17, int(prec * 0.302) + 3))
    raise TypeError(f"cannot serialize scalar of type {type(x).__name__}")


def _decode_scalar(s) -> Fraction:
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, float):
        return Fraction(s)
    if isinstance(s, str):
        if "/" in s:
            num, den = s.split("/", 1)
            return Fraction(int(num), int(den))
        return Fraction(Decimal(s))
    raise ValueError(f"cannot decode scalar {s!r}")


def bd_to_json(bd: BDMatrix) -> str:
    """Serialize to the documented JSON schema.

    Rational scalars are exact ("p/q" or integer strings) and round-trip
    bit-identically; irrational ParamExpr entries are written as 50-digit
    decimal strings and round-trip only to that precision.
    """
    n = bd.order
    lower = [{"i": i + 1, "j": j + 1, "v": _encode_scalar(bd.entries[i][j])}
             for i in range(n) for j in range(i)]
    upper = [{"i": j + 1, "j": i + 1, "v": _encode_scalar(bd.entries[j][i])}
             for i in range(n) for j in range(i)]
    return json.dumps({
        "order": n,
        "pivots": [_encode_scalar(p) for p in bd.pivots],
        "lower": lower,
        "upper": upper,
        "certificate": bd.certificate.value,
    })


def bd_from_json(text: str) -> BDMatrix:
    """Parse the JSON schema back into a BD with Fraction entries."""
    data = json.loads(text)
    n = data["order"]
    if not isinstance(n, int) or n < 1:
        raise ValueError("order must be a positive integer")
    pivots = data["pivots"]
    if len(pivots) != n:
        raise ValueError(f"expected {n} pivots, got {len(pivots)}")
    entries = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        entries[i][i] = _decode_scalar(pivots[i])
    for part, check in (("lower", lambda i, j: i > j), ("upper", lambda i, j: i < j)):
        for item in data.get(part, []):
            i, j = item["i"], item["j"]
            if not (1 <= i <= n and 1 <= j <= n and check(i, j)):
                raise ValueError(f"{part} entry ({i},{j}) out of range")
            entries[i - 1][j - 1] = _decode_scalar(item["v"])
    try:
        certificate = Certificate(data["certificate"])
    except (KeyError, ValueError):
        raise ValueError(f"unknown certificate tag {data.get('certificate')!r}")
    return BDMatrix(tuple(tuple(row) for row in entries), certificate)
