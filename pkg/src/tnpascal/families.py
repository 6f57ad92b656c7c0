"""Matrix families with closed-form bidiagonal decompositions.

Two base families and four classical specializations:

* generalized lower-triangular Pascal matrices ``P(x, step)`` with entries
  ``factorial_power(x, i-j, step) * C(i-1, j-1)``;
* lattice-path matrices ``L(alpha, beta, gamma)`` defined by the recurrence
  ``k_ij = alpha*k_{i,j-1} + beta*k_{i-1,j} + gamma*k_{i-1,j-1}`` with
  geometric first row (powers of alpha) and first column (powers of beta);
* the classical kinds pxy, r, phi, psi, each a lattice-path matrix under a
  parameter map.

Every family ships a dense definitional constructor and a closed-form BD
constructor.  The dense recurrence above puts powers of alpha in the first
row, which forces the BD orientation: lower multipliers all equal beta,
upper multipliers all equal alpha, pivots (alpha*beta+gamma)^(i-1).  The
factorization reads L(alpha,beta,gamma) = P(beta,0) . D . P(alpha,0)^T.

Structure decisions (which of the three Pascal BD cases applies, positivity
certificates, nonsingularity) are always made on exact promoted values, never
on rounded floats; float inputs are promoted via their exact bit patterns.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .bd import BDMatrix, Certificate, bd_scale_columns, classify_certificate
from .domains import ScalarDomain
from .instrument import counting_value
from .params import ParamExpr, as_param, parse_param


class SingularFamily(ValueError):
    """Family parameters make the matrix singular."""


class SingularDiagonal(ValueError):
    """A diagonal scale factor is zero."""


@lru_cache(maxsize=None)
def _binomial_row(n: int) -> tuple:
    if n == 0:
        return (1,)
    prev = _binomial_row(n - 1)
    return tuple(
        (prev[k - 1] if k else 0) + (prev[k] if k < n else 0)
        for k in range(n + 1))


def binomial(n: int, k: int) -> int:
    """Exact C(n, k) by the addition recurrence (cached rows)."""
    if k < 0 or k > n:
        return 0
    return _binomial_row(n)[k]


def factorial_power(x, n: int, step):
    """x (x+step) (x+2 step) ... (x+(n-1) step); empty product is 1."""
    if n < 0:
        raise ValueError("factorial power needs a nonnegative exponent")
    if n == 0:
        return 1
    acc = x
    for t in range(1, n):
        acc = acc * (x + t * step)
    return acc


def _exact(value) -> ParamExpr:
    """Exact promoted copy for structure decisions (unwraps instrumentation)."""
    return as_param(counting_value(value))


# -- generalized Pascal family ----------------------------------------------

def pascal_dense(x, step, n: int, dom: ScalarDomain):
    """Dense (n+1)x(n+1) lower-triangular generalized Pascal matrix."""
    size = n + 1
    xv, sv = dom.convert(x), dom.convert(step)
    zero = dom.zero
    rows = []
    for i in range(1, size + 1):
        row = []
        for j in range(1, size + 1):
            if j > i:
                row.append(zero)
            else:
                row.append(factorial_power(xv, i - j, sv) * dom.convert(binomial(i - 1, j - 1)))
        rows.append(row)
    return rows


def _pascal_case(x: ParamExpr, step: ParamExpr, n: int) -> tuple[str, int | None]:
    """Which of the three BD structure cases (x relative to multiples of step)."""
    for k in range(n):
        if x == step * k:
            return "ii", k
    for k in range(1, n):
        if x == -(step * k):
            return "iii", k
    return "i", None


def pascal_bd(x, step, n: int) -> BDMatrix:
    """Closed-form BD of the generalized Pascal matrix: unit pivots, lower
    multipliers x + (i-2j)*step on the case-dependent support, empty upper."""
    xe, se = _exact(x), _exact(step)
    case, k = _pascal_case(xe, se, n)
    size = n + 1
    entries = [[0] * size for _ in range(size)]
    for i in range(size):
        entries[i][i] = 1

    def value(i, j):            # 1-based, i > j
        t = i - 2 * j
        return x if t == 0 else x + t * step

    if case == "i":
        for i in range(2, size + 1):
            for j in range(1, i):
                entries[i - 1][j - 1] = value(i, j)
    elif case == "ii":
        for j in range(1, min(k, size) + 1):
            for i in range(j + 1, size + 1):
                entries[i - 1][j - 1] = value(i, j)
    else:
        for j in range(1, size):
            for i in range(j + 1, min(j + k, size) + 1):
                entries[i - 1][j - 1] = value(i, j)

    exact_entries = [[0] * size for _ in range(size)]
    for i in range(size):
        exact_entries[i][i] = 1
        for j in range(i):
            raw = entries[i][j]
            exact_entries[i][j] = raw if isinstance(raw, int) else _exact(raw)
    return BDMatrix(tuple(tuple(row) for row in entries),
                    classify_certificate(exact_entries))


def pascal_is_tp(x, step, n: int) -> bool:
    """Total positivity test: x >= (n-1)|step| or x = k|step|, k in 0..n-1."""
    xe, se = _exact(x), _exact(step)
    astep = abs(se)
    if xe >= astep * (n - 1):
        return True
    for k in range(n):
        if xe == astep * k:
            return True
    return False


def pascal_scaled_dense(x, y, step, weights, n: int, dom: ScalarDomain):
    """Dense column-scaled Pascal: entry = w_{j-1} x^{(i-j)} y^{(j-1)} C(i-1,j-1)
    (factorial powers with the given step)."""
    weights = _default_weights(weights, n)
    size = n + 1
    xv, yv, sv = dom.convert(x), dom.convert(y), dom.convert(step)
    zero = dom.zero
    rows = []
    for i in range(1, size + 1):
        row = []
        for j in range(1, size + 1):
            if j > i:
                row.append(zero)
            else:
                row.append(dom.convert(weights[j - 1])
                           * factorial_power(xv, i - j, sv)
                           * factorial_power(yv, j - 1, sv)
                           * dom.convert(binomial(i - 1, j - 1)))
        rows.append(row)
    return rows


def _default_weights(weights, n: int):
    if weights is None:
        return (1,) * (n + 1)
    weights = tuple(weights)
    if len(weights) != n + 1:
        raise ValueError(f"need {n + 1} weights, got {len(weights)}")
    return weights


def pascal_scaled_bd(x, y, step, weights, n: int) -> BDMatrix:
    """BD of the column-scaled Pascal family: same multipliers, pivots
    w_{j} y^{(j)|step} (factorial powers of y)."""
    weights = _default_weights(weights, n)
    ye, se = _exact(y), _exact(step)
    diag = []
    power = 1
    exact_power = ParamExpr.rational(1)
    for j in range(n + 1):
        if j > 0:
            factor_index = j - 1
            power = power * (y + factor_index * step) if j > 1 else y
            exact_power = exact_power * (ye + se * factor_index)
        d = weights[j] * power if j > 0 else weights[j]
        if _exact(weights[j]) * exact_power == 0:
            raise SingularDiagonal(f"zero diagonal scale at position {j + 1}")
        diag.append(d)
    return bd_scale_columns(pascal_bd(x, step, n), diag)


# -- lattice-path family ------------------------------------------------------

def lattice_dense(alpha, beta, gamma, n: int, dom: ScalarDomain):
    """Dense (n+1)x(n+1) lattice-path matrix by its defining recurrence."""
    size = n + 1
    a, b, g = dom.convert(alpha), dom.convert(beta), dom.convert(gamma)
    rows = [[dom.one] * size for _ in range(size)]
    for j in range(1, size):
        rows[0][j] = rows[0][j - 1] * a
    for i in range(1, size):
        rows[i][0] = rows[i - 1][0] * b
    for i in range(1, size):
        for j in range(1, size):
            rows[i][j] = a * rows[i][j - 1] + b * rows[i - 1][j] + g * rows[i - 1][j - 1]
    return rows


def lattice_bd(alpha, beta, gamma, n: int) -> BDMatrix:
    """Closed-form BD of the lattice-path matrix.

    Pivots are (alpha*beta+gamma)^(i-1); with powers of alpha along the first
    row of the dense matrix, the elimination multipliers of the matrix itself
    are all beta (lower) and those of its transpose all alpha (upper).  The
    data path spends exactly n+1 scalar operations: one multiply and one add
    for the pivot base, then n-1 multiplies for its powers.
    """
    ae, be, ge = _exact(alpha), _exact(beta), _exact(gamma)
    pivot_base_exact = ae * be + ge
    if pivot_base_exact == 0:
        raise SingularFamily("alpha*beta + gamma = 0 makes the matrix singular")
    size = n + 1
    entries = [[0] * size for _ in range(size)]
    entries[0][0] = 1
    if n >= 1:
        d = alpha * beta + gamma
        entries[1][1] = d
        for i in range(2, size):
            entries[i][i] = entries[i - 1][i - 1] * d
        for i in range(size):
            for j in range(i):
                entries[i][j] = beta
                entries[j][i] = alpha
    sa, sb, sd = ae.sign(), be.sign(), pivot_base_exact.sign()
    if n == 0:
        certificate = Certificate.STP
    elif sd > 0 and sa > 0 and sb > 0:
        certificate = Certificate.STP
    elif sd > 0 and sa >= 0 and sb >= 0:
        certificate = Certificate.NONSINGULAR_TP
    else:
        certificate = Certificate.UNCLASSIFIED
    return BDMatrix(tuple(tuple(row) for row in entries), certificate)


# -- classical kinds ----------------------------------------------------------

CLASSIC_KINDS = ("pxy", "r", "phi", "psi")


def _classic_lattice_params(kind: str, x, y):
    """Map a classical kind to lattice (alpha, beta, gamma)."""
    if kind == "pxy":
        return 0, x, y
    if kind == "r":
        return x, y, 0
    if kind == "phi":
        return 0, x * y, y * y
    if kind == "psi":
        xe, ye = _exact(x), _exact(y)
        if xe == 0:
            raise ZeroDivisionError("psi kind requires x != 0")
        # exact division: int/int would otherwise round through binary64
        return ye / xe, xe * ye, 0
    raise ValueError(f"unknown classical kind {kind!r}")


def classic_bd(kind: str, x, y, n: int) -> BDMatrix:
    a, b, g = _classic_lattice_params(kind, x, y)
    return lattice_bd(a, b, g, n)


def classic_dense(kind: str, x, y, n: int, dom: ScalarDomain):
    """Dense classical matrices from their definitional entry formulas."""
    size = n + 1
    xv, yv = dom.convert(x), dom.convert(y)
    zero = dom.zero

    def power(base, e):
        out = dom.one
        for _ in range(abs(e)):
            out = out * base
        # negative exponents appear above the diagonal of the symmetric kind
        return out if e >= 0 else dom.one / out

    rows = []
    for i in range(1, size + 1):
        row = []
        for j in range(1, size + 1):
            if kind == "pxy":
                v = zero if j > i else power(xv, i - j) * power(yv, j - 1) \
                    * dom.convert(binomial(i - 1, j - 1))
            elif kind == "r":
                v = power(xv, j - 1) * power(yv, i - 1) * dom.convert(binomial(i + j - 2, j - 1))
            elif kind == "phi":
                v = zero if j > i else power(xv, i - j) * power(yv, i + j - 2) \
                    * dom.convert(binomial(i - 1, j - 1))
            elif kind == "psi":
                v = power(xv, i - j) * power(yv, i + j - 2) * dom.convert(binomial(i + j - 2, j - 1))
            else:
                raise ValueError(f"unknown classical kind {kind!r}")
            row.append(v)
        rows.append(row)
    return rows


# -- family specifications ----------------------------------------------------

_FAMILY_KEYS = {
    "pnl": ("x", "lambda"),
    "pnl_xya": ("x", "y", "lambda"),
    "lattice": ("alpha", "beta", "gamma"),
    "pxy": ("x", "y"),
    "r": ("x", "y"),
    "phi": ("x", "y"),
    "psi": ("x", "y"),
}


@dataclass(frozen=True)
class FamilySpec:
    """A matrix family plus exact parameters; order is n+1."""

    kind: str
    params: dict
    n: int
    weights: tuple | None = None     # pnl_xya only

    def __post_init__(self):
        if self.kind not in _FAMILY_KEYS:
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.n < 0:
            raise ValueError("n must be nonnegative")
        keys = _FAMILY_KEYS[self.kind]
        if set(self.params) != set(keys):
            missing = set(keys) - set(self.params)
            extra = set(self.params) - set(keys)
            raise ValueError(
                f"{self.kind} needs parameters {keys}; missing {sorted(missing)}, "
                f"unexpected {sorted(extra)}")
        object.__setattr__(self, "params",
                           {k: as_param(self.params[k]) for k in keys})
        if self.weights is not None:
            if self.kind != "pnl_xya":
                raise ValueError("weights are only meaningful for pnl_xya")
            object.__setattr__(self, "weights",
                               tuple(as_param(w) for w in self.weights))
        if self.kind == "psi" and self.params["x"] == 0:
            raise ValueError("psi requires x != 0")

    @property
    def order(self) -> int:
        return self.n + 1

    def label(self) -> str:
        text = f"{self.kind}:" + ",".join(
            f"{k}={self.params[k]}" for k in _FAMILY_KEYS[self.kind])
        if self.weights is not None:
            text += ",a=[" + ";".join(str(w) for w in self.weights) + "]"
        return text

    def is_nonsingular(self) -> bool:
        p = self.params
        if self.kind == "pnl":
            return True
        if self.kind == "pnl_xya":
            y, step = p["y"], p["lambda"]
            weights = self.weights or (ParamExpr.rational(1),) * (self.n + 1)
            for j in range(self.n + 1):
                if weights[j] * factorial_power(y, j, step) == 0:
                    return False
            return True
        if self.kind == "lattice":
            return p["alpha"] * p["beta"] + p["gamma"] != 0
        if self.kind == "pxy":
            return p["y"] != 0
        if self.kind == "r":
            return p["x"] * p["y"] != 0
        if self.kind == "phi":
            return p["y"] != 0
        return p["x"] != 0 and p["y"] != 0   # psi

    def bd(self) -> BDMatrix:
        p = self.params
        if self.kind == "pnl":
            return pascal_bd(p["x"], p["lambda"], self.n)
        if self.kind == "pnl_xya":
            return pascal_scaled_bd(p["x"], p["y"], p["lambda"], self.weights, self.n)
        if self.kind == "lattice":
            return lattice_bd(p["alpha"], p["beta"], p["gamma"], self.n)
        return classic_bd(self.kind, p["x"], p["y"], self.n)

    def dense(self, dom: ScalarDomain):
        p = self.params
        if self.kind == "pnl":
            return pascal_dense(p["x"], p["lambda"], self.n, dom)
        if self.kind == "pnl_xya":
            return pascal_scaled_dense(p["x"], p["y"], p["lambda"], self.weights,
                                       self.n, dom)
        if self.kind == "lattice":
            return lattice_dense(p["alpha"], p["beta"], p["gamma"], self.n, dom)
        return classic_dense(self.kind, p["x"], p["y"], self.n, dom)


def parse_family(text: str, n: int) -> FamilySpec:
    """Parse 'kind:key=expr,...' (e.g. 'lattice:alpha=sqrt(2),beta=sqrt(3),gamma=sqrt(5)')."""
    head, sep, tail = text.partition(":")
    kind = head.strip().lower()
    if kind not in _FAMILY_KEYS:
        raise ValueError(f"unknown family kind {kind!r} "
                         f"(expected one of {sorted(_FAMILY_KEYS)})")
    if kind == "pnl_xya":
        raise ValueError("pnl_xya is not available through the text syntax")
    params = {}
    if sep:
        for piece in tail.split(","):
            piece = piece.strip()
            if not piece:
                continue
            key, eq, expr = piece.partition("=")
            if not eq:
                raise ValueError(f"malformed parameter {piece!r} (expected key=value)")
            params[key.strip().lower()] = parse_param(expr)
    ordered = {}
    for key in _FAMILY_KEYS[kind]:
        if key not in params:
            raise ValueError(f"family {kind!r} is missing parameter {key!r}")
        ordered[key] = params.pop(key)
    if params:
        raise ValueError(f"unexpected parameters for {kind!r}: {sorted(params)}")
    return FamilySpec(kind=kind, params=ordered, n=n)


def is_hra_certified(spec: FamilySpec) -> bool:
    """Whether the closed-form BD construction and the structured solves are
    subtraction-free for this family: lattice with alpha, beta > 0 and
    gamma >= 0; r with x, y > 0; psi with x*y > 0; Pascal families that are
    totally positive (with positive column scales for the weighted variant)."""
    p = spec.params
    if spec.kind == "lattice":
        return p["alpha"] > 0 and p["beta"] > 0 and p["gamma"] >= 0
    if spec.kind == "r":
        return p["x"] > 0 and p["y"] > 0
    if spec.kind == "psi":
        return p["x"] * p["y"] > 0
    if spec.kind == "pnl":
        return pascal_is_tp(p["x"], p["lambda"], spec.n)
    if spec.kind == "pnl_xya":
        if not pascal_is_tp(p["x"], p["lambda"], spec.n):
            return False
        weights = spec.weights or (ParamExpr.rational(1),) * (spec.n + 1)
        return all(weights[j] * factorial_power(p["y"], j, p["lambda"]) > 0
                   for j in range(spec.n + 1))
    return False
