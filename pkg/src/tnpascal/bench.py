"""Experiment runner: scores the conventional fixed-precision route and the
decomposition-based accurate route against the arbitrary-precision oracle,
then emits CSV error reports and an optional log-scale plot.

The protocol: for each matrix size, build the family's closed-form
decomposition for the accurate route and its definitional binary64 dense
matrix for the conventional route, compute the requested quantities with both,
and score every result componentwise against the oracle.  Right-hand sides
are integer vectors from a fixed, documented PRNG so reruns are byte-identical.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy

from .families import FamilySpec, is_hra_certified, parse_family
from .oracle import (
    OracleResult,
    oracle_eigenvalues,
    oracle_inverse,
    oracle_singular_values,
    oracle_solve,
    relative_errors,
)
from .tnalg import (
    STRUCTURED,
    CertifiedPrecision,
    tn_eigenvalues,
    tn_inverse,
    tn_singular_values,
    tn_solve,
)

__all__ = [
    "QUANTITIES",
    "METHODS",
    "ExperimentConfig",
    "ReportRow",
    "ErrorReport",
    "gen_rhs",
    "run_experiment",
    "emit_csv",
    "emit_plot",
    "parse_report_csv",
]

QUANTITIES = ("min_eig", "min_sv", "inverse", "solve_alternating", "solve_mixed")
METHODS = ("conventional", "accurate", "oracle")
DEFAULT_SIZES = tuple(range(5, 51, 5))
CERTIFIED_TOL = Fraction(1, 10 ** 13)

_MASK64 = (1 << 64) - 1


class _SplitMix64:
    """SplitMix64: a 64-bit linear state advance followed by a bit-mixing
    output permutation.  Chosen because the algorithm is tiny, public, and
    produces identical sequences on every platform."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        # rejection sampling keeps the distribution exactly uniform
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            z = self.next64()
            if z < limit:
                return z % bound


def gen_rhs(n: int, seed: int, mode: str) -> list[int]:
    """Deterministic integer right-hand side of length n.

    alternating: magnitudes uniform in [1, 1000], signs strictly alternating
    starting positive.  mixed: uniform integers in [-1000, 1000].
    """
    rng = _SplitMix64(seed)
    if mode == "alternating":
        return [(1 if i % 2 == 0 else -1) * (1 + rng.below(1000))
                for i in range(n)]
    if mode == "mixed":
        return [rng.below(2001) - 1000 for i in range(n)]
    raise ValueError(f"unknown right-hand side mode {mode!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    """What to run: a family template (text form, n-independent), sizes,
    quantities, methods, the PRNG seed, and oracle digits."""

    family: str
    sizes: tuple = DEFAULT_SIZES
    quantities: tuple = QUANTITIES
    methods: tuple = METHODS
    seed: int = 1
    digits: int = 100

    def __post_init__(self):
        if not self.sizes or any(n < 1 for n in self.sizes):
            raise ValueError("sizes must be positive")
        unknown = set(self.quantities) - set(QUANTITIES)
        if unknown:
            raise ValueError(f"unknown quantities {sorted(unknown)}")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods {sorted(unknown)}")
        if self.digits < 1:
            raise ValueError("digits must be at least 1")
        object.__setattr__(self, "sizes", tuple(self.sizes))
        object.__setattr__(self, "quantities", tuple(self.quantities))
        object.__setattr__(self, "methods", tuple(self.methods))


@dataclass(frozen=True)
class ReportRow:
    """One scored cell.  value/reference anchor the magnitudes: the computed
    and oracle scalar for min_eig/min_sv, the entry at the position of the
    oracle's largest magnitude for inverse/solve; None for failed cells."""

    family: str
    params: str
    n: int
    quantity: str
    method: str
    value: float | None
    reference: float | None
    rel_err_mean: float
    rel_err_max: float
    seed: int


@dataclass
class ErrorReport:
    rows: list = field(default_factory=list)


def _sub_seed(seed: int, n: int, mode: str) -> int:
    tag = 1 if mode == "alternating" else 2
    return (seed + n * 0x100000001 + tag) & _MASK64


def _flatten(values):
    if values and isinstance(values[0], (tuple, list)):
        return [v for row in values for v in row]
    return list(values)


def _anchor(approx_values, reference: OracleResult) -> tuple[float | None, float]:
    """Pick the position where the oracle has its largest magnitude."""
    flat_ref = _flatten(reference.values)
    idx = max(range(len(flat_ref)), key=lambda k: abs(flat_ref[k]))
    flat_approx = _flatten(approx_values)
    return float(flat_approx[idx]), float(flat_ref[idx])


def _conventional_dense(spec: FamilySpec):
    from .domains import BINARY64

    return numpy.array(spec.dense(BINARY64), dtype=float)


def _accurate_inverse_mode(spec: FamilySpec):
    if is_hra_certified(spec):
        return STRUCTURED
    return CertifiedPrecision(CERTIFIED_TOL)


def _compute_cell(spec: FamilySpec, bd, quantity: str, method: str,
                  oracle_ref: OracleResult, b: list[int] | None):
    """Return (approx_values, value, reference) for one report cell."""
    if method == "oracle":
        if quantity in ("min_eig", "min_sv"):
            v = float(oracle_ref.values[-1])
            return [oracle_ref.values[-1]], v, v
        value, reference = _anchor(oracle_ref.values, oracle_ref)
        return oracle_ref, value, reference

    if quantity == "min_eig":
        ref_min = float(oracle_ref.values[-1])
        if method == "accurate":
            approx = tn_eigenvalues(bd, CertifiedPrecision(CERTIFIED_TOL))[-1]
        else:
            evs = numpy.linalg.eigvals(_conventional_dense(spec))
            approx = float(min(ev.real for ev in evs))
        return [approx], float(approx), ref_min

    if quantity == "min_sv":
        ref_min = float(oracle_ref.values[-1])
        if method == "accurate":
            approx = tn_singular_values(bd, CertifiedPrecision(CERTIFIED_TOL))[-1]
        else:
            approx = float(numpy.linalg.svd(_conventional_dense(spec),
                                            compute_uv=False)[-1])
        return [approx], float(approx), ref_min

    if quantity == "inverse":
        if method == "accurate":
            approx = tn_inverse(bd, _accurate_inverse_mode(spec)).rows
        else:
            approx = numpy.linalg.inv(_conventional_dense(spec)).tolist()
        value, reference = _anchor(approx, oracle_ref)
        return approx, value, reference

    # solve_alternating / solve_mixed
    if method == "accurate":
        approx = list(tn_solve(bd, b, STRUCTURED))
    else:
        approx = numpy.linalg.solve(_conventional_dense(spec),
                                    numpy.array(b, dtype=float)).tolist()
    value, reference = _anchor(approx, oracle_ref)
    return approx, value, reference


def run_experiment(cfg: ExperimentConfig) -> ErrorReport:
    """Score every (n, quantity, method) cell against the oracle.

    A failing cell (overflow, no convergence) is recorded with +inf errors and
    the run continues; rows come back sorted by (n, quantity, method).
    """
    report = ErrorReport()
    for n in cfg.sizes:
        spec = parse_family(cfg.family, n)
        family_kind, _, params_text = spec.label().partition(":")
        bd = spec.bd()
        order = spec.order
        rhs = {
            "solve_alternating": gen_rhs(order, _sub_seed(cfg.seed, n, "alternating"),
                                         "alternating"),
            "solve_mixed": gen_rhs(order, _sub_seed(cfg.seed, n, "mixed"), "mixed"),
        }
        for quantity in cfg.quantities:
            b = rhs.get(quantity)
            try:
                oracle_ref = _oracle_for(spec, quantity, b, cfg.digits)
            except Exception:
                for method in cfg.methods:
                    report.rows.append(ReportRow(
                        family_kind, params_text, n, quantity, method,
                        None, None, math.inf, math.inf, cfg.seed))
                continue
            for method in cfg.methods:
                try:
                    approx, value, reference = _compute_cell(
                        spec, bd, quantity, method, oracle_ref, b)
                    if quantity in ("min_eig", "min_sv"):
                        stats = relative_errors(approx, [oracle_ref.values[-1]])
                    else:
                        stats = relative_errors(approx, oracle_ref)
                    row = ReportRow(family_kind, params_text, n, quantity, method,
                                    value, reference, stats.mean, stats.max,
                                    cfg.seed)
                except Exception:
                    row = ReportRow(family_kind, params_text, n, quantity, method,
                                    None, None, math.inf, math.inf, cfg.seed)
                report.rows.append(row)
    report.rows.sort(key=lambda r: (r.n, r.quantity, r.method))
    return report


def _oracle_for(spec: FamilySpec, quantity: str, b, digits: int) -> OracleResult:
    if quantity == "min_eig":
        return oracle_eigenvalues(spec, digits)
    if quantity == "min_sv":
        return oracle_singular_values(spec, digits)
    if quantity == "inverse":
        return oracle_inverse(spec, digits)
    return oracle_solve(spec, b, digits)


# -- serialization ---------------------------------------------------------------

_COLUMNS = ("family", "params", "n", "quantity", "method", "value",
            "reference", "rel_err_mean", "rel_err_max", "seed")


def _fmt(v: float | None) -> str:
    if v is None:
        return ""
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.17g}"


def emit_csv(report: ErrorReport, path: str) -> None:
    """RFC-4180 CSV, 17 significant digits, rows already sorted; identical
    configs produce byte-identical files."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_COLUMNS)
        for r in report.rows:
            writer.writerow([
                r.family, r.params, r.n, r.quantity, r.method,
                _fmt(r.value), _fmt(r.reference),
                _fmt(r.rel_err_mean), _fmt(r.rel_err_max), r.seed,
            ])


def _parse_float(text: str) -> float | None:
    if text == "":
        return None
    return float(text)


def parse_report_csv(path: str) -> ErrorReport:
    report = ErrorReport()
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != _COLUMNS:
            raise ValueError(f"unexpected CSV header {header}")
        for rec in reader:
            report.rows.append(ReportRow(
                rec[0], rec[1], int(rec[2]), rec[3], rec[4],
                _parse_float(rec[5]), _parse_float(rec[6]),
                float(rec[7]), float(rec[8]), int(rec[9])))
    return report


def emit_plot(report: ErrorReport, path: str) -> None:
    """One SVG chart: max componentwise relative error (log10 y-axis) against
    n, one line per (quantity, method).  Nonpositive and non-finite values
    cannot be drawn on a log axis and are dropped from their line."""
    if not report.rows:
        raise ValueError("cannot plot an empty report")
    import matplotlib

    matplotlib.use("Agg")
    from matplotlib import pyplot

    series: dict[tuple[str, str], list] = {}
    for r in report.rows:
        series.setdefault((r.quantity, r.method), []).append(r)
    fig, ax = pyplot.subplots(figsize=(7.0, 4.5))
    for (quantity, method), rows in sorted(series.items()):
        pts = [(r.n, r.rel_err_max) for r in rows
               if math.isfinite(r.rel_err_max) and r.rel_err_max > 0]
        if not pts:
            continue
        pts.sort()
        ax.semilogy([p[0] for p in pts], [p[1] for p in pts],
                    marker="o", label=f"{quantity}/{method}")
    ax.set_xlabel("size parameter n")
    ax.set_ylabel("max componentwise relative error")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    pyplot.close(fig)
