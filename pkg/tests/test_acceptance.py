"""Acceptance gate: ten numbered behavior criteria, one PASS/FAIL line each.

Each test records its verdict before asserting; the conftest terminal summary
prints one line per criterion at the end of every pytest run (plus a direct
echo that shows under ``pytest -s``).  The two experiment grids are
module-scoped fixtures because they dominate the runtime.
"""

import random
import sys
import time
from fractions import Fraction

import pytest

from conftest import record_criterion

from tnpascal import (
    FamilySpec,
    RATIONAL,
    bd_expand,
    bd_from_dense,
    classic_dense,
    lattice_bd,
    lattice_dense,
    parse_family,
    parse_param,
    pascal_bd,
    pascal_dense,
    pascal_is_tp,
    tn_inverse,
    tn_solve,
    oracle_eigenvalues,
    oracle_inverse,
    oracle_singular_values,
    oracle_solve,
)
from tnpascal.bench import ExperimentConfig, gen_rhs, run_experiment
from tnpascal.cli import main as cli_main
from tnpascal.domains import BINARY64
from tnpascal.instrument import CountingDomain, CountingScalar, OpCounter

from helpers import all_minors_nonnegative, identity, mat_mul, mat_vec, rand_frac, transpose

SEED = 20260817


def _report(num: int, ok: bool, detail: str) -> None:
    record_criterion(num, ok, detail)
    verdict = "PASS" if ok else "FAIL"
    print(f"criterion {num}: {verdict} - {detail}", file=sys.__stdout__, flush=True)


def _rows(matrix):
    return [list(row) for row in matrix]


def _flatten(values):
    if values and isinstance(values[0], tuple):
        return [v for row in values for v in row]
    return list(values)


# -- random family specifications -------------------------------------------------

_KINDS = ("lattice", "pnl", "pnl_xya", "pxy", "r", "phi", "psi")


def _random_spec(rng: random.Random, kind: str) -> FamilySpec:
    for _ in range(1000):
        n = rng.randint(1, 8)
        weights = None
        if kind == "lattice":
            params = {key: rand_frac(rng) for key in ("alpha", "beta", "gamma")}
        elif kind == "pnl":
            params = {"x": rand_frac(rng), "lambda": rand_frac(rng)}
        elif kind == "pnl_xya":
            params = {"x": rand_frac(rng), "y": rand_frac(rng),
                      "lambda": rand_frac(rng)}
            weights = tuple(rand_frac(rng, nonzero=True) for _ in range(n + 1))
        else:
            params = {"x": rand_frac(rng, nonzero=True),
                      "y": rand_frac(rng, nonzero=True)}
        spec = FamilySpec(kind=kind, params=params, n=n, weights=weights)
        if spec.is_nonsingular():
            return spec
    raise AssertionError(f"could not draw a nonsingular {kind} spec")


# -- criterion 1: closed-form BD expands to the definitional dense matrix -----------

def test_criterion_1_exact_expansion():
    rng = random.Random(SEED)
    start = time.perf_counter()
    failures = []
    for trial in range(200):
        spec = _random_spec(rng, _KINDS[trial % len(_KINDS)])
        if _rows(bd_expand(spec.bd(), RATIONAL)) != _rows(spec.dense(RATIONAL)):
            failures.append(spec.label())
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 30.0
    _report(1, ok, f"200 exact expand-vs-dense identities across "
                   f"{len(_KINDS)} families, n <= 8, in {elapsed:.1f}s"
                   + (f"; mismatches {failures[:3]}" if failures else ""))
    assert ok, failures[:3] or f"too slow: {elapsed:.1f}s"


# -- criterion 2: elimination of the dense matrix reproduces the closed form --------

def _case_i_params(rng: random.Random, n: int):
    while True:
        x, lam = rand_frac(rng), rand_frac(rng)
        if all(x != k * lam and x != -k * lam for k in range(n)):
            return x, lam


def test_criterion_2_elimination_round_trip():
    rng = random.Random(SEED + 2)
    failures = []
    for _ in range(50):
        n = rng.randint(1, 8)
        x, lam = _case_i_params(rng, n)
        closed = pascal_bd(x, lam, n)
        eliminated = bd_from_dense(pascal_dense(x, lam, n, RATIONAL), RATIONAL)
        if (_rows(closed.entries) != _rows(eliminated.entries)
                or closed.certificate != eliminated.certificate):
            failures.append((str(x), str(lam), n))
    ok = not failures
    _report(2, ok, "50 full-support Pascal decompositions rebuilt exactly "
                   "by elimination of the dense matrix"
                   + (f"; mismatches {failures[:3]}" if failures else ""))
    assert ok, failures[:3]


# -- criterion 3: lattice matrix factors through a pair of Pascal matrices ----------

def test_criterion_3_pascal_factorization():
    rng = random.Random(SEED + 3)
    failures = []
    for _ in range(50):
        n = rng.randint(1, 8)
        while True:
            a, b, g = (rand_frac(rng) for _ in range(3))
            if a * b + g != 0:
                break
        lat = _rows(lattice_dense(a, b, g, n, RATIONAL))
        p_beta = _rows(classic_dense("pxy", b, 1, n, RATIONAL))
        p_alpha = _rows(classic_dense("pxy", a, 1, n, RATIONAL))
        d = Fraction(a * b + g)
        diag = [[d ** i if i == j else Fraction(0) for j in range(n + 1)]
                for i in range(n + 1)]
        product = mat_mul(mat_mul(p_beta, diag), transpose(p_alpha))
        if lat != product:
            failures.append((str(a), str(b), str(g), n))
    ok = not failures
    _report(3, ok, "50 exact identities: lattice dense equals "
                   "P[beta] . diag((alpha*beta+gamma)^i) . P[alpha]^T"
                   + (f"; mismatches {failures[:3]}" if failures else ""))
    assert ok, failures[:3]


# -- criterion 4: total-positivity predicate vs exhaustive minors -------------------

def test_criterion_4_tp_predicate_vs_minors():
    rng = random.Random(SEED + 4)
    failures = []
    for trial in range(100):
        n = rng.randint(1, 5)
        lam = rand_frac(rng)
        if trial % 3 == 0:
            x = abs(lam) * rng.randint(0, n - 1)
        elif trial % 3 == 1:
            x = rand_frac(rng)
        else:
            x = abs(lam) * (n - 1) + Fraction(rng.randint(0, 30), 10)
        predicted = pascal_is_tp(x, lam, n)
        actual = all_minors_nonnegative(pascal_dense(x, lam, n, RATIONAL))
        if predicted != actual:
            failures.append((str(x), str(lam), n, predicted, actual))
    ok = not failures
    _report(4, ok, "100 cases, n <= 5: positivity predicate agrees with "
                   "exhaustive all-minors check"
                   + (f"; disagreements {failures[:3]}" if failures else ""))
    assert ok, failures[:3]


# -- criterion 5: structured sweeps never add operands of opposite sign -------------

def test_criterion_5_subtraction_free_sweeps():
    params = tuple(parse_param(t) for t in ("sqrt(2)", "sqrt(3)", "sqrt(5)"))
    worst_solve = worst_inverse = 0
    for n in range(1, 51):
        bd = lattice_bd(*params, n)
        counter = OpCounter()
        b = gen_rhs(n + 1, SEED + n, "alternating")
        tn_solve(bd, b, CountingDomain(BINARY64, counter))
        worst_solve = max(worst_solve, counter.mixed_sign_additions)
        counter = OpCounter()
        tn_inverse(bd, CountingDomain(BINARY64, counter))
        worst_inverse = max(worst_inverse, counter.mixed_sign_additions)
    ok = worst_solve == 0 and worst_inverse == 0
    _report(5, ok, "irrational lattice n = 1..50: 0 opposite-sign additions "
                   f"in alternating-b solves (worst {worst_solve}) and all "
                   f"inverse columns (worst {worst_inverse})")
    assert ok


# -- criteria 6 and 7: the two accuracy grids ----------------------------------------

@pytest.fixture(scope="module")
def report_41():
    cfg = ExperimentConfig(
        family="lattice:alpha=sqrt(2),beta=sqrt(3),gamma=sqrt(5)",
        sizes=tuple(range(5, 51, 5)), seed=SEED, digits=100)
    start = time.perf_counter()
    report = run_experiment(cfg)
    return report, time.perf_counter() - start


@pytest.fixture(scope="module")
def report_42():
    cfg = ExperimentConfig(
        family="pnl:x=3/2,lambda=1",
        sizes=tuple(range(5, 51, 5)),
        quantities=("min_sv", "inverse", "solve_alternating"),
        seed=SEED, digits=100)
    start = time.perf_counter()
    report = run_experiment(cfg)
    return report, time.perf_counter() - start


def test_criterion_6_irrational_lattice_grid(report_41):
    report, elapsed = report_41
    cell = {(r.n, r.quantity, r.method): r for r in report.rows}
    sizes = tuple(range(5, 51, 5))

    acc_spectral = max(cell[(n, q, "accurate")].rel_err_max
                       for n in sizes for q in ("min_eig", "min_sv"))
    conv_eig = min(cell[(n, "min_eig", "conventional")].rel_err_max
                   for n in sizes if n >= 20)
    acc_linear = max(cell[(n, q, "accurate")].rel_err_max
                     for n in sizes for q in ("inverse", "solve_alternating"))
    gains = []
    for q in ("min_eig", "min_sv", "inverse", "solve_alternating", "solve_mixed"):
        acc = cell[(50, q, "accurate")].rel_err_max
        conv = cell[(50, q, "conventional")].rel_err_max
        gains.append(conv / acc if acc > 0 else float("inf"))
    min_gain = min(gains)

    ok = (acc_spectral <= 1e-12 and conv_eig >= 1e-2 and acc_linear <= 1e-13
          and min_gain >= 1e4 and elapsed <= 600.0)
    _report(6, ok, f"irrational lattice grid n = 5..50 in {elapsed:.0f}s: "
                   f"accurate eig/sv <= {acc_spectral:.1e}, conventional eig "
                   f"(n >= 20) >= {conv_eig:.1e}, accurate inverse/solve <= "
                   f"{acc_linear:.1e}, n = 50 accuracy gain >= {min_gain:.1e}")
    assert ok


def test_criterion_7_pascal_three_halves_grid(report_42):
    report, elapsed = report_42
    cell = {(r.n, r.quantity, r.method): r for r in report.rows}
    sizes = tuple(range(5, 51, 5))

    acc_certified = max(cell[(n, q, "accurate")].rel_err_max
                        for n in sizes for q in ("min_sv", "inverse"))
    solve_acc = cell[(50, "solve_alternating", "accurate")].rel_err_max
    solve_conv = cell[(50, "solve_alternating", "conventional")].rel_err_max
    gain = solve_conv / solve_acc if solve_acc > 0 else float("inf")

    ok = acc_certified <= 1e-12 and gain >= 1e2
    _report(7, ok, f"non-TP Pascal grid n = 5..50 in {elapsed:.0f}s: certified "
                   f"min-sv/inverse <= {acc_certified:.1e}, structured solve "
                   f"beats conventional at n = 50 by {gain:.1e}x")
    assert ok


# -- criterion 8: operation-count bounds of the closed forms and the solver ----------

def test_criterion_8_operation_counts():
    checks = []
    for n in (1, 5, 10, 30):
        counter = OpCounter()
        lattice_bd(CountingScalar(2.0, counter), CountingScalar(3.0, counter),
                   CountingScalar(1.0, counter), n)
        checks.append(("lattice bd", n, counter.total, 2 * (n + 1)))
    for n in (2, 5, 12, 30):
        counter = OpCounter()
        pascal_bd(CountingScalar(2.5, counter), CountingScalar(1.0, counter), n)
        checks.append(("pascal bd", n, counter.total, 4 * n * n))
    for n in (5, 20, 50):
        bd = lattice_bd(1, 1, 1, n)
        order = n + 1
        counter = OpCounter()
        tn_solve(bd, [1] * order, CountingDomain(BINARY64, counter))
        checks.append(("solve", n, counter.total, 4 * order * order))
    violations = [c for c in checks if c[2] > c[3]]
    ok = not violations
    parts = {}
    for label, n, got, bound in checks:
        parts.setdefault(label, []).append(f"n={n}:{got}<={bound}")
    summary = "; ".join(f"{label} {' '.join(v)}" for label, v in parts.items())
    _report(8, ok, summary if ok else f"bounds exceeded: {violations}")
    assert ok, violations


# -- criterion 9: the oracle certifies itself -----------------------------------------

def test_criterion_9_oracle_self_certification():
    irrational = parse_family("lattice:alpha=sqrt(2),beta=sqrt(3),gamma=sqrt(5)", 4)
    pascal = parse_family("pnl:x=3/2,lambda=1", 6)
    b = gen_rhs(5, SEED + 9, "mixed")
    operations = [
        ("eigenvalues", 30, lambda **kw: oracle_eigenvalues(irrational, digits=30, **kw)),
        ("singular values", 30, lambda **kw: oracle_singular_values(irrational, digits=30, **kw)),
        ("inverse", 30, lambda **kw: oracle_inverse(irrational, digits=30, **kw)),
        ("solve", 30, lambda **kw: oracle_solve(irrational, b, digits=30, **kw)),
        ("pascal singular values", 25,
         lambda **kw: oracle_singular_values(pascal, digits=25, **kw)),
    ]
    drifts = []
    failures = []
    for label, digits, op in operations:
        first = op()
        again = op(start_bits=first.precision_used * 2)
        tol = Fraction(1, 10 ** digits)
        worst = Fraction(0)
        for a, r in zip(_flatten(first.values), _flatten(again.values)):
            if r == 0:
                if a != 0:
                    failures.append((label, "zero mismatch"))
                continue
            worst = max(worst, abs(a - r) / abs(r))
        if worst > tol:
            failures.append((label, float(worst)))
        drifts.append(float(worst))

    spec = parse_family("lattice:alpha=1,beta=2,gamma=3", 3)
    inv = oracle_inverse(spec)
    dense = _rows(spec.dense(RATIONAL))
    exact_inverse = (inv.exact and inv.precision_used == 0
                     and mat_mul(dense, _rows(inv.values)) == identity(4))
    rhs = [2, -3, 5, -7]
    sol = oracle_solve(spec, rhs)
    exact_solve = (sol.exact and sol.precision_used == 0
                   and mat_vec(dense, list(sol.values)) == [Fraction(v) for v in rhs])
    if not exact_inverse:
        failures.append(("rational inverse", "not exact"))
    if not exact_solve:
        failures.append(("rational solve", "not exact"))

    ok = not failures
    _report(9, ok, "5 certified results stable under precision doubling "
                   f"(worst drift {max(drifts):.1e}); rational inverse/solve exact"
                   if ok else f"failures {failures}")
    assert ok, failures


# -- criterion 10: experiment runs are byte-for-byte reproducible ---------------------

def test_criterion_10_deterministic_experiment(tmp_path):
    argv = ["experiment", "--family", "lattice:alpha=1,beta=2,gamma=3",
            "--sizes", "2,3,4",
            "--quantities", "min_sv,inverse,solve_alternating,solve_mixed",
            "--seed", "99", "--digits", "30"]
    first = tmp_path / "first.csv"
    second = tmp_path / "second.csv"
    code_a = cli_main(argv + ["--csv", str(first)])
    code_b = cli_main(argv + ["--csv", str(second)])
    bytes_a, bytes_b = first.read_bytes(), second.read_bytes()
    ok = code_a == 0 and code_b == 0 and bytes_a == bytes_b and len(bytes_a) > 0
    _report(10, ok, f"two CLI experiment runs, seed 99: byte-identical CSV "
                    f"({len(bytes_a)} bytes, 36 rows)")
    assert ok
