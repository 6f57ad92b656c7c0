"""Reference-value engine: certified high-precision kernels and exact paths."""

import math
import random
from fractions import Fraction

import mpmath
import pytest

from tnpascal import (
    ErrorStats,
    FamilySpec,
    NoConvergence,
    OracleResult,
    RATIONAL,
    ShapeMismatch,
    oracle_eigenvalues,
    oracle_inverse,
    oracle_singular_values,
    oracle_solve,
    parse_family,
    relative_errors,
    tn_inverse,
    tn_solve,
)
from tnpascal.certify import RungFailed, run_ladder
from tnpascal.domains import mpf_to_fraction

from helpers import identity, mat_mul, mat_vec, rand_frac


# -- certification ladder ----------------------------------------------------

def test_ladder_accepts_second_rung():
    def compute(bits):
        return [Fraction(1, 3) + Fraction(1, 2 ** bits)]

    outcome = run_ladder(compute, Fraction(1, 10 ** 10), start_bits=64,
                         ceiling_bits=4096)
    assert outcome.precision_bits == 128
    assert outcome.values == [Fraction(1, 3) + Fraction(1, 2 ** 128)]
    assert outcome.disagreement <= Fraction(1, 10 ** 10)


def test_ladder_discards_failed_rungs():
    calls = []

    def compute(bits):
        calls.append(bits)
        if bits < 512:
            raise RungFailed("too coarse")
        return [Fraction(7)]

    outcome = run_ladder(compute, Fraction(1, 10 ** 10), start_bits=64,
                         ceiling_bits=4096)
    # 64..256 fail, 512 seeds the comparison, 1024 agrees
    assert calls == [64, 128, 256, 512, 1024]
    assert outcome.precision_bits == 1024


def test_ladder_no_convergence():
    def compute(bits):
        return [Fraction(bits)]

    with pytest.raises(NoConvergence) as info:
        run_ladder(compute, Fraction(1, 100), start_bits=64, ceiling_bits=512)
    assert info.value.precision_bits == 512
    assert info.value.history


def test_ladder_size_change_guard():
    def compute(bits):
        return [Fraction(1)] * (1 if bits.bit_length() % 2 else 2)

    with pytest.raises(NoConvergence) as info:
        run_ladder(compute, Fraction(1, 100), start_bits=64, ceiling_bits=256)
    assert any("size changed" in note for _, note in info.value.history)


def test_ladder_rejects_bad_tolerance():
    with pytest.raises(ValueError):
        run_ladder(lambda bits: [Fraction(1)], 0)


# -- exact rational paths ----------------------------------------------------

def test_inverse_exact_on_rational_family():
    spec = parse_family("lattice:alpha=1,beta=2,gamma=3", 3)
    result = oracle_inverse(spec)
    assert result.exact and result.precision_used == 0
    assert result.is_matrix
    A = spec.dense(RATIONAL)
    assert mat_mul(A, [list(r) for r in result.values]) == identity(4)
    # the decomposition-based exact inverse is a fully independent route
    via_bd = tn_inverse(spec.bd(), RATIONAL)
    assert [list(r) for r in via_bd.rows] == [list(r) for r in result.values]


def test_solve_exact_on_rational_family():
    rng = random.Random(81)
    spec = parse_family("pnl:x=7/3,lambda=2/5", 4)
    b = [rand_frac(rng) for _ in range(5)]
    result = oracle_solve(spec, b)
    assert result.exact and result.precision_used == 0
    A = spec.dense(RATIONAL)
    assert mat_vec(A, list(result.values)) == [Fraction(v) for v in b]
    assert list(tn_solve(spec.bd(), b, RATIONAL)) == list(result.values)


def test_solve_accepts_float_rhs_exactly():
    spec = parse_family("lattice:alpha=1,beta=1,gamma=0", 2)
    result = oracle_solve(spec, [0.5, -0.25, 1.0])
    A = spec.dense(RATIONAL)
    assert mat_vec(A, list(result.values)) == [Fraction(1, 2), Fraction(-1, 4), 1]


def test_solve_shape_check():
    spec = parse_family("lattice:alpha=1,beta=1,gamma=0", 2)
    with pytest.raises(ShapeMismatch):
        oracle_solve(spec, [1, 2])


# -- certified kernels vs closed forms ----------------------------------------

def _fraction_sqrt(value: Fraction, bits: int = 300) -> Fraction:
    ctx = mpmath.mp.clone()
    ctx.prec = bits
    return mpf_to_fraction(ctx.sqrt(ctx.mpf(value.numerator) / value.denominator))


def test_eigenvalues_quadratic_anchor():
    # dense lattice matrix for (2,3,1), n=1 is [[1,2],[3,13]]: trace 14, det 7
    spec = parse_family("lattice:alpha=2,beta=3,gamma=1", 1)
    result = oracle_eigenvalues(spec, digits=30)
    root = _fraction_sqrt(Fraction(42))
    for got, want in zip(result.values, (7 + root, 7 - root)):
        assert abs(got - want) <= abs(want) * Fraction(1, 10 ** 25)
    assert result.certified_digits == 30
    assert not result.exact
    assert result.precision_used >= 2 * 164


def test_singular_values_quadratic_anchor():
    spec = parse_family("lattice:alpha=2,beta=3,gamma=1", 1)
    result = oracle_singular_values(spec, digits=30)
    disc = _fraction_sqrt(Fraction(33293))
    for got, want2 in zip(result.values, ((183 + disc) / 2, (183 - disc) / 2)):
        assert abs(got * got - want2) <= abs(want2) * Fraction(1, 10 ** 24)
    # product of the singular values is |det| = 7
    assert abs(result.values[0] * result.values[1] - 7) <= Fraction(1, 10 ** 24)


@pytest.mark.parametrize("family,n", [
    ("lattice:alpha=1,beta=1,gamma=1", 3),
    ("lattice:alpha=2,beta=1/2,gamma=3", 2),
    ("r:x=1,y=2", 2),
    ("pxy:x=2,y=3", 2),
])
def test_eigenvalues_cross_validated(family, n):
    spec = parse_family(family, n)
    result = oracle_eigenvalues(spec, digits=25)
    ctx = mpmath.mp.clone()
    ctx.prec = 250
    dense = ctx.matrix([[ctx.mpf(v.numerator) / v.denominator
                         for v in row] for row in spec.dense(RATIONAL)])
    reference = sorted((mpf_to_fraction(ev.real)
                        for ev in ctx.eig(dense, left=False, right=False)),
                       reverse=True)
    for got, want in zip(result.values, reference):
        assert abs(got - want) <= max(Fraction(1), abs(want)) * Fraction(1, 10 ** 20)


@pytest.mark.parametrize("family,n", [
    ("lattice:alpha=1,beta=1,gamma=1", 3),
    ("r:x=1,y=2", 2),
    ("pnl:x=3/2,lambda=1", 3),
])
def test_singular_values_cross_validated(family, n):
    spec = parse_family(family, n)
    result = oracle_singular_values(spec, digits=25)
    ctx = mpmath.mp.clone()
    ctx.prec = 250
    dense = ctx.matrix([[ctx.mpf(v.numerator) / v.denominator
                         for v in row] for row in spec.dense(RATIONAL)])
    sv = ctx.svd_r(dense, compute_uv=False)
    reference = sorted((mpf_to_fraction(sv[k]) for k in range(spec.order)),
                       reverse=True)
    for got, want in zip(result.values, reference):
        assert abs(got - want) <= max(Fraction(1), abs(want)) * Fraction(1, 10 ** 20)


def test_irrational_solve_has_tiny_residual():
    spec = parse_family("lattice:alpha=sqrt(2),beta=sqrt(3),gamma=sqrt(5)", 3)
    b = [3, -1, 4, -1]
    result = oracle_solve(spec, b, digits=30)
    assert not result.exact and result.precision_used >= 164
    ctx = mpmath.mp.clone()
    ctx.prec = 400
    from tnpascal.domains import BigFloatDomain
    dense = spec.dense(BigFloatDomain(400))
    x = [ctx.mpf(v.numerator) / v.denominator for v in result.values]
    scale = max(abs(v) for v in x)
    for row, rhs in zip(dense, b):
        residual = ctx.fsum(a * xi for a, xi in zip(row, x)) - rhs
        assert abs(residual) <= scale * ctx.mpf(10) ** -27


def test_irrational_inverse_has_tiny_residual():
    spec = parse_family("lattice:alpha=sqrt(2),beta=sqrt(3),gamma=1/2", 2)
    result = oracle_inverse(spec, digits=30)
    ctx = mpmath.mp.clone()
    ctx.prec = 400
    from tnpascal.domains import BigFloatDomain
    dense = spec.dense(BigFloatDomain(400))
    inv = [[ctx.mpf(v.numerator) / v.denominator for v in row]
           for row in result.values]
    product = [[ctx.fsum(dense[i][k] * inv[k][j] for k in range(3))
                for j in range(3)] for i in range(3)]
    for i in range(3):
        for j in range(3):
            assert abs(product[i][j] - int(i == j)) <= ctx.mpf(10) ** -26


def test_oracle_rejects_bad_inputs():
    with pytest.raises(TypeError):
        oracle_eigenvalues("lattice:alpha=1,beta=1,gamma=1")
    spec = parse_family("lattice:alpha=1,beta=1,gamma=1", 2)
    with pytest.raises(ValueError):
        oracle_eigenvalues(spec, digits=0)
    singular = parse_family("lattice:alpha=1,beta=1,gamma=-1", 2)
    with pytest.raises(ValueError):
        oracle_inverse(singular)


def test_stability_under_start_bits_override():
    spec = parse_family("lattice:alpha=1,beta=1,gamma=1", 2)
    first = oracle_eigenvalues(spec, digits=15)
    again = oracle_eigenvalues(spec, digits=15,
                               start_bits=first.precision_used * 2)
    for a, b in zip(first.values, again.values):
        assert abs(a - b) <= abs(b) * Fraction(1, 10 ** 15)


# -- result containers and scoring ---------------------------------------------

def test_oracle_result_as_floats_saturates():
    huge = OracleResult((Fraction(10) ** 400, -Fraction(10) ** 400), 0, 10)
    assert huge.as_floats() == [math.inf, -math.inf]
    flat = OracleResult((Fraction(1, 2),), 0, 10)
    assert flat.as_floats() == [0.5]
    assert not flat.is_matrix


def test_relative_errors_exact_zero():
    ref = OracleResult((Fraction(2), Fraction(-3)), 0, 20)
    stats = relative_errors([2.0, -3.0], ref)
    assert stats == ErrorStats((0.0, 0.0), 0.0, 0.0)


def test_relative_errors_values():
    stats = relative_errors([1.5, 2.0], [Fraction(1), Fraction(2)])
    assert stats.componentwise == (0.5, 0.0)
    assert stats.mean == 0.25
    assert stats.max == 0.5


def test_relative_errors_zero_reference_conventions():
    assert relative_errors([0.0], [Fraction(0)]).max == 0.0
    stats = relative_errors([1e-300], [Fraction(0)])
    assert stats.max == math.inf and stats.mean == math.inf


def test_relative_errors_non_finite_approximation():
    stats = relative_errors([math.inf, 1.0], [Fraction(1), Fraction(1)])
    assert stats.componentwise[0] == math.inf
    assert stats.max == math.inf


def test_relative_errors_shapes():
    ref = OracleResult(((Fraction(1), Fraction(2)), (Fraction(3), Fraction(4))),
                       0, 20)
    stats = relative_errors([[1.0, 2.0], [3.0, 4.0]], ref)
    assert stats.max == 0.0
    with pytest.raises(ShapeMismatch):
        relative_errors([1.0, 2.0], ref)
    with pytest.raises(ShapeMismatch):
        relative_errors([1.0], [Fraction(1), Fraction(2)])


def test_relative_errors_unwraps_solver_results():
    spec = parse_family("lattice:alpha=1,beta=2,gamma=3", 2)
    b = [1, -1, 1]
    reference = oracle_solve(spec, b)
    computed = tn_solve(spec.bd(), b, RATIONAL)
    stats = relative_errors(computed, reference)
    assert stats.max == 0.0
