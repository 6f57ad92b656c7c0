"""Exact linear-algebra utilities shared by the test modules.

Everything here works over Fractions so comparisons against library output
carry zero tolerance.  The determinant and minor scans are independent of the
library code paths on purpose: they are the brute-force side of the
structure-vs-definition checks.
"""

from fractions import Fraction
from itertools import combinations


def rand_frac(rng, low=-10, high=10, nonzero=False) -> Fraction:
    """Random Fraction with numerator in [low, high] and denominator <= high."""
    while True:
        f = Fraction(rng.randint(low, high), rng.randint(1, high))
        if not (nonzero and f == 0):
            return f


def to_fractions(rows):
    return [[Fraction(v) for v in row] for row in rows]


def mat_mul(A, B):
    m = len(B)
    return [[sum(row[k] * B[k][j] for k in range(m)) for j in range(len(B[0]))]
            for row in A]


def mat_vec(A, v):
    return [sum(a * x for a, x in zip(row, v)) for row in A]


def transpose(A):
    return [list(col) for col in zip(*A)]


def identity(n):
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def det_fraction(A) -> Fraction:
    """Exact determinant by partial-pivoted elimination over Fractions."""
    n = len(A)
    w = [[Fraction(v) for v in row] for row in A]
    det = Fraction(1)
    for k in range(n):
        pivot = next((i for i in range(k, n) if w[i][k] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != k:
            w[k], w[pivot] = w[pivot], w[k]
            det = -det
        det *= w[k][k]
        for i in range(k + 1, n):
            m = w[i][k] / w[k][k]
            if m:
                for j in range(k, n):
                    w[i][j] -= m * w[k][j]
    return det


def all_minors_nonnegative(A) -> bool:
    """Exhaustive check that every square minor of every size is >= 0."""
    n = len(A)
    idx = range(n)
    for size in range(1, n + 1):
        for rows in combinations(idx, size):
            for cols in combinations(idx, size):
                sub = [[A[i][j] for j in cols] for i in rows]
                if det_fraction(sub) < 0:
                    return False
    return True
