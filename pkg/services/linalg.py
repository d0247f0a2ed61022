"""Exact linear systems over the rationals, solved with sympy."""

from fractions import Fraction
from typing import Dict, Hashable, List, Optional, Sequence

import sympy as sp

# A sparse vector: coordinate key -> coefficient
SparseVector = Dict[Hashable, Fraction]


def to_fraction(value) -> Fraction:
    value = sp.Rational(value)
    return Fraction(int(value.p), int(value.q))


def _dense(columns: Sequence[SparseVector], extra: Optional[SparseVector] = None):
    keys = sorted({k for col in columns for k in col} | set(extra or ()), key=repr)
    index = {k: r for r, k in enumerate(keys)}
    A = sp.zeros(len(keys), len(columns))
    for c, col in enumerate(columns):
        for k, v in col.items():
            A[index[k], c] = sp.Rational(v.numerator, v.denominator)
    return A, index


def solve_combination(columns: Sequence[SparseVector], target: SparseVector) -> Optional[List[Fraction]]:
    """Coefficients c with sum_i c_i columns[i] = target, or None when target is outside the span."""
    if not columns:
        return None if target else []
    A, index = _dense(columns, target)
    b = sp.zeros(A.rows, 1)
    for k, v in target.items():
        b[index[k], 0] = sp.Rational(v.numerator, v.denominator)
    try:
        solution, params = A.gauss_jordan_solve(b)
    except ValueError:
        return None
    solution = solution.xreplace({p: 0 for p in params})
    return [to_fraction(x) for x in solution]


def nullspace(columns: Sequence[SparseVector]) -> List[List[Fraction]]:
    """Basis of {c : sum_i c_i columns[i] = 0}."""
    if not columns:
        return []
    A, _ = _dense(columns)
    if A.rows == 0:
        return [[Fraction(int(r == c)) for r in range(len(columns))] for c in range(len(columns))]
    return [[to_fraction(x) for x in vec] for vec in A.nullspace()]
