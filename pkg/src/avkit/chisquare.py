"""Pearson chi-square independence test.

The p-value comes from the regularized incomplete gamma function, evaluated
with the classic series / continued-fraction pair (series for x < a+1,
Lentz-style continued fraction otherwise).  Absolute error is well below the
1e-8 this module promises.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

_EPS = 1e-15
_TINY = 1e-300
_MAX_ITER = 500


def _gamma_p_series(a: float, x: float) -> float:
    # P(a, x) by series expansion; converges fast for x < a + 1.
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))

def _gamma_q_contfrac(a: float, x: float) -> float:
    # Q(a, x) by the Lentz continued fraction; converges fast for x >= a + 1.
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def regularized_gamma_p(a: float, x: float) -> float:
    """Lower regularized incomplete gamma P(a, x)."""
    if a <= 0.0:
        raise ValueError(f"shape parameter must be positive, got {a}")
    if x < 0.0:
        raise ValueError(f"argument must be nonnegative, got {x}")
    if x == 0.0:
        return 0.0
    if x < a + 1.0:
        return _gamma_p_series(a, x)
    return 1.0 - _gamma_q_contfrac(a, x)


def regularized_gamma_q(a: float, x: float) -> float:
    """Upper regularized incomplete gamma Q(a, x) = 1 - P(a, x)."""
    if a <= 0.0:
        raise ValueError(f"shape parameter must be positive, got {a}")
    if x < 0.0:
        raise ValueError(f"argument must be nonnegative, got {x}")
    if x == 0.0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _gamma_p_series(a, x)
    return _gamma_q_contfrac(a, x)


def chi_square_sf(statistic: float, df: int) -> float:
    """Upper tail of the chi-square law: P(X >= statistic) with df degrees of freedom."""
    if df < 1:
        raise ValueError(f"degrees of freedom must be positive, got {df}")
    return min(1.0, max(0.0, regularized_gamma_q(df / 2.0, statistic / 2.0)))


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    df: int
    p_value: float


def validate_contingency_table(table: Sequence[Sequence[int]]) -> None:
    if len(table) < 2:
        raise ValueError("contingency table needs at least 2 rows")
    width = len(table[0])
    if width < 2:
        raise ValueError("contingency table needs at least 2 columns")
    for row in table:
        if len(row) != width:
            raise ValueError("contingency table rows must have equal length")
        for cell in row:
            if not isinstance(cell, int) or isinstance(cell, bool) or cell < 0:
                raise ValueError(f"counts must be nonnegative integers, got {cell!r}")
    if any(sum(row) == 0 for row in table):
        raise ValueError("contingency table has an all-zero row")
    if any(sum(row[j] for row in table) == 0 for j in range(width)):
        raise ValueError("contingency table has an all-zero column")


def chi_square_test(table: Sequence[Sequence[int]]) -> ChiSquareResult:
    """Pearson independence test on an R x C table of counts.

    Expected counts come from the row/column margins; no continuity
    correction is applied.
    """
    validate_contingency_table(table)
    rows = len(table)
    cols = len(table[0])
    row_sums = [sum(row) for row in table]
    col_sums = [sum(row[j] for row in table) for j in range(cols)]
    total = sum(row_sums)

    statistic = 0.0
    for i in range(rows):
        for j in range(cols):
            expected = row_sums[i] * col_sums[j] / total
            diff = table[i][j] - expected
            statistic += diff * diff / expected

    df = (rows - 1) * (cols - 1)
    return ChiSquareResult(statistic, df, chi_square_sf(statistic, df))
