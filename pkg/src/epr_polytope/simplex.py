"""Exact-rational phase-1 simplex for the feasibility problem A x = b, x >= 0.

Pivoting follows Bland's rule (lowest-index entering column, lowest-index
leaving variable among ratio ties), which rules out cycling.  When the system
is infeasible the final reduced costs yield a Farkas vector y with
y.A_j <= 0 for every column and y.b > 0.

Arithmetic runs on gmpy2 rationals when available and on Fractions
otherwise; results are always returned as Fractions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

try:
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    _Q = Fraction

ZERO = Fraction(0)
_ZERO = _Q(0)
_ONE = _Q(1)


def _q(x) -> "_Q":
    if isinstance(x, Fraction):
        return _Q(x.numerator, x.denominator)
    return _Q(x)


def _frac(x) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator))


class PivotLimitError(RuntimeError):
    pass


@dataclass
class FeasibilityResult:
    feasible: bool
    x: list[Fraction] = field(default_factory=list)
    basis: list[int] = field(default_factory=list)
    # Farkas vector; populated only when infeasible
    farkas: list[Fraction] = field(default_factory=list)
    residual: Fraction = ZERO
    pivots: int = 0


def find_feasible(
    A: Sequence[Sequence[Fraction]],
    b: Sequence[Fraction],
    max_pivots: int | None = None,
) -> FeasibilityResult:
    """Decide whether A x = b has a solution x >= 0, in exact arithmetic.

    ``A`` is a list of m rows of length N.  The returned ``x`` is a basic
    feasible solution, so at most m of its entries are nonzero.
    """
    m = len(A)
    if m != len(b):
        raise ValueError("A and b have different numbers of rows")
    N = len(A[0]) if m else 0
    if any(len(row) != N for row in A):
        raise ValueError("ragged constraint matrix")

    width = N + m
    rhs_col = width
    signs = []
    rows: list[list] = []
    for i in range(m):
        s = -1 if b[i] < 0 else 1
        signs.append(s)
        row = [_q(s * v) if v else _ZERO for v in A[i]]
        row.extend(_ZERO for _ in range(m))
        row[N + i] = _ONE
        row.append(_q(s * b[i]))
        rows.append(row)

    # reduced costs of phase 1 (artificials cost 1); last entry is -objective
    cost = [_ZERO] * (width + 1)
    for row in rows:
        for j in range(N):
            if row[j]:
                cost[j] -= row[j]
        cost[rhs_col] -= row[rhs_col]
    basis = [N + i for i in range(m)]

    pivots = 0
    while True:
        entering = next((j for j in range(width) if cost[j] < 0), None)
        if entering is None:
            break
        leave_row, best = None, None
        for i in range(m):
            a = rows[i][entering]
            if a > 0:
                ratio = rows[i][rhs_col] / a
                if (
                    best is None
                    or ratio < best
                    or (ratio == best and basis[i] < basis[leave_row])
                ):
                    leave_row, best = i, ratio
        if leave_row is None:
            # cannot happen: the phase-1 objective is bounded below by 0
            raise AssertionError("unbounded phase-1 problem")
        _pivot(rows, cost, leave_row, entering)
        basis[leave_row] = entering
        pivots += 1
        if max_pivots is not None and pivots > max_pivots:
            raise PivotLimitError(f"exceeded {max_pivots} pivots")

    residual = _frac(-cost[rhs_col])
    if residual > 0:
        y = [signs[k] * (1 - _frac(cost[N + k])) for k in range(m)]
        return FeasibilityResult(False, basis=basis, farkas=y, residual=residual, pivots=pivots)

    x = [ZERO] * N
    for i, var in enumerate(basis):
        if var < N:
            x[var] = _frac(rows[i][rhs_col])
    return FeasibilityResult(True, x=x, basis=basis, pivots=pivots)


def _pivot(rows, cost, r, c):
    prow = rows[r]
    piv = prow[c]
    if piv != 1:
        inv = 1 / piv
        prow[:] = [v * inv if v else _ZERO for v in prow]
    nz = [k for k, v in enumerate(prow) if v]
    for i, row in enumerate(rows):
        if i == r:
            continue
        f = row[c]
        if f:
            for k in nz:
                row[k] -= f * prow[k]
    f = cost[c]
    if f:
        for k in nz:
            cost[k] -= f * prow[k]
