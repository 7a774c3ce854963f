"""Exact feasibility of {x >= 0 : A x = b} over the rationals.

A phase-one simplex on an integer (fraction-free) tableau: every entry is an
integer and the true value is entry / det, where det is the last pivot
element.  Pivot updates are the Bareiss/Edmonds integer-preserving rule, so
no fractions are formed until a solution or certificate is read off.

Entering variable: most negative reduced cost; after a run of degenerate
pivots the rule switches to Bland's (smallest index), which cannot cycle.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


@dataclass
class LPResult:
    feasible: bool
    x: dict | None = None  # column index -> Fraction (nonzero entries only)
    farkas: list | None = None  # y with y.A_j >= 0 for all j and y.b < 0
    pivots: int = 0


def solve_nonneg(columns: Sequence[dict], b: Sequence[int], degenerate_limit: int = 50) -> LPResult:
    """Decide whether b is a nonnegative combination of the sparse integer columns.

    ``columns[j]`` maps row index -> integer entry; ``b`` is a dense integer
    vector.  Returns a nonnegative rational x or a Farkas certificate y.
    """
    m = len(b)
    ncol = len(columns)
    sign = [1 if bi >= 0 else -1 for bi in b]
    width = ncol + m + 1  # structural columns, artificials, rhs
    rhs = width - 1
    T = []
    for i in range(m):
        row = [0] * width
        row[ncol + i] = 1
        row[rhs] = sign[i] * b[i]
        T.append(row)
    for j, col in enumerate(columns):
        for i, v in col.items():
            T[i][j] = sign[i] * v
    # objective row: reduced costs of phase one (minimize sum of artificials)
    obj = [0] * width
    for i in range(m):
        r = T[i]
        for j in range(ncol):
            if r[j]:
                obj[j] -= r[j]
        obj[rhs] -= r[rhs]
    basis = [ncol + i for i in range(m)]
    det = 1
    pivots = 0
    degenerate = 0
    while True:
        bland = degenerate >= degenerate_limit
        s = -1
        best = 0
        for j in range(ncol + m):
            c = obj[j]
            if c < 0:
                if bland:
                    s = j
                    break
                if c < best:
                    best, s = c, j
        if s < 0:
            break
        # ratio test: min rhs_i / T[i][s] over T[i][s] > 0; ties by smallest basic index
        r = -1
        for i in range(m):
            a = T[i][s]
            if a > 0:
                if r < 0:
                    r = i
                    continue
                lhs = T[i][rhs] * T[r][s]
                rhs_cmp = T[r][rhs] * a
                if lhs < rhs_cmp or (lhs == rhs_cmp and basis[i] < basis[r]):
                    r = i
        if r < 0:  # cannot happen in phase one (objective bounded below by 0)
            raise AssertionError("unbounded phase-one problem")
        degenerate = degenerate + 1 if T[r][rhs] == 0 else 0
        p = T[r][s]
        prow = T[r]
        for i in range(m):
            if i == r:
                continue
            row = T[i]
            f = row[s]
            if f:
                for j in range(width):
                    row[j] = (row[j] * p - f * prow[j]) // det
            else:
                for j in range(width):
                    if row[j]:
                        row[j] = row[j] * p // det
        f = obj[s]
        for j in range(width):
            if obj[j] or prow[j]:
                obj[j] = (obj[j] * p - f * prow[j]) // det
        det = p
        basis[r] = s
        pivots += 1
    value = Fraction(-obj[rhs], det)
    if value == 0:
        x = {}
        for i, var in enumerate(basis):
            if var < ncol and T[i][rhs]:
                x[var] = Fraction(T[i][rhs], det)
        return LPResult(True, x=x, pivots=pivots)
    # reduced cost of artificial i is 1 - y_i (y the phase-one dual); certificate z = -y
    y = [-(1 - Fraction(obj[ncol + i], det)) * sign[i] for i in range(m)]
    return LPResult(False, farkas=y, pivots=pivots)


def check_solution(columns, b, x) -> bool:
    if any(v < 0 for v in x.values()):
        return False
    acc = [Fraction(0)] * len(b)
    for j, v in x.items():
        for i, a in columns[j].items():
            acc[i] += v * a
    return all(acc[i] == b[i] for i in range(len(b)))


def check_farkas(columns, b, y) -> bool:
    for col in columns:
        if sum(y[i] * a for i, a in col.items()) < 0:
            return False
    return sum(y[i] * b[i] for i in range(len(b))) < 0


def _dense(columns, m):
    import numpy as np

    A = np.zeros((m, len(columns)))
    for j, col in enumerate(columns):
        for i, v in col.items():
            A[i, j] = v
    return A


def solve_guided(columns: Sequence[dict], b: Sequence[int], max_den: int = 10**6) -> LPResult:
    """Same answer as ``solve_nonneg``, using a floating-point LP as a guide.

    A float solution is used only to pick a small column subset, which is
    then solved exactly; a float dual ray is rounded to a rational and
    checked exactly.  If neither verification succeeds, fall back to the
    exact tableau on the full problem.
    """
    from scipy.optimize import linprog

    m = len(b)
    A = _dense(columns, m)
    bb = [float(v) for v in b]
    primal = linprog([0.0] * len(columns), A_eq=A, b_eq=bb, bounds=(0, None), method="highs")
    if primal.status == 0:
        keep = [j for j, v in enumerate(primal.x) if v > 1e-9]
        sub = solve_nonneg([columns[j] for j in keep], b)
        if sub.feasible:
            return LPResult(True, x={keep[j]: v for j, v in sub.x.items()}, pivots=sub.pivots)
    elif primal.status == 2:
        # dual ray: min y.b subject to y.A_j >= 0, -1 <= y <= 1
        dual = linprog(bb, A_ub=-A.T, b_ub=[0.0] * len(columns), bounds=(-1, 1), method="highs")
        if dual.status == 0 and dual.fun < -1e-9:
            y = [Fraction(v).limit_denominator(max_den) for v in dual.x]
            if check_farkas(columns, b, y):
                return LPResult(False, farkas=y)
    return solve_nonneg(columns, b)
