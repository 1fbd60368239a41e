"""Linear programming over exact rationals, with a float presolve path.

Three layers:

* `exact_simplex` — a dense two-phase tableau simplex with Bland's rule over
  `Fraction`, returning exact primal/dual solutions and, on infeasibility,
  an exact Farkas vector. Deterministic and immune to cycling; intended for
  small/medium instances and as the fallback of last resort.

* `solve_nonneg_exact` — given a candidate support (usually located by a
  float solve), reconstructs an exact non-negative solution of A q = b by
  fraction-free elimination, or reports that the support does not work.

* `float_phase1` / `float_lp_min` — thin wrappers around scipy's HiGHS for
  locating supports and dual vectors quickly; every verdict derived from
  them is re-verified exactly by the callers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csc_matrix


@dataclass
class ExactLPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: list[Fraction] | None = None
    objective: Fraction | None = None
    duals: list[Fraction] | None = None
    farkas: list[Fraction] | None = None


def exact_simplex(
    cols: list[list[Fraction]],
    b: list[Fraction],
    obj: list[Fraction] | None = None,
) -> ExactLPResult:
    """Solve min obj.q s.t. [cols] q = b, q >= 0 exactly.

    With obj=None this is a pure feasibility solve. Bland's rule (lowest
    eligible index enters; ties in the ratio test go to the lowest basic
    index) guarantees termination. `farkas` in an infeasible result is an
    exact vector y with y.A_j <= 0 for every column j and y.b > 0.
    """
    m = len(b)
    n_struct = len(cols)
    for col in cols:
        if len(col) != m:
            raise ValueError("column length does not match b")
    sign = [(-1 if bi < 0 else 1) for bi in b]
    width = n_struct + m
    T: list[list[Fraction]] = []
    for i in range(m):
        row = [Fraction(sign[i]) * cols[j][i] for j in range(n_struct)]
        row += [Fraction(1) if k == i else Fraction(0) for k in range(m)]
        row.append(Fraction(sign[i]) * b[i])
        T.append(row)
    basis = [n_struct + i for i in range(m)]
    can_enter = [True] * width  # artificials blocked once they leave / in phase 2

    def pivot(z: list[Fraction], e: int, r: int) -> None:
        pv = T[r][e]
        T[r] = [v / pv for v in T[r]]
        for i in range(m):
            if i != r and T[i][e] != 0:
                f = T[i][e]
                Ti, Tr = T[i], T[r]
                T[i] = [a - f * c for a, c in zip(Ti, Tr)]
        if z[e] != 0:
            f = z[e]
            Tr = T[r]
            for j in range(width + 1):
                z[j] -= f * Tr[j]
        if basis[r] >= n_struct:
            can_enter[basis[r]] = False
        basis[r] = e

    def run_phase(z: list[Fraction]) -> str:
        while True:
            e = -1
            for j in range(width):
                # basic columns have reduced cost 0, so z[j] < 0 skips them
                if can_enter[j] and z[j] < 0:
                    e = j
                    break
            if e < 0:
                return "optimal"
            rows = [i for i in range(m) if T[i][e] > 0]
            if not rows:
                return "unbounded"
            best_ratio = None
            r = -1
            for i in rows:
                ratio = T[i][width] / T[i][e]
                if best_ratio is None or ratio < best_ratio or (
                    ratio == best_ratio and basis[i] < basis[r]
                ):
                    best_ratio = ratio
                    r = i
            pivot(z, e, r)

    # phase 1: minimise the sum of artificials
    z1 = [Fraction(0)] * (width + 1)
    for j in range(width):
        z1[j] = (Fraction(1) if j >= n_struct else Fraction(0)) - sum(T[i][j] for i in range(m))
    z1[width] = -sum(T[i][width] for i in range(m))
    status = run_phase(z1)
    if status != "optimal":  # phase 1 is always bounded below by 0
        raise RuntimeError("phase-1 simplex reported unbounded")
    phase1_obj = sum(T[i][width] for i in range(m) if basis[i] >= n_struct)
    if phase1_obj > 0:
        y = [Fraction(1) - z1[n_struct + i] for i in range(m)]
        farkas = [sign[i] * y[i] for i in range(m)]
        return ExactLPResult(status="infeasible", farkas=farkas)

    # drive basic artificials out where a structural pivot exists
    for r in range(m):
        if basis[r] >= n_struct:
            for e in range(n_struct):
                if can_enter[e] and T[r][e] != 0 and basis.count(e) == 0:
                    pivot(z1, e, r)
                    break
    for j in range(n_struct, width):
        can_enter[j] = False

    def extract_x() -> list[Fraction]:
        x = [Fraction(0)] * n_struct
        for i in range(m):
            if basis[i] < n_struct:
                x[basis[i]] = T[i][width]
        return x

    if obj is None:
        return ExactLPResult(status="optimal", x=extract_x(), objective=Fraction(0))

    cost = list(obj) + [Fraction(0)] * m
    z2 = [Fraction(0)] * (width + 1)
    for j in range(width + 1):
        z2[j] = (cost[j] if j < width else Fraction(0)) - sum(
            cost[basis[i]] * T[i][j] for i in range(m)
        )
    status = run_phase(z2)
    if status == "unbounded":
        return ExactLPResult(status="unbounded")
    x = extract_x()
    value = sum((obj[j] * x[j] for j in range(n_struct)), Fraction(0))
    duals = [sign[i] * (-z2[n_struct + i]) for i in range(m)]
    return ExactLPResult(status="optimal", x=x, objective=value, duals=duals)


def solve_nonneg_exact(
    cols: list[list[Fraction]],
    b: list[Fraction],
    prefer: list[int] | None = None,
) -> list[Fraction] | None:
    """Exact q >= 0 with sum_j q_j cols[j] = b, pivoting on `prefer` first.

    Free (non-pivot) columns are fixed to zero, so when `prefer` ranks the
    support of a float solution by weight this reproduces that vertex
    exactly. Returns None if the system is inconsistent or the resulting
    q has a negative entry.
    """
    m = len(b)
    k = len(cols)
    order = list(prefer) if prefer is not None else list(range(k))
    denoms = [f.denominator for f in b]
    for col in cols:
        denoms.extend(f.denominator for f in col)
    scale = lcm(*denoms) if denoms else 1
    M = [[int(cols[j][i] * scale) for j in range(k)] + [int(b[i] * scale)] for i in range(m)]

    prev = 1
    pivots: list[tuple[int, int]] = []
    r = 0
    for col in order:
        if r == m:
            break
        pr = next((i for i in range(r, m) if M[i][col] != 0), None)
        if pr is None:
            continue
        M[r], M[pr] = M[pr], M[r]
        p = M[r][col]
        for i in range(r + 1, m):
            Mi, Mr = M[i], M[r]
            f = Mi[col]
            # one-step fraction-free update; division by the previous pivot is exact
            M[i] = [(p * a - f * c) // prev for a, c in zip(Mi, Mr)]
        prev = p
        pivots.append((r, col))
        r += 1

    for i in range(r, m):
        if all(M[i][j] == 0 for j in order) and M[i][k] != 0:
            return None

    q = [Fraction(0)] * k
    for prow, pcol in reversed(pivots):
        acc = Fraction(M[prow][k])
        for _, c2 in pivots:
            if c2 != pcol and q[c2] != 0:
                acc -= M[prow][c2] * q[c2]
        q[pcol] = acc / M[prow][pcol]

    for v in q:
        if v < 0:
            return None
    # confirm against the original system; elimination bugs must not leak
    for i in range(m):
        total = sum((cols[j][i] * q[j] for j in range(k) if q[j] != 0), Fraction(0))
        if total != b[i]:
            return None
    return q


def _as_csc(cols_f: np.ndarray) -> csc_matrix:
    return csc_matrix(cols_f)


def float_phase1(A: np.ndarray, b: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """Least total slack for A q = b, q >= 0 (always solvable).

    Returns (objective, q, y); objective ~ 0 means feasible and q is a
    feasible point; otherwise y is a float Farkas direction with |y|_inf <= 1.
    """
    m, n = A.shape
    eye = np.eye(m)
    A_eq = np.hstack([A, eye, -eye])
    c = np.concatenate([np.zeros(n), np.ones(2 * m)])
    res = linprog(c, A_eq=_as_csc(A_eq), b_eq=b, bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"phase-1 float LP failed: {res.message}")
    y = np.asarray(res.eqlin.marginals, dtype=float)
    if float(y @ b) < 0:
        y = -y
    return float(res.fun), np.asarray(res.x[:n], dtype=float), y


def float_lp_min(A: np.ndarray, b: np.ndarray, c: np.ndarray):
    """min c.q s.t. A q = b, q >= 0 in floats; returns (status, q, y, value)."""
    res = linprog(c, A_eq=_as_csc(A), b_eq=b, bounds=(0, None), method="highs")
    if res.status == 2:
        return "infeasible", None, None, None
    if res.status == 3:
        return "unbounded", None, None, None
    if res.status != 0:
        raise RuntimeError(f"float LP failed: {res.message}")
    y = np.asarray(res.eqlin.marginals, dtype=float)
    if abs(float(y @ b) - float(res.fun)) > abs(float(-y @ b) - float(res.fun)):
        y = -y
    return "optimal", np.asarray(res.x, dtype=float), y, float(res.fun)
