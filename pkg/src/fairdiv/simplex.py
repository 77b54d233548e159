"""Self-contained dense simplex for the small LPs this package solves.

Maximizes c.x subject to A x (<=, =, >=) b and x >= 0 via the classic
two-phase tableau method. Entering column: largest reduced cost, ties broken
by lowest column index; leaving row: smallest ratio, ties broken by smallest
basis index. After a run of degenerate pivots the entering rule drops to
Bland's (lowest improving index) until the objective moves again, which
guarantees termination. Everything is deterministic: identical inputs walk
an identical pivot path and return the identical vertex.

Problem sizes here are a few dozen variables, so a dense float64 tableau
recomputed reduced costs and all is comfortably exact and fast.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-9

# Consecutive zero-progress pivots tolerated before switching to Bland's rule.
DEGENERACY_PATIENCE = 64


class InfeasibleLP(ValueError):
    """The constraint system admits no feasible point."""


class UnboundedLP(ValueError):
    """The objective is unbounded above on the feasible region."""


@dataclass
class LPResult:
    x: np.ndarray
    value: float
    basis: list[int]
    multiple_optima: bool


def solve_lp(c, A, b, senses, tol: float = PIVOT_TOL) -> LPResult:
    """Maximize c.x s.t. A x (senses) b, x >= 0.

    senses is a sequence of '<=', '=', '>=' one per row of A.
    """
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    c = np.array(c, dtype=float)
    if A.ndim != 2 or A.shape != (b.size, A.shape[1]) or c.size != A.shape[1]:
        raise ValueError("inconsistent LP dimensions")
    senses = list(senses)
    if len(senses) != b.size:
        raise ValueError("one sense per row required")
    m, n = A.shape

    flip = {"<=": ">=", ">=": "<=", "=": "="}
    for i in range(m):
        if b[i] < 0:
            A[i] *= -1.0
            b[i] *= -1.0
            senses[i] = flip[senses[i]]

    # Append slack/surplus columns; remember which rows get a free slack basis.
    extra = []
    slack_basis: dict[int, int] = {}
    for i, s in enumerate(senses):
        if s == "<=":
            col = np.zeros(m)
            col[i] = 1.0
            extra.append(col)
            slack_basis[i] = n + len(extra) - 1
        elif s == ">=":
            col = np.zeros(m)
            col[i] = -1.0
            extra.append(col)
        elif s != "=":
            raise ValueError(f"unknown sense {s!r}")
    A2 = np.hstack([A, np.column_stack(extra)]) if extra else A
    n2 = A2.shape[1]

    basis = [-1] * m
    art = []
    for i in range(m):
        if i in slack_basis:
            basis[i] = slack_basis[i]
    for i in range(m):
        if basis[i] < 0:
            col = np.zeros(m)
            col[i] = 1.0
            art.append(col)
            basis[i] = n2 + len(art) - 1
    A3 = np.hstack([A2, np.column_stack(art)]) if art else A2
    ntot = A3.shape[1]
    n_art = len(art)

    T = np.hstack([A3, b[:, None]])

    def reduced_costs(cost):
        lam = np.zeros(ntot + 1)
        for r, bv in enumerate(basis):
            cb = cost[bv]
            if cb != 0.0:
                lam += cb * T[r]
        return cost - lam[:-1], lam[-1]  # (reduced costs, objective value)

    def pivot(row, col):
        T[row] /= T[row, col]
        colvals = T[:, col].copy()
        for r in range(m):
            if r != row and colvals[r] != 0.0:
                T[r] -= colvals[r] * T[row]
        basis[row] = col

    def run_phase(cost, allowed_upto):
        stalled = 0
        guard = 0
        limit = 10000 * (m + ntot)
        while True:
            guard += 1
            if guard > limit:  # pragma: no cover - Bland fallback prevents this
                raise RuntimeError("simplex failed to terminate")
            red, _ = reduced_costs(cost)
            in_basis = set(basis)
            enter = -1
            if stalled < DEGENERACY_PATIENCE:
                best = tol
                for j in range(allowed_upto):
                    if j not in in_basis and red[j] > best:
                        best = red[j]
                        enter = j
            else:
                for j in range(allowed_upto):
                    if j not in in_basis and red[j] > tol:
                        enter = j
                        break
            if enter < 0:
                return
            leave = -1
            best_key = None
            for r in range(m):
                a = T[r, enter]
                if a > tol:
                    key = (T[r, -1] / a, basis[r])
                    if best_key is None or key < best_key:
                        best_key = key
                        leave = r
            if leave < 0:
                raise UnboundedLP("objective unbounded above")
            degenerate = best_key[0] <= tol
            pivot(leave, enter)
            stalled = stalled + 1 if degenerate else 0

    if n_art:
        cost1 = np.zeros(ntot)
        cost1[ntot - n_art:] = -1.0
        run_phase(cost1, ntot)
        _, v1 = reduced_costs(cost1)  # equals -(sum of artificials)
        if v1 < -1e-7:
            raise InfeasibleLP(f"phase-1 residual {-v1:.3e}")
        # Pivot leftover artificials out of the basis; rows that cannot be
        # pivoted are redundant and harmless at value zero.
        for r in range(m):
            if basis[r] >= ntot - n_art:
                for j in range(ntot - n_art):
                    if abs(T[r, j]) > tol and j not in basis:
                        pivot(r, j)
                        break

    cost2 = np.zeros(ntot)
    cost2[:n] = c
    structural_upto = ntot - n_art
    run_phase(cost2, structural_upto)

    x = np.zeros(ntot)
    for r, bv in enumerate(basis):
        x[bv] = T[r, -1]
    red, _ = reduced_costs(cost2)
    in_basis = set(basis)
    multiple = any(
        j not in in_basis and abs(red[j]) <= tol for j in range(n)
    )
    return LPResult(
        x=x[:n],
        value=float(c @ x[:n]),
        basis=list(basis),
        multiple_optima=bool(multiple),
    )
