"""Egalitarian solver: maximize the worst normalized utility per entitlement.

The program is linear: maximize t subject to U_i(z) >= t * w_i * (agent i's
whole-asset utility) and unit column sums. Solving it with the package's own
dense simplex returns a vertex, which caps nonzero shares at
agents + goods - 1 and split goods at agents - 1. When every utility entry
is positive the optimum equalizes all normalized utilities per weight; with
zeros the certificate degrades to plain max-min optimality and says so.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import Allocation, DivisionProblem, UtilityProfile, evaluate
from .simplex import solve_lp

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class EqualityReport:
    """Certificate that normalized utilities per weight coincide.

    When equality fails but zero-utility entries exist, the solution is
    still max-min optimal; ``downgraded`` marks that situation.
    """

    max_gap: float
    equalized: bool
    downgraded: bool
    explanation: str = ""

    @property
    def ok(self) -> bool:
        return self.equalized or self.downgraded


@dataclass(frozen=True)
class EgalitarianSolution:
    allocation: Allocation
    utilities: UtilityProfile
    level: float  # optimal min_i (normalized utility / weight)
    equality: EqualityReport
    multiple_optima: bool


def solve_egalitarian(problem: DivisionProblem, tol: float = DEFAULT_TOL) -> EgalitarianSolution:
    """Vertex allocation maximizing min_i (normalized utility / weight).

    Deterministic: the simplex pivot path is fixed, so reruns return the
    identical vertex. Alternate optimal vertices (zero reduced costs at the
    optimum) are disclosed through ``multiple_optima``.
    """
    u = problem.utilities
    w = problem.weights
    n, q = u.shape
    dead = [problem.agents[i].id for i in range(n) if not np.any(u[i] > 0)]
    if dead:
        raise ValueError(f"agents with no valued good: {dead}")

    totals = problem.row_totals
    nv = n * q + 1  # shares row-major, then the level variable
    t_col = n * q
    c = np.zeros(nv)
    c[t_col] = 1.0

    rows = []
    senses = []
    rhs = []
    for i in range(n):  # -(u_i / T_i) . z_i + w_i t <= 0
        row = np.zeros(nv)
        row[i * q:(i + 1) * q] = -u[i] / totals[i]
        row[t_col] = w[i]
        rows.append(row)
        senses.append("<=")
        rhs.append(0.0)
    for a in range(q):  # shares of good a sum to one
        row = np.zeros(nv)
        row[a::q][:n] = 1.0
        rows.append(row)
        senses.append("=")
        rhs.append(1.0)

    result = solve_lp(c, np.array(rows), np.array(rhs), senses, tol=min(tol, 1e-9))
    z = result.x[:n * q].reshape(n, q)
    z = np.clip(z, 0.0, 1.0)
    z /= z.sum(axis=0, keepdims=True)
    allocation = Allocation(shares=z)
    profile = evaluate(problem, allocation)
    per_weight = profile.normalized / w
    level = float(per_weight.min())
    equality = equality_certificate(problem, allocation, tol=max(tol, 1e-9), per_weight=per_weight)
    return EgalitarianSolution(
        allocation=allocation,
        utilities=profile,
        level=level,
        equality=equality,
        multiple_optima=result.multiple_optima,
    )


def equality_certificate(
    problem: DivisionProblem,
    alloc: Allocation,
    tol: float = 1e-7,
    per_weight: Optional[np.ndarray] = None,
) -> EqualityReport:
    """Largest pairwise gap of normalized-utility-per-weight across agents.

    Equality is guaranteed only when every agent values every good; a gap
    in the presence of zero entries downgrades the certificate instead of
    failing it.
    """
    if per_weight is None:
        profile = evaluate(problem, alloc)
        per_weight = profile.normalized / problem.weights
    gap = float(per_weight.max() - per_weight.min())
    if gap <= tol:
        return EqualityReport(max_gap=gap, equalized=True, downgraded=False)
    has_zero = bool(np.any(problem.utilities == 0))
    if has_zero:
        return EqualityReport(
            max_gap=gap,
            equalized=False,
            downgraded=True,
            explanation=(
                "zero-utility entries present: equal normalized utilities are "
                "not guaranteed, the allocation is max-min optimal only"
            ),
        )
    return EqualityReport(
        max_gap=gap,
        equalized=False,
        downgraded=False,
        explanation="normalized utilities differ beyond tolerance",
    )
