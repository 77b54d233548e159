"""Independent verification of fairness claims about an allocation.

Every check here recomputes from raw inputs: the envy matrix is exact
arithmetic on the shares, the fair-share thresholds come straight from the
utility rows, and efficiency is decided by a linear program rather than
trusted from the solver. For rating sessions the audit also tabulates bundle
market values against gains and checks their inverse ordering.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .model import Allocation, DivisionProblem, split_count as _split_count, evaluate
from .ratings import BundleMetrics, RatingSheet, bundle_metrics
from .simplex import solve_lp

ENVY_REL_TOL = 1e-7

# Ties in the ordering check: values this close count as equal.
ORDER_TIE_TOL = 1e-9


@dataclass(frozen=True)
class RatingContext:
    """Inputs needed to audit a price-and-rate session."""

    sheets: tuple[RatingSheet, ...]
    K: float


@dataclass(frozen=True)
class FairShareLine:
    agent_id: str
    value: float
    threshold: float
    ok: bool


@dataclass(frozen=True)
class MvGainLine:
    agent_id: str
    market_value: float
    mv_per_weight: float
    avg_standardized_utility: Optional[float]
    gain: Optional[float]
    central_rating: float


@dataclass(frozen=True)
class AuditReport:
    envy_matrix: np.ndarray  # [i, j] = agent i's valuation of bundle j
    envy_pass: bool
    envy_worst: tuple[str, str, float] | None  # (envier, envied, shortfall)
    fair_share: tuple[FairShareLine, ...]
    fair_share_pass: bool
    efficient: bool
    efficiency_slack: float
    improving_allocation: Optional[np.ndarray]
    split_count: int
    mv_gain_table: Optional[tuple[MvGainLine, ...]] = None
    ordering_pass: Optional[bool] = None

    def envy_row(self, i: int) -> np.ndarray:
        return self.envy_matrix[i]


def audit(
    problem: DivisionProblem,
    alloc: Allocation,
    rating_context: Optional[RatingContext] = None,
    tol: float = ENVY_REL_TOL,
) -> AuditReport:
    """Full fairness report for an allocation.

    Envy passes when each diagonal entry weakly dominates its row, with
    slack tol relative to the agent's own-bundle value. Fair-share
    thresholds are entitlement fractions of each agent's whole-asset
    utility. Efficiency searches for an allocation that keeps everyone at
    least as satisfied and strictly raises the total; the witness is
    returned when found.
    """
    u = problem.utilities
    w = problem.weights
    z = alloc.shares
    n = problem.n

    envy = u @ z.T
    diag = np.diag(envy)
    slack = tol * np.maximum(np.abs(diag), 1.0)
    shortfall = envy - diag[:, None]  # positive -> i prefers j's bundle
    envy_ok = bool(np.all(shortfall <= slack[:, None]))
    worst = None
    if not envy_ok:
        i, j = np.unravel_index(np.argmax(shortfall - slack[:, None]), shortfall.shape)
        worst = (problem.agents[i].id, problem.agents[j].id, float(shortfall[i, j]))

    totals = problem.row_totals
    values = diag.copy()
    thresholds = (w / w.sum()) * totals
    fs_lines = tuple(
        FairShareLine(
            agent_id=problem.agents[i].id,
            value=float(values[i]),
            threshold=float(thresholds[i]),
            ok=bool(values[i] >= thresholds[i] - tol * max(totals[i], 1.0)),
        )
        for i in range(n)
    )
    fs_pass = all(line.ok for line in fs_lines)

    efficient, slack_val, improving = _efficiency_lp(problem, alloc, tol)

    table = None
    ordering = None
    if rating_context is not None:
        metrics = bundle_metrics(
            rating_context.sheets,
            problem.goods,
            rating_context.K,
            alloc,
            agents=problem.agents,
        )
        table = tuple(
            MvGainLine(
                agent_id=m.agent_id,
                market_value=m.market_value,
                mv_per_weight=m.market_value / float(problem.agents[i].weight),
                avg_standardized_utility=m.avg_standardized_utility,
                gain=m.gain,
                central_rating=m.central_rating,
            )
            for i, m in enumerate(metrics)
        )
        ordering = _check_inverse_ordering(table)

    return AuditReport(
        envy_matrix=envy,
        envy_pass=envy_ok,
        envy_worst=worst,
        fair_share=fs_lines,
        fair_share_pass=fs_pass,
        efficient=efficient,
        efficiency_slack=slack_val,
        improving_allocation=improving,
        split_count=_split_count(alloc),
        mv_gain_table=table,
        ordering_pass=ordering,
    )


def _efficiency_lp(problem: DivisionProblem, alloc: Allocation, tol: float):
    """Search for a Pareto improvement by LP; returns (efficient, slack, witness)."""
    u = problem.utilities
    n, q = u.shape
    base = evaluate(problem, alloc).values
    nv = n * q
    c = u.reshape(-1)

    rows = []
    senses = []
    rhs = []
    for i in range(n):  # keep every agent at least whole
        row = np.zeros(nv)
        row[i * q:(i + 1) * q] = u[i]
        rows.append(row)
        senses.append(">=")
        rhs.append(base[i])
    for a in range(q):
        row = np.zeros(nv)
        row[a::q][:n] = 1.0
        rows.append(row)
        senses.append("=")
        rhs.append(1.0)

    result = solve_lp(c, np.array(rows), np.array(rhs), senses)
    total = base.sum()
    slack = float(result.value - total)
    margin = tol * max(1.0, abs(total))
    if slack > margin:
        witness = np.clip(result.x.reshape(n, q), 0.0, 1.0)
        witness /= witness.sum(axis=0, keepdims=True)
        return False, slack, witness
    return True, slack, None


def _check_inverse_ordering(table: Sequence[MvGainLine]) -> bool:
    """Market value per weight and gain must order inversely, ties matching."""
    for i in range(len(table)):
        for h in range(i + 1, len(table)):
            a, b = table[i], table[h]
            if a.gain is None or b.gain is None:
                continue
            dm = a.mv_per_weight - b.mv_per_weight
            dg = a.gain - b.gain
            sm = 0 if abs(dm) <= ORDER_TIE_TOL * max(1.0, abs(a.mv_per_weight)) else (1 if dm > 0 else -1)
            sg = 0 if abs(dg) <= ORDER_TIE_TOL * max(1.0, abs(a.gain)) else (1 if dg > 0 else -1)
            if sm != -sg:
                return False
    return True


def frontier_2agent(problem: DivisionProblem) -> list[tuple[float, float]]:
    """Vertices of the two-agent Pareto frontier.

    Goods are sorted by the ratio of agent 1's to agent 2's utility,
    descending, and swept one by one from agent 2's bundle into agent 1's;
    each step contributes a vertex. The full achievable-utility polygon
    follows by symmetry.
    """
    if problem.n != 2:
        raise ValueError(f"frontier is defined for exactly 2 agents, got {problem.n}")
    u = problem.utilities
    q = problem.q

    def ratio(a):
        if u[1, a] > 0:
            return u[0, a] / u[1, a]
        return np.inf if u[0, a] > 0 else 0.0

    order = sorted(range(q), key=lambda a: (-ratio(a), a))
    vertices = []
    for k in range(q + 1):
        u1 = float(sum(u[0, a] for a in order[:k]))
        u2 = float(sum(u[1, a] for a in order[k:]))
        vertices.append((u1, u2))
    return vertices


def equal_utility_point(vertices: Sequence[tuple[float, float]]) -> Optional[tuple[float, float]]:
    """Point of the frontier polyline where both agents' utilities coincide."""
    for (x0, y0), (x1, y1) in zip(vertices, vertices[1:]):
        f0, f1 = x0 - y0, x1 - y1
        if f0 == 0:
            return (x0, y0)
        if f0 < 0 <= f1 or f1 <= 0 < f0:
            span = f1 - f0
            if span == 0:
                continue
            s = -f0 / span
            return (x0 + s * (x1 - x0), y0 + s * (y1 - y0))
    if vertices and vertices[-1][0] == vertices[-1][1]:
        return vertices[-1]
    return None
