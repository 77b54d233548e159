"""Competitive solver: weighted Nash-product maximizer with supporting prices.

The allocation maximizing sum_i w_i * ln U_i coincides with the equilibrium
of a linear market in which agent i holds budget w_i and every good is sold
at the price that exactly clears it. The solver runs proportional-response
dynamics on that market: each round, agents split their budget over goods in
proportion to the utility each good contributed last round, and prices are
the money landing on each good. For linear utilities this converges to the
equilibrium from any interior start, needs no external optimizer, and is
fully deterministic.

After convergence the near-tied support is rounded onto a forest (spending
is rotated around cycles of maximal-bang-per-buck edges until none remain),
which caps the nonzero shares at agents + goods - 1 and hence the split
goods at agents - 1, without moving any agent's utility beyond dust.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .model import Allocation, DivisionProblem, UtilityProfile, evaluate

# Fixed-point loop: stop once no price moves more than this, relatively.
PRICE_CHANGE_TOL = 1e-10
MAX_ITERATIONS = 200_000

# Bang-per-buck band treated as "maximal" when building the support forest.
MBB_BAND = 1e-7

DEFAULT_TOL = 1e-9


class ConvergenceError(RuntimeError):
    """Fixed point not reached within the iteration budget."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class NashSolution:
    allocation: Allocation
    utilities: UtilityProfile
    log_objective: float
    iterations: int
    converged: bool
    residual: float


@dataclass(frozen=True)
class PriceVector:
    """Supporting equilibrium prices.

    unit_prices correspond to budgets of one money unit per entitlement
    unit (they sum to the total entitlement weight); scaled_prices are the
    posted prices for a real budget and sum to it. per_agent_budget is the
    money a unit-weight agent spends (budget / total weight, i.e. budget/n
    for equal weights).
    """

    good_ids: tuple[str, ...]
    unit_prices: np.ndarray
    scaled_prices: np.ndarray
    per_agent_budget: float
    budget: float

    def __post_init__(self):
        up = np.array(self.unit_prices, dtype=float)
        sp = np.array(self.scaled_prices, dtype=float)
        up.setflags(write=False)
        sp.setflags(write=False)
        object.__setattr__(self, "unit_prices", up)
        object.__setattr__(self, "scaled_prices", sp)


def _proportional_response(u, w, max_iter, spend=None, price_tol=PRICE_CHANGE_TOL):
    """Run the budget-splitting fixed point; returns (spend, prices, iters, gap)."""
    if spend is None:
        totals = u.sum(axis=1, keepdims=True)
        spend = w[:, None] * u / totals
    prices = spend.sum(axis=0)
    gap = np.inf
    for it in range(1, max_iter + 1):
        z = spend / prices
        contrib = z * u
        value = contrib.sum(axis=1, keepdims=True)
        spend = w[:, None] * contrib / value
        new_prices = spend.sum(axis=0)
        gap = float(np.max(np.abs(new_prices - prices) / new_prices))
        prices = new_prices
        if gap <= price_tol:
            return spend, prices, it, gap
    return spend, prices, max_iter, gap


def _forest_support(spend, eps):
    """Rotate spending around cycles of the support graph until it is acyclic.

    Rotations alternate +/- around an agent-good cycle, so each agent's total
    spending and each good's total sales are untouched; only which maximal
    goods the money sits on changes. The orientation moving the least money
    is applied, zeroing at least one edge per round.
    """
    s = spend.copy()
    n, q = s.shape
    while True:
        adj = {("a", i): [] for i in range(n)}
        adj.update({("g", a): [] for a in range(q)})
        for i in range(n):
            for a in range(q):
                if s[i, a] > eps:
                    adj[("a", i)].append(("g", a))
                    adj[("g", a)].append(("a", i))
        cycle = _find_cycle(adj)
        if cycle is None:
            return s
        edges = []
        for k in range(len(cycle)):
            x, y = cycle[k], cycle[(k + 1) % len(cycle)]
            agent = x[1] if x[0] == "a" else y[1]
            good = y[1] if y[0] == "g" else x[1]
            edges.append((agent, good))
        plus = edges[0::2]
        minus = edges[1::2]
        d_fwd = min(s[i, a] for i, a in minus)
        d_bwd = min(s[i, a] for i, a in plus)
        if d_bwd < d_fwd:
            plus, minus = minus, plus
            delta = d_bwd
        else:
            delta = d_fwd
        for i, a in plus:
            s[i, a] += delta
        for i, a in minus:
            s[i, a] -= delta
        for i, a in minus:
            if s[i, a] <= eps:
                s[i, a] = 0.0


def _find_cycle(adj):
    """First cycle (as a node list) in an undirected bipartite graph, or None.

    Edges are added one by one into a union-find forest; the first edge whose
    endpoints are already connected closes a cycle, recovered as the tree
    path between them (the closing edge is the implied wrap-around).
    """
    uf = {node: node for node in adj}

    def find(x):
        while uf[x] != x:
            uf[x] = uf[uf[x]]
            x = uf[x]
        return x

    tree = {node: set() for node in adj}
    edges = sorted((u, v) for u in adj for v in adj[u] if u[0] == "a")
    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru == rv:
            prev = {u: None}
            queue = [u]
            while queue:
                cur = queue.pop(0)
                if cur == v:
                    break
                for nxt in sorted(tree[cur]):
                    if nxt not in prev:
                        prev[nxt] = cur
                        queue.append(nxt)
            path = [v]
            while path[-1] != u:
                path.append(prev[path[-1]])
            return path
        uf[ru] = rv
        tree[u].add(v)
        tree[v].add(u)
    return None


def _clean_support(u, w, spend, prices):
    """Mask spending onto maximal-bang-per-buck pairs, restore exact budgets,
    break cycles, and return (allocation, implied prices)."""
    bb = u / prices
    maxbb = bb.max(axis=1, keepdims=True)
    mask = bb >= maxbb * (1.0 - MBB_BAND)
    s = np.where(mask, spend, 0.0)
    # Far from the fixed point a good may lose all its spending to the mask;
    # keep its raw column so the allocation stays well-defined (the residual
    # check will reject the solution and iteration continues).
    dead = s.sum(axis=0) == 0.0
    if dead.any():
        s[:, dead] = spend[:, dead]
    s = s * (w / s.sum(axis=1))[:, None]
    s = _forest_support(s, float(s.sum()) * 1e-14)
    final_prices = s.sum(axis=0)
    zm = s / final_prices
    return zm, final_prices


def _residual(u, w, z, prices, tol):
    """KKT-style residual: spending balance plus bang-per-buck maximality."""
    spend = z * prices
    budget_gap = float(np.max(np.abs(spend.sum(axis=1) - w) / w))
    with np.errstate(divide="ignore", invalid="ignore"):
        bb = np.where(prices > 0, u / prices, 0.0)
    maxbb = bb.max(axis=1)
    active = z > tol
    gaps = np.where(active, 1.0 - bb / np.where(maxbb > 0, maxbb, 1.0)[:, None], 0.0)
    return max(budget_gap, float(gaps.max()) if gaps.size else 0.0)


def solve_nash(
    problem: DivisionProblem,
    tol: float = DEFAULT_TOL,
    max_iter: int = MAX_ITERATIONS,
) -> NashSolution:
    """Allocation maximizing sum_i w_i ln U_i over the feasible set.

    Raises ValueError for agents with no valued good and ConvergenceError
    (carrying the residual) when the market dynamics fail to settle.
    """
    if not 0 < tol <= 1e-3:
        raise ValueError("tol must lie in (0, 1e-3]")
    u = problem.utilities
    w = problem.weights
    n, q = u.shape
    dead_rows = [problem.agents[i].id for i in range(n) if not np.any(u[i] > 0)]
    if dead_rows:
        raise ValueError(f"agents with no achievable utility: {dead_rows}")

    market = np.any(u > 0, axis=0)  # goods somebody values
    um = u[:, market]

    # Iterate until the cleaned-up allocation meets the requested residual;
    # the price-change threshold tightens whenever the first pass settles on
    # prices whose implied support still carries too much slack.
    spend = None
    price_tol = PRICE_CHANGE_TOL
    iters = 0
    while True:
        spend, prices, used, gap = _proportional_response(
            um, w, max_iter - iters, spend=spend, price_tol=price_tol
        )
        iters += used
        zm, final_prices = _clean_support(um, w, spend, prices)
        residual = _residual(um, w, zm, final_prices, tol)
        if residual <= tol and gap <= PRICE_CHANGE_TOL:
            break
        if iters >= max_iter or price_tol <= 1e-15:
            raise ConvergenceError(
                f"market dynamics stopped at residual {residual:.3e} "
                f"after {iters} iterations (required {tol:.1e})",
                residual=residual,
                iterations=iters,
            )
        price_tol = max(price_tol * 1e-2, 1e-15)

    z = np.zeros((n, q))
    z[:, market] = zm
    if not market.all():
        z[0, ~market] = 1.0  # worthless goods go whole to the first agent

    allocation = Allocation(shares=z)
    profile = evaluate(problem, allocation)
    log_objective = float((w * np.log(profile.values)).sum())
    return NashSolution(
        allocation=allocation,
        utilities=profile,
        log_objective=log_objective,
        iterations=iters,
        converged=True,
        residual=residual,
    )


def equilibrium_prices(
    problem: DivisionProblem, solution: NashSolution, budget: float
) -> PriceVector:
    """Prices supporting the solution as rational spending of equal incomes.

    Unit prices are max_i w_i * u[i, a] / U_i (with equal unit weights this
    is the classic max_i bid/U_i rule); scaling by budget / total weight
    makes them sum to the budget.
    """
    if not solution.converged:
        raise ValueError("refusing to price an unconverged solution")
    if budget <= 0:
        raise ValueError("budget must be positive")
    u = problem.utilities
    w = problem.weights
    U = solution.utilities.values
    unit = (w[:, None] * u / U[:, None]).max(axis=0)
    share = budget / w.sum()
    return PriceVector(
        good_ids=tuple(g.id for g in problem.goods),
        unit_prices=unit,
        scaled_prices=share * unit,
        per_agent_budget=share,
        budget=float(budget),
    )


@dataclass(frozen=True)
class ClearingClause:
    name: str
    ok: bool
    worst: float
    detail: str = ""


@dataclass(frozen=True)
class ClearingCertificate:
    ok: bool
    clauses: tuple[ClearingClause, ...]


def verify_clearing(
    problem: DivisionProblem,
    solution: NashSolution,
    prices: PriceVector,
    tol: float = 1e-6,
) -> ClearingCertificate:
    """Check the posted prices actually support the allocation as a market.

    Clause spending: every agent's outlay equals their budget share.
    Clause maximal-goods: agents hold only goods of maximal bang per buck.
    Clause no-overpay: nobody pays above their own valuation on held goods.
    """
    u = problem.utilities
    w = problem.weights
    z = solution.allocation.shares
    p = prices.scaled_prices
    budget = prices.budget
    shares = prices.per_agent_budget * w  # money available to each agent

    spend = (z * p).sum(axis=1)
    gap_spend = float(np.max(np.abs(spend - shares)))
    c1 = ClearingClause(
        name="spending",
        ok=gap_spend <= tol * budget,
        worst=gap_spend,
        detail=f"max |outlay - budget share| = {gap_spend:.6g}",
    )

    with np.errstate(divide="ignore", invalid="ignore"):
        bb = np.where(p > 0, u / p, 0.0)
    maxbb = bb.max(axis=1)
    worst_pair = None
    worst_gap = 0.0
    for i in range(problem.n):
        for a in range(problem.q):
            if z[i, a] > tol and maxbb[i] > 0:
                g = float(1.0 - bb[i, a] / maxbb[i])
                if g > worst_gap:
                    worst_gap = g
                    worst_pair = (problem.agents[i].id, problem.goods[a].id)
    c2 = ClearingClause(
        name="maximal-goods",
        ok=bool(worst_gap <= tol),
        worst=worst_gap,
        detail="" if worst_pair is None else f"worst at agent {worst_pair[0]!r}, good {worst_pair[1]!r}",
    )

    over = 0.0
    over_pair = None
    for i in range(problem.n):
        for a in range(problem.q):
            if z[i, a] > tol:
                excess = float(p[a] - u[i, a])
                if excess > over:
                    over = excess
                    over_pair = (problem.agents[i].id, problem.goods[a].id)
    c3 = ClearingClause(
        name="no-overpay",
        ok=bool(over <= tol * budget),
        worst=over,
        detail="" if over_pair is None else f"agent {over_pair[0]!r} pays above valuation on {over_pair[1]!r}",
    )

    clauses = (c1, c2, c3)
    return ClearingCertificate(ok=all(c.ok for c in clauses), clauses=clauses)


@dataclass(frozen=True)
class PurchaseLine:
    good_id: str
    posted_price: float
    bid: float
    ruled_out: bool
    discount: Optional[float]  # (bid - price) / bid, None when ruled out


@dataclass(frozen=True)
class PurchaseStep:
    good_id: str
    fraction: float
    spent: float
    budget_left: float


@dataclass(frozen=True)
class AgentPurchasePlan:
    agent_id: str
    budget: float
    lines: tuple[PurchaseLine, ...]
    steps: tuple[PurchaseStep, ...]
    remaining: float

    def bundle(self) -> dict[str, float]:
        return {s.good_id: s.fraction for s in self.steps}


@dataclass(frozen=True)
class PurchaseExplanation:
    plans: tuple[AgentPurchasePlan, ...]

    def plan_for(self, agent_id: str) -> AgentPurchasePlan:
        for plan in self.plans:
            if plan.agent_id == agent_id:
                return plan
        raise KeyError(f"unknown agent {agent_id!r}")


def purchase_explanation(
    problem: DivisionProblem,
    prices: PriceVector,
    budget: Optional[float] = None,
) -> PurchaseExplanation:
    """Posted-price shopping story, one plan per agent.

    Each agent rules out goods priced above their own bid, ranks the rest by
    discount (bids tie-broken by good order), then buys greedily with their
    budget share, taking a fraction of the last affordable good. On the
    bundled cases this reproduces the equilibrium bundles; in general it is
    an explanatory report, not a solver.
    """
    if budget is None:
        budget = prices.budget
    u = problem.utilities
    w = problem.weights
    p = prices.scaled_prices * (budget / prices.budget)
    plans = []
    for i, agent in enumerate(problem.agents):
        share = (budget / w.sum()) * w[i]
        lines = []
        candidates = []
        for a, good in enumerate(problem.goods):
            bid = u[i, a]
            if p[a] > bid:
                lines.append(PurchaseLine(good.id, float(p[a]), float(bid), True, None))
            else:
                disc = 0.0 if bid == 0 else (bid - p[a]) / bid
                lines.append(PurchaseLine(good.id, float(p[a]), float(bid), False, float(disc)))
                candidates.append((-disc, a))
        candidates.sort()
        left = share
        steps = []
        for _, a in candidates:
            if left <= 0:
                break
            price = p[a]
            if price <= 0:
                frac = 1.0
                cost = 0.0
            elif price <= left:
                frac = 1.0
                cost = price
            else:
                frac = left / price
                cost = left
            left -= cost
            steps.append(PurchaseStep(problem.goods[a].id, float(frac), float(cost), float(left)))
        plans.append(
            AgentPurchasePlan(
                agent_id=agent.id,
                budget=float(share),
                lines=tuple(lines),
                steps=tuple(steps),
                remaining=float(left),
            )
        )
    return PurchaseExplanation(plans=tuple(plans))
