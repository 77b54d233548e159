"""Shared solve pipeline: case document in, result document out.

The CLI, the mediation service, and the regression corpus all funnel through
``solve_case_document`` so a case solved anywhere yields the same bytes.
"""
from __future__ import annotations

from typing import Any, Optional

import numpy as np

from .audit import AuditReport, RatingContext, audit, equal_utility_point, frontier_2agent
from .egalitarian import solve_egalitarian
from .fileformat import CaseDocument, allocation_to_lists, money_str
from .model import Allocation, split_count
from .nash import (
    PriceVector,
    PurchaseExplanation,
    equilibrium_prices,
    purchase_explanation,
    solve_nash,
    verify_clearing,
)
from .ratings import DEFAULT_K, bundle_metrics


def audit_to_dict(report: AuditReport, agent_ids: list[str]) -> dict:
    doc: dict[str, Any] = {
        "envy_matrix": [[money_str(v) for v in row] for row in report.envy_matrix],
        "envy_pass": report.envy_pass,
        "fair_share": [
            {
                "agent_id": line.agent_id,
                "value": money_str(line.value),
                "threshold": money_str(line.threshold),
                "ok": line.ok,
            }
            for line in report.fair_share
        ],
        "fair_share_pass": report.fair_share_pass,
        "efficient": report.efficient,
        "efficiency_slack": report.efficiency_slack,
        "split_count": report.split_count,
    }
    if report.envy_worst is not None:
        doc["envy_worst"] = {
            "envier": report.envy_worst[0],
            "envied": report.envy_worst[1],
            "shortfall": money_str(report.envy_worst[2]),
        }
    if report.improving_allocation is not None:
        doc["improving_allocation"] = allocation_to_lists(report.improving_allocation)
    if report.mv_gain_table is not None:
        doc["mv_gain_table"] = [
            {
                "agent_id": line.agent_id,
                "market_value": money_str(line.market_value),
                "mv_per_weight": money_str(line.mv_per_weight),
                "avg_standardized_utility": line.avg_standardized_utility,
                "gain": line.gain,
                "central_rating": line.central_rating,
            }
            for line in report.mv_gain_table
        ]
        doc["ordering_pass"] = report.ordering_pass
    return doc


def prices_to_dict(prices: PriceVector) -> dict:
    return {
        "good_ids": list(prices.good_ids),
        "unit": [float(p) for p in prices.unit_prices],
        "scaled": [money_str(p) for p in prices.scaled_prices],
        "per_agent_budget": money_str(prices.per_agent_budget),
        "budget": money_str(prices.budget),
        "total": money_str(float(prices.scaled_prices.sum())),
    }


def purchases_to_dict(explanation: PurchaseExplanation) -> list[dict]:
    return [
        {
            "agent_id": plan.agent_id,
            "budget": money_str(plan.budget),
            "lines": [
                {
                    "good_id": line.good_id,
                    "posted_price": money_str(line.posted_price),
                    "bid": money_str(line.bid),
                    "ruled_out": line.ruled_out,
                    "discount": line.discount,
                }
                for line in plan.lines
            ],
            "steps": [
                {
                    "good_id": step.good_id,
                    "fraction": step.fraction,
                    "spent": money_str(step.spent),
                    "budget_left": money_str(step.budget_left),
                }
                for step in plan.steps
            ],
            "remaining": money_str(plan.remaining),
        }
        for plan in explanation.plans
    ]


def frontier_to_dict(problem, include_equal_point: bool = True) -> dict:
    vertices = frontier_2agent(problem)
    doc = {
        "agent_ids": [a.id for a in problem.agents],
        "vertices": [[x, y] for x, y in vertices],
    }
    if include_equal_point:
        point = equal_utility_point(vertices)
        doc["equal_utility_point"] = None if point is None else [point[0], point[1]]
    return doc


def solve_case_document(
    case: CaseDocument,
    tol: float = 1e-9,
    max_iter: int = 200_000,
    procedure_override: Optional[str] = None,
) -> dict:
    """Run the case's designated solver plus diagnostics.

    Nash cases also get equilibrium prices, the market-clearing certificate
    and per-agent purchase plans; rating cases get bundle metrics. The
    default pairing (bids -> nash, ratings -> egalitarian) can be overridden,
    which is flagged in the result.
    """
    procedure = procedure_override or case.procedure
    problem = case.problem()
    agent_ids = case.agent_ids()

    rating_context = None
    if case.ratings is not None:
        rating_context = RatingContext(
            sheets=tuple(case.rating_sheets()), K=case.K or DEFAULT_K
        )

    result: dict[str, Any] = {
        "procedure": procedure,
        "agent_ids": agent_ids,
        "good_ids": case.good_ids(),
    }
    if procedure_override and procedure_override != case.procedure:
        result["procedure_overridden"] = True

    if procedure == "nash":
        solution = solve_nash(problem, tol=tol, max_iter=max_iter)
        alloc = solution.allocation
        result["log_objective"] = solution.log_objective
        result["iterations"] = solution.iterations
        result["converged"] = solution.converged
        result["residual"] = solution.residual
        budget = case.budget if case.budget is not None else float(problem.row_totals.mean())
        prices = equilibrium_prices(problem, solution, budget)
        clearing = verify_clearing(problem, solution, prices, tol=max(tol, 1e-6))
        result["prices"] = prices_to_dict(prices)
        result["clearing"] = {
            "ok": clearing.ok,
            "clauses": [
                {"name": c.name, "ok": c.ok, "worst": c.worst, "detail": c.detail}
                for c in clearing.clauses
            ],
        }
        result["purchases"] = purchases_to_dict(purchase_explanation(problem, prices))
    elif procedure == "egalitarian":
        solution = solve_egalitarian(problem, tol=tol)
        alloc = solution.allocation
        result["level"] = solution.level
        result["multiple_optima"] = solution.multiple_optima
        result["equality"] = {
            "max_gap": solution.equality.max_gap,
            "equalized": solution.equality.equalized,
            "downgraded": solution.equality.downgraded,
            "explanation": solution.equality.explanation,
        }
    else:
        raise ValueError(f"unknown procedure {procedure!r}")

    profile = solution.utilities
    result["allocation"] = allocation_to_lists(alloc.shares)
    result["utilities"] = [money_str(v) for v in profile.values]
    result["normalized_utilities"] = [float(v) for v in profile.normalized]
    result["split_count"] = split_count(alloc)

    report = audit(problem, alloc, rating_context=rating_context)
    result["audit"] = audit_to_dict(report, agent_ids)

    if rating_context is not None:
        metrics = bundle_metrics(
            rating_context.sheets, problem.goods, rating_context.K, alloc, agents=problem.agents
        )
        result["metrics"] = [
            {
                "agent_id": m.agent_id,
                "market_value": money_str(m.market_value),
                "avg_standardized_utility": m.avg_standardized_utility,
                "gain": m.gain,
                "central_rating": m.central_rating,
            }
            for m in metrics
        ]

    if problem.n == 2:
        result["frontier"] = frontier_to_dict(problem)

    return result


def allocation_from_result(result: dict) -> Allocation:
    return Allocation(shares=np.array(result["allocation"], dtype=float))
