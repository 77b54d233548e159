"""Bid intake for the fix-your-own-price procedure.

The mediator fixes a budget and a range of reasonable offers per good; each
agent then spreads the budget over the goods as private bids. Accepted bids
become the agent's utility row verbatim, so everything downstream (the
competitive solver, prices, envy checks) speaks the bid currency.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .model import Agent, DivisionProblem, Good, ValidationReport, Violation

# Money arrives rounded; a submitted sheet must match the budget to this
# relative tolerance.
BUDGET_REL_TOL = 1e-6


class ScalingError(ValueError):
    """Bids cannot be scaled (zero total)."""


@dataclass(frozen=True)
class BidRange:
    """Reasonable-offer interval for one good; ``upper=None`` leaves it open."""

    lower: float
    upper: Optional[float] = None

    def __post_init__(self):
        if self.lower < 0:
            raise ValueError("lower bound must be >= 0")
        if self.upper is not None and self.upper < self.lower:
            raise ValueError("upper bound below lower bound")

    def contains(self, amount: float) -> bool:
        if amount < self.lower:
            return False
        return self.upper is None or amount <= self.upper


@dataclass(frozen=True)
class BidSheet:
    """One agent's monetary bids, ordered like the session's goods."""

    agent_id: str
    bids: tuple[float, ...]
    budget: float

    def __post_init__(self):
        object.__setattr__(self, "bids", tuple(float(b) for b in self.bids))
        if any(b < 0 for b in self.bids):
            raise ValueError(f"sheet {self.agent_id!r}: bids must be >= 0")
        if self.budget <= 0:
            raise ValueError("budget must be positive")

    @property
    def total(self) -> float:
        return float(sum(self.bids))


def suggest_ranges(
    tentative_values: Sequence[float], spread: float
) -> tuple[list[BidRange], float]:
    """Ranges [v*(1-spread), v*(1+spread)] per good plus the implied budget.

    The budget is the exact sum of the tentative values; mediators are free
    to override it (the bundled inheritance case rounds 632 down to 630).
    """
    if not 0 <= spread < 1:
        raise ValueError("spread must lie in [0, 1)")
    values = [float(v) for v in tentative_values]
    if any(v < 0 for v in values):
        raise ValueError("tentative values must be >= 0")
    ranges = [BidRange(lower=v * (1 - spread), upper=v * (1 + spread)) for v in values]
    return ranges, float(sum(values))


def validate_bids(
    sheet: BidSheet, ranges: Sequence[Optional[BidRange]], budget: float,
    goods: Optional[Sequence[Good]] = None,
) -> ValidationReport:
    """Flag bids outside their range and budget-sum mismatches.

    Bids sitting exactly on a bounded upper limit are legal but reported as
    warnings: they invite ties, which the mediator may want to talk down.
    """
    names = [g.id for g in goods] if goods else [f"good[{a}]" for a in range(len(sheet.bids))]
    violations = []
    warnings = []
    if len(ranges) != len(sheet.bids):
        violations.append(Violation(code="dimension", message="one range per good required"))
        return ValidationReport(violations=tuple(violations))
    for a, (bid, rng) in enumerate(zip(sheet.bids, ranges)):
        if rng is None:
            continue
        if not rng.contains(bid):
            bound = f">= {rng.lower}" if bid < rng.lower else f"<= {rng.upper}"
            violations.append(
                Violation(
                    code="bid-out-of-range",
                    message=f"bid {bid} on {names[a]} outside reasonable range ({bound})",
                    agent_id=sheet.agent_id,
                    good_id=names[a],
                )
            )
        elif rng.upper is not None and bid == rng.upper:
            warnings.append(
                Violation(
                    code="bid-at-upper-bound",
                    message=f"bid on {names[a]} sits on the upper bound; ties may follow",
                    agent_id=sheet.agent_id,
                    good_id=names[a],
                )
            )
    gap = sheet.total - budget
    if abs(gap) > BUDGET_REL_TOL * budget:
        word = "deficit" if gap < 0 else "excess"
        violations.append(
            Violation(
                code="budget-mismatch",
                message=f"bids sum to {sheet.total}, budget is {budget} ({word} {abs(gap)})",
                agent_id=sheet.agent_id,
            )
        )
    return ValidationReport(violations=tuple(violations), warnings=tuple(warnings))


def scale_bids_to_budget(sheet: BidSheet, budget: float) -> BidSheet:
    """Multiply every bid by budget / (current total), preserving proportions.

    Range compliance of the scaled sheet is *not* repaired here; callers
    re-validate and surface any violations to the mediator.
    """
    total = sheet.total
    if total <= 0:
        raise ScalingError("cannot scale an all-zero bid sheet")
    factor = budget / total
    if factor == 1.0:
        return sheet
    return replace(sheet, bids=tuple(b * factor for b in sheet.bids), budget=budget)


def bids_to_utilities(
    sheets: Sequence[BidSheet], goods: Sequence[Good],
    agents: Optional[Sequence[Agent]] = None,
) -> DivisionProblem:
    """Assemble the division problem with u[i, a] = bid of agent i on good a.

    Bids transfer verbatim (no normalization); weights default to 1. When an
    explicit agent roster is given, every rostered agent needs a sheet.
    """
    by_agent = {s.agent_id: s for s in sheets}
    if len(by_agent) != len(sheets):
        raise ValueError("duplicate sheet for an agent")
    if agents is None:
        agents = [Agent(id=s.agent_id) for s in sheets]
    missing = [a.id for a in agents if a.id not in by_agent]
    if missing:
        raise ValueError(f"missing bid sheet for agents: {missing}")
    rows = []
    for a in agents:
        sheet = by_agent[a.id]
        if len(sheet.bids) != len(goods):
            raise ValueError(f"sheet {a.id!r} has {len(sheet.bids)} bids for {len(goods)} goods")
        rows.append(sheet.bids)
    return DivisionProblem(agents=tuple(agents), goods=tuple(goods), utilities=np.array(rows))
