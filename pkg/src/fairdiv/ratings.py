"""Star-rating calculus for the price-and-rate procedure.

Goods carry agreed market values; each agent grades every good on a 1..5
star scale (3 = neutral). A rating r turns into utility K^(r-3) * m: every
star above or below neutral multiplies or divides the market value by the
appreciation factor K. Ratings are compared across agents after centering
each profile at its own central rating, the level at which the agent's
standardized valuation of the whole asset equals its total market value.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .model import Agent, Allocation, DivisionProblem, Good, ValidationReport, Violation, evaluate

DEFAULT_K = 1.1

RATING_MIN = 1.0
RATING_MAX = 5.0

# Identity checks on the standardization math hold to this relative slack.
IDENTITY_REL_TOL = 1e-9

STAR_MEANINGS = {
    1: "strongly prefers to leave the good",
    2: "mildly prefers to leave the good",
    3: "neutral about the good",
    4: "mildly prefers to take the good",
    5: "strongly prefers to take the good",
}


class TranslationError(ValueError):
    """A rating shift would leave the representable 1..5 band."""


def check_appreciation_factor(K: float) -> float:
    """Clamp-free validation of the per-star multiplier: K in (1, 2]."""
    if not (isinstance(K, (int, float)) and math.isfinite(K)):
        raise ValueError("appreciation factor must be a finite number")
    if not 1.0 < K <= 2.0:
        raise ValueError(f"appreciation factor must lie in (1, 2], got {K}")
    return float(K)


@dataclass(frozen=True)
class RatingSheet:
    """One agent's stars, ordered like the session's goods."""

    agent_id: str
    ratings: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(r) for r in self.ratings)
        for r in vals:
            if not (RATING_MIN <= r <= RATING_MAX):
                raise ValueError(f"rating {r} outside [{RATING_MIN}, {RATING_MAX}]")
        object.__setattr__(self, "ratings", vals)

    def as_array(self) -> np.ndarray:
        return np.array(self.ratings)


def validate_ratings(
    sheet: RatingSheet, goods: Sequence[Good], fractional: bool = False
) -> ValidationReport:
    """Session-level validation: one rating per good, whole stars unless
    the session allows fractions."""
    violations = []
    if len(sheet.ratings) != len(goods):
        violations.append(
            Violation(
                code="dimension",
                message=f"{len(sheet.ratings)} ratings for {len(goods)} goods",
                agent_id=sheet.agent_id,
            )
        )
        return ValidationReport(violations=tuple(violations))
    if not fractional:
        for a, r in enumerate(sheet.ratings):
            if r != int(r):
                violations.append(
                    Violation(
                        code="fractional-rating",
                        message=f"rating {r} on {goods[a].id!r}: whole stars only in this session",
                        agent_id=sheet.agent_id,
                        good_id=goods[a].id,
                    )
                )
    return ValidationReport(violations=tuple(violations))


def rating_to_utility(rating: float, market_value: float, K: float) -> float:
    """K^(rating - 3) * market_value, kept in full double precision."""
    return math.exp((rating - 3.0) * math.log(K)) * market_value


def ratings_to_utilities(
    sheets: Sequence[RatingSheet],
    goods: Sequence[Good],
    K: float = DEFAULT_K,
    agents: Optional[Sequence[Agent]] = None,
) -> DivisionProblem:
    """Division problem with u[i, a] = K^(r[i, a] - 3) * market value of a.

    Utilities are never rounded before solving; the printed tables a
    mediator sees are display-rounded copies of these exact values.
    """
    K = check_appreciation_factor(K)
    by_agent = {s.agent_id: s for s in sheets}
    if len(by_agent) != len(sheets):
        raise ValueError("duplicate rating sheet for an agent")
    if agents is None:
        agents = [Agent(id=s.agent_id) for s in sheets]
    missing = [a.id for a in agents if a.id not in by_agent]
    if missing:
        raise ValueError(f"missing rating sheet for agents: {missing}")
    m = np.array([g.market_value if g.market_value is not None else np.nan for g in goods])
    if np.any(~np.isfinite(m)):
        bad = [g.id for g in goods if g.market_value is None]
        raise ValueError(f"goods without market value cannot be rated into utilities: {bad}")
    if np.any(m <= 0):
        bad = [g.id for g, mv in zip(goods, m) if mv <= 0]
        raise ValueError(f"market values must be positive for rating sessions: {bad}")
    lnK = math.log(K)
    rows = []
    for agent in agents:
        sheet = by_agent[agent.id]
        if len(sheet.ratings) != len(goods):
            raise ValueError(f"sheet {agent.id!r} rates {len(sheet.ratings)} of {len(goods)} goods")
        r = sheet.as_array()
        rows.append(np.exp((r - 3.0) * lnK) * m)
    return DivisionProblem(agents=tuple(agents), goods=tuple(goods), utilities=np.array(rows))


def central_rating(ratings: Sequence[float], market_values: Sequence[float], K: float = DEFAULT_K) -> float:
    """The rating level at which standardized valuations sum to market value.

    Computed in closed form as [ln(sum K^r * m) - ln(sum m)] / ln K, which
    makes sum_a K^(r_a - central) * m_a == sum_a m_a an exact identity.
    """
    K = check_appreciation_factor(K)
    r = np.asarray(ratings, dtype=float)
    m = np.asarray(market_values, dtype=float)
    total = m.sum()
    if total <= 0:
        raise ArithmeticError("total market value must be positive")
    lnK = math.log(K)
    weighted = float((np.exp(r * lnK) * m).sum())
    return (math.log(weighted) - math.log(total)) / lnK


def translate_ratings(sheet: RatingSheet, delta: float) -> RatingSheet:
    """Shift every rating by delta stars; forbidden when any value would
    leave [1, 5] (no silent clipping)."""
    shifted = tuple(r + delta for r in sheet.ratings)
    for r in shifted:
        if not (RATING_MIN <= r <= RATING_MAX):
            raise TranslationError(
                f"translating by {delta} pushes a rating to {r}, outside [1, 5]"
            )
    return replace(sheet, ratings=shifted)


@dataclass(frozen=True)
class BundleMetrics:
    """Per-agent diagnostics of a bundle under the rating calculus.

    gain is None when the bundle has zero market value (the log-scale gain
    over the central rating is undefined there).
    """

    agent_id: str
    market_value: float
    avg_standardized_utility: Optional[float]
    gain: Optional[float]
    central_rating: float


def bundle_metrics(
    sheets: Sequence[RatingSheet],
    goods: Sequence[Good],
    K: float,
    alloc: Allocation,
    agents: Optional[Sequence[Agent]] = None,
) -> list[BundleMetrics]:
    """Market value, average standardized utility and gain per bundle.

    For agent i with central rating c: market value is sum_a m_a z[i, a],
    the average standardized utility is sum_a K^(r-c) m z / market value,
    and the gain is its log base K. The identity
    (normalized utility) == (avg standardized utility) * (market value) / (total market value)
    is verified on every call; a violation means corrupted inputs.
    """
    K = check_appreciation_factor(K)
    problem = ratings_to_utilities(sheets, goods, K, agents=agents)
    m = problem.market_values()
    total_m = m.sum()
    profile = evaluate(problem, alloc)
    lnK = math.log(K)
    by_agent = {s.agent_id: s for s in sheets}
    out = []
    for i, agent in enumerate(problem.agents):
        sheet = by_agent[agent.id]
        r = sheet.as_array()
        rho = central_rating(r, m, K)
        z = alloc.shares[i]
        mu = float((m * z).sum())
        if mu <= 0:
            out.append(BundleMetrics(agent.id, mu, None, None, rho))
            continue
        standardized = float((np.exp((r - rho) * lnK) * m * z).sum())
        ubar = standardized / mu
        gain = math.log(ubar) / lnK
        relation = ubar * mu / total_m
        if abs(relation - profile.normalized[i]) > IDENTITY_REL_TOL * max(
            1.0, abs(profile.normalized[i])
        ):
            raise ArithmeticError(
                f"standardization identity violated for agent {agent.id!r}: "
                f"{relation!r} vs {profile.normalized[i]!r}"
            )
        out.append(BundleMetrics(agent.id, mu, ubar, gain, rho))
    return out
