"""Case and result documents: the JSON wire format shared by CLI and service.

Money travels as decimal strings so files never accumulate float drift;
shares and other dimensionless quantities are plain JSON numbers. Documents
dump canonically (sorted keys, two-space indent, trailing newline), so
loading and re-dumping a canonical file is byte-identical.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import Any, Optional

import numpy as np

from .bids import BidRange, BidSheet, bids_to_utilities
from .model import Agent, DivisionProblem, Good
from .ratings import DEFAULT_K, RatingSheet, ratings_to_utilities

PROCEDURES = ("nash", "egalitarian")


class FormatError(ValueError):
    """A document does not follow the case/result schema."""


def money_from(value: Any, label: str = "amount") -> float:
    """Parse a money amount; decimal strings preferred, numbers accepted."""
    if isinstance(value, str):
        try:
            return float(Decimal(value))
        except InvalidOperation as exc:
            raise FormatError(f"{label}: not a decimal string: {value!r}") from exc
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    raise FormatError(f"{label}: expected money amount, got {value!r}")


def money_str(x: float) -> str:
    """Canonical decimal string: integers collapse, fractions keep full precision."""
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def weight_from(value: Any) -> Fraction:
    if value is None:
        return Fraction(1)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(str(value))
    raise FormatError(f"weight: expected number or fraction string, got {value!r}")


def weight_str(w: Fraction) -> str:
    return str(w)


def canonical_dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


@dataclass(frozen=True)
class CaseOptions:
    fractional_ratings: bool = False
    disclose_ranges: bool = False

    def to_dict(self) -> dict:
        return {
            "disclose_ranges": self.disclose_ranges,
            "fractional_ratings": self.fractional_ratings,
        }


@dataclass(frozen=True)
class CaseDocument:
    """A complete, self-contained division case."""

    procedure: str
    goods: tuple[Good, ...]
    agents: tuple[Agent, ...]
    budget: Optional[float] = None
    K: Optional[float] = None
    ranges: Optional[dict[str, BidRange]] = None
    bids: Optional[dict[str, dict[str, float]]] = None
    ratings: Optional[dict[str, dict[str, float]]] = None
    options: CaseOptions = field(default_factory=CaseOptions)

    def good_ids(self) -> list[str]:
        return [g.id for g in self.goods]

    def agent_ids(self) -> list[str]:
        return [a.id for a in self.agents]

    def bid_sheets(self) -> list[BidSheet]:
        if self.bids is None:
            raise FormatError("case has no bids")
        if self.budget is None:
            raise FormatError("bid cases need a budget")
        order = self.good_ids()
        sheets = []
        for agent in self.agents:
            row = self.bids.get(agent.id)
            if row is None:
                raise FormatError(f"no bids for agent {agent.id!r}")
            missing = [g for g in order if g not in row]
            if missing:
                raise FormatError(f"agent {agent.id!r} missing bids for {missing}")
            sheets.append(
                BidSheet(agent_id=agent.id, bids=tuple(row[g] for g in order), budget=self.budget)
            )
        return sheets

    def rating_sheets(self) -> list[RatingSheet]:
        if self.ratings is None:
            raise FormatError("case has no ratings")
        order = self.good_ids()
        sheets = []
        for agent in self.agents:
            row = self.ratings.get(agent.id)
            if row is None:
                raise FormatError(f"no ratings for agent {agent.id!r}")
            missing = [g for g in order if g not in row]
            if missing:
                raise FormatError(f"agent {agent.id!r} missing ratings for {missing}")
            sheets.append(RatingSheet(agent_id=agent.id, ratings=tuple(row[g] for g in order)))
        return sheets

    def range_list(self) -> list[Optional[BidRange]]:
        if self.ranges is None:
            return [None] * len(self.goods)
        return [self.ranges.get(g.id) for g in self.goods]

    def problem(self) -> DivisionProblem:
        if self.bids is not None:
            return bids_to_utilities(self.bid_sheets(), self.goods, agents=self.agents)
        if self.ratings is not None:
            return ratings_to_utilities(
                self.rating_sheets(), self.goods, self.K or DEFAULT_K, agents=self.agents
            )
        raise FormatError("case carries neither bids nor ratings")

    def to_dict(self) -> dict:
        doc: dict[str, Any] = {
            "procedure": self.procedure,
            "goods": [
                {
                    "id": g.id,
                    "label": g.label,
                    **(
                        {"market_value": money_str(g.market_value)}
                        if g.market_value is not None
                        else {}
                    ),
                }
                for g in self.goods
            ],
            "agents": [
                {"id": a.id, "label": a.label, "weight": weight_str(a.weight)}
                for a in self.agents
            ],
            "options": self.options.to_dict(),
        }
        if self.budget is not None:
            doc["budget"] = money_str(self.budget)
        if self.K is not None:
            doc["K"] = self.K
        if self.ranges is not None:
            doc["ranges"] = {
                gid: {
                    "lower": money_str(r.lower),
                    "upper": None if r.upper is None else money_str(r.upper),
                }
                for gid, r in self.ranges.items()
            }
        if self.bids is not None:
            doc["bids"] = {
                aid: {gid: money_str(v) for gid, v in row.items()}
                for aid, row in self.bids.items()
            }
        if self.ratings is not None:
            doc["ratings"] = {
                aid: {
                    gid: int(v) if float(v).is_integer() else float(v)
                    for gid, v in row.items()
                }
                for aid, row in self.ratings.items()
            }
        return doc


def parse_case(doc: dict, require_sheets: bool = True) -> CaseDocument:
    """Parse a case document; with ``require_sheets=False`` the bids/ratings
    may be absent (session configs collect them through submissions)."""
    if not isinstance(doc, dict):
        raise FormatError("case document must be a JSON object")
    procedure = doc.get("procedure")
    if procedure not in PROCEDURES:
        raise FormatError(f"procedure must be one of {PROCEDURES}, got {procedure!r}")
    raw_goods = doc.get("goods")
    if not raw_goods:
        raise FormatError("case needs at least one good")
    goods = []
    for g in raw_goods:
        mv = g.get("market_value")
        goods.append(
            Good(
                id=str(g["id"]),
                label=str(g.get("label", "")),
                market_value=None if mv is None else money_from(mv, f"good {g['id']}"),
            )
        )
    raw_agents = doc.get("agents")
    if not raw_agents:
        raise FormatError("case needs at least one agent")
    agents = [
        Agent(id=str(a["id"]), label=str(a.get("label", "")), weight=weight_from(a.get("weight")))
        for a in raw_agents
    ]
    opts = doc.get("options") or {}
    options = CaseOptions(
        fractional_ratings=bool(opts.get("fractional_ratings", False)),
        disclose_ranges=bool(opts.get("disclose_ranges", False)),
    )
    budget = doc.get("budget")
    ranges = None
    if doc.get("ranges") is not None:
        ranges = {}
        for gid, r in doc["ranges"].items():
            upper = r.get("upper")
            ranges[str(gid)] = BidRange(
                lower=money_from(r["lower"], f"range {gid} lower"),
                upper=None if upper is None else money_from(upper, f"range {gid} upper"),
            )
    bids = None
    if doc.get("bids") is not None:
        bids = {
            str(aid): {str(gid): money_from(v, f"bid {aid}/{gid}") for gid, v in row.items()}
            for aid, row in doc["bids"].items()
        }
    ratings = None
    if doc.get("ratings") is not None:
        ratings = {
            str(aid): {str(gid): float(v) for gid, v in row.items()}
            for aid, row in doc["ratings"].items()
        }
    if bids is not None and ratings is not None:
        raise FormatError("case must carry at most one of bids/ratings")
    if require_sheets and bids is None and ratings is None:
        raise FormatError("case must carry exactly one of bids/ratings")
    K = doc.get("K")
    return CaseDocument(
        procedure=procedure,
        goods=tuple(goods),
        agents=tuple(agents),
        budget=None if budget is None else money_from(budget, "budget"),
        K=None if K is None else float(K),
        ranges=ranges,
        bids=bids,
        ratings=ratings,
        options=options,
    )


def load_case_file(path) -> CaseDocument:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_case(json.load(fh))


def allocation_to_lists(shares: np.ndarray) -> list[list[float]]:
    return [[float(v) for v in row] for row in shares]
