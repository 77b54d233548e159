"""Bundled regression corpus: four fully-worked mediation cases.

Each fixture is a case file in the standard wire format plus an ``expected``
block (reference allocation, prices or metrics, per-field tolerances) and
``annotations`` recording every known quirk of the reference figures, such
as display rounding or values traceable to a stale draft of the tables.
``run_regression`` replays a case through the standard pipeline and diffs
the outcome against the expectations.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Optional

import numpy as np

from .fileformat import CaseDocument, money_from, parse_case
from .pipeline import solve_case_document

CASE_IDS = ("inheritance", "warhol", "divorce", "company-law")

PAYLOAD_KEYS = (
    "procedure", "goods", "agents", "budget", "K", "ranges", "bids", "ratings", "options",
)


class UnknownCase(KeyError):
    pass


@dataclass(frozen=True)
class CaseFixture:
    id: str
    label: str
    document: CaseDocument
    expected: dict
    annotations: dict
    raw: dict

    def payload(self) -> dict:
        return {k: self.raw[k] for k in PAYLOAD_KEYS if k in self.raw}


def _cases_dir():
    return resources.files("fairdiv").joinpath("cases")


def list_cases() -> list[dict]:
    out = []
    for cid in CASE_IDS:
        fx = load_case(cid)
        out.append({"id": fx.id, "label": fx.label, "procedure": fx.document.procedure})
    return out


def load_case(case_id: str) -> CaseFixture:
    if case_id not in CASE_IDS:
        raise UnknownCase(f"unknown case {case_id!r}; known: {list(CASE_IDS)}")
    raw = json.loads(_cases_dir().joinpath(f"{case_id}.json").read_text(encoding="utf-8"))
    return CaseFixture(
        id=raw["case"],
        label=raw.get("label", ""),
        document=parse_case(raw),
        expected=raw.get("expected", {}),
        annotations=raw.get("annotations", {}),
        raw=raw,
    )


@dataclass
class RegressionOutcome:
    case_id: str
    passed: bool
    diffs: list[str] = field(default_factory=list)
    result: Optional[dict] = None
    used_twin: bool = False

    def summary(self) -> str:
        status = "pass" if self.passed else "FAIL"
        extra = " (symmetric twin)" if self.used_twin else ""
        return f"{self.case_id}: {status}{extra}" + (
            "" if self.passed else "\n  " + "\n  ".join(self.diffs)
        )


def _compare_matrix(name, got, want, tol, diffs):
    got = np.asarray(got, float)
    want = np.asarray(want, float)
    if got.shape != want.shape:
        diffs.append(f"{name}: shape {got.shape} != {want.shape}")
        return
    delta = np.abs(got - want)
    if delta.max() > tol:
        i, j = np.unravel_index(int(np.argmax(delta)), delta.shape)
        diffs.append(
            f"{name}[{i}][{j}]: got {got[i, j]!r}, expected {want[i, j]!r} (tol {tol})"
        )


def _compare_vector(name, got, want, tol, diffs, rel=False):
    got = np.asarray(got, float)
    want = np.asarray(want, float)
    scale = np.maximum(np.abs(want), 1.0) if rel else np.ones_like(want)
    delta = np.abs(got - want) / scale
    if delta.max() > tol:
        i = int(np.argmax(delta))
        diffs.append(f"{name}[{i}]: got {got[i]!r}, expected {want[i]!r} (tol {tol})")


def run_regression(case_id: str, tol: float = 1e-9, max_iter: int = 200_000) -> RegressionOutcome:
    """Solve a bundled case and diff the outcome against its expectations."""
    fx = load_case(case_id)
    exp = fx.expected
    result = solve_case_document(fx.document, tol=tol, max_iter=max_iter)
    diffs: list[str] = []
    used_twin = False

    got_alloc = np.array(result["allocation"], float)
    want_alloc = np.array(exp["allocation"], float)
    atol = float(exp.get("allocation_tol", 1e-6))
    candidates = [("allocation", want_alloc)]
    if "allocation_twin" in exp:
        candidates.append(("allocation_twin", np.array(exp["allocation_twin"], float)))
    best_name, best_want = min(
        candidates, key=lambda item: float(np.abs(got_alloc - item[1]).max())
    )
    used_twin = best_name == "allocation_twin"
    _compare_matrix("allocation", got_alloc, best_want, atol, diffs)

    n = len(fx.document.agents)
    if result["split_count"] > n - 1:
        diffs.append(f"split_count {result['split_count']} exceeds {n - 1}")
    if "split_count" in exp and not used_twin:
        if result["split_count"] != exp["split_count"]:
            diffs.append(f"split_count: got {result['split_count']}, expected {exp['split_count']}")

    if "utilities" in exp:
        got_u = [money_from(v) for v in result["utilities"]]
        want_u = [money_from(v) for v in exp["utilities"]]
        _compare_vector("utilities", got_u, want_u, float(exp.get("utilities_tol", 1e-6)), diffs)

    if fx.document.procedure == "nash":
        got_p = [money_from(v) for v in result["prices"]["scaled"]]
        want_p = [money_from(v) for v in exp["scaled_prices"]]
        _compare_vector("scaled_prices", got_p, want_p, float(exp["price_tol"]), diffs)
        total = money_from(result["prices"]["total"])
        want_total = money_from(exp["price_total"])
        if abs(total - want_total) > float(exp["price_total_tol"]):
            diffs.append(f"price total: got {total!r}, expected {want_total!r}")
        if not result["clearing"]["ok"]:
            diffs.append("market clearing certificate failed")

    if fx.document.procedure == "egalitarian":
        if "market_values" in exp:
            got_mu = [money_from(m["market_value"]) for m in result["metrics"]]
            want_mu = [money_from(v) for v in exp["market_values"]]
            order = [1, 0] if used_twin and len(got_mu) == 2 else list(range(len(got_mu)))
            got_mu = [got_mu[i] for i in order]
            if "market_value_tol" in exp:
                _compare_vector("market_values", got_mu, want_mu, float(exp["market_value_tol"]), diffs)
            else:
                _compare_vector(
                    "market_values", got_mu, want_mu,
                    float(exp.get("market_value_rel_tol", 1e-6)), diffs, rel=True,
                )
        if "gains" in exp:
            got_g = [m["gain"] for m in result["metrics"]]
            order = [1, 0] if used_twin and len(got_g) == 2 else list(range(len(got_g)))
            got_g = [got_g[i] for i in order]
            _compare_vector("gains", got_g, exp["gains"], float(exp["gains_tol"]), diffs)
        if "central_ratings" in exp:
            got_c = [m["central_rating"] for m in result["metrics"]]
            _compare_vector(
                "central_ratings", got_c, exp["central_ratings"],
                float(exp["central_ratings_tol"]), diffs,
            )
        if "equality_gap_tol" in exp:
            gap = result["equality"]["max_gap"]
            if gap > float(exp["equality_gap_tol"]):
                diffs.append(f"equality gap {gap!r} above {exp['equality_gap_tol']}")
        if "exact_gains" in exp:
            got_g = [m["gain"] for m in result["metrics"]]
            order = [1, 0] if used_twin and len(got_g) == 2 else list(range(len(got_g)))
            got_g = [got_g[i] for i in order]
            _compare_vector("exact_gains", got_g, exp["exact_gains"], float(exp["exact_tol"]), diffs)
        if "exact_mv_per_weight" in exp:
            got = [money_from(line["mv_per_weight"]) for line in result["audit"]["mv_gain_table"]]
            _compare_vector(
                "exact_mv_per_weight", got, exp["exact_mv_per_weight"],
                max(float(exp["exact_tol"]) * 1e3, 1e-5), diffs,
            )
        if result["audit"].get("ordering_pass") is False:
            diffs.append("market-value/gain inverse ordering failed")

    return RegressionOutcome(
        case_id=case_id,
        passed=not diffs,
        diffs=diffs,
        result=result,
        used_twin=used_twin,
    )


def run_all_regressions(**kwargs) -> list[RegressionOutcome]:
    return [run_regression(cid, **kwargs) for cid in CASE_IDS]
