"""Session-based mediation service over HTTP.

A session walks setup -> collecting -> solved, never backward. The mediator
creates it with the goods, budget or market values and the roster; each
agent submits one private sheet using a capability token; the solve step
runs the session's designated solver and freezes the result. Reports are
filtered by role: the mediator sees everything, an agent only ever sees
their own inputs, their own valuation row and their own diagnostics.

Persistence is an append-only event log, one JSON-lines file per session,
with the solve result embedded as a snapshot. Replaying the log reproduces
the state; deterministic solvers make a re-solve byte-identical.
"""
from __future__ import annotations

import json
import os
import secrets
import threading
import uuid
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional

from fastapi import Body, FastAPI, HTTPException, Query

from .bids import BidSheet, ScalingError, scale_bids_to_budget, validate_bids
from .cases import CASE_IDS, UnknownCase, list_cases, load_case
from .fileformat import (
    CaseDocument,
    CaseOptions,
    FormatError,
    canonical_dumps,
    money_from,
    money_str,
    parse_case,
)
from .model import ValidationReport
from .ratings import RatingSheet, check_appreciation_factor, validate_ratings
from .pipeline import solve_case_document

STATES = ("setup", "collecting", "solved")


class ServiceError(Exception):
    def __init__(self, status: int, message: str, payload: Optional[dict] = None):
        super().__init__(message)
        self.status = status
        self.message = message
        self.payload = payload or {}


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _report_dict(report: ValidationReport) -> dict:
    def line(v):
        return {
            "code": v.code,
            "message": v.message,
            "agent_id": v.agent_id,
            "good_id": v.good_id,
        }

    return {
        "ok": report.ok,
        "violations": [line(v) for v in report.violations],
        "warnings": [line(v) for v in report.warnings],
    }


@dataclass
class SessionState:
    session_id: str
    config: CaseDocument
    raw_config: dict
    mediator_token: str
    agent_tokens: dict[str, str]
    state: str = "setup"
    submissions: dict[str, dict] = field(default_factory=dict)
    result: Optional[dict] = None
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def role_of(self, token: str) -> tuple[str, Optional[str]]:
        if token == self.mediator_token:
            return "mediator", None
        for agent_id, t in self.agent_tokens.items():
            if token == t:
                return "agent", agent_id
        raise ServiceError(403, "unknown token for this session")


class SessionStore:
    """File-backed session registry; one append-only event log per session."""

    def __init__(self, data_dir: str | os.PathLike):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._sessions: dict[str, SessionState] = {}
        self._registry_lock = threading.Lock()
        for log in sorted(self.data_dir.glob("*.jsonl")):
            state = self._replay(log)
            self._sessions[state.session_id] = state

    # -- persistence ------------------------------------------------------

    def _log_path(self, session_id: str) -> Path:
        return self.data_dir / f"{session_id}.jsonl"

    def _append(self, session_id: str, event: dict) -> None:
        with open(self._log_path(session_id), "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def _replay(self, path: Path) -> SessionState:
        state: Optional[SessionState] = None
        with open(path, "r", encoding="utf-8") as fh:
            for raw in fh:
                raw = raw.strip()
                if not raw:
                    continue
                event = json.loads(raw)
                kind = event["event"]
                if kind == "created":
                    state = SessionState(
                        session_id=event["session_id"],
                        config=parse_case(event["config"], require_sheets=False),
                        raw_config=event["config"],
                        mediator_token=event["mediator_token"],
                        agent_tokens=dict(event["agent_tokens"]),
                    )
                elif state is None:
                    raise RuntimeError(f"corrupt log {path}: event before creation")
                elif kind == "opened":
                    state.state = "collecting"
                elif kind == "submitted":
                    state.submissions[event["agent_id"]] = {
                        "sheet": event["sheet"],
                        "received_at": event["at"],
                        "scaled": event.get("scaled", False),
                    }
                elif kind == "solved":
                    state.result = event["result"]
                    state.state = "solved"
                else:
                    raise RuntimeError(f"corrupt log {path}: unknown event {kind!r}")
        if state is None:
            raise RuntimeError(f"corrupt log {path}: empty")
        return state

    # -- session lifecycle --------------------------------------------------

    def create(self, config: dict) -> dict:
        if isinstance(config.get("budget"), dict):
            raise ServiceError(
                422,
                "per-agent budgets are not supported; use a common budget and "
                "entitlement weights instead",
            )
        try:
            doc = parse_case(config, require_sheets=False)
        except FormatError as exc:
            raise ServiceError(422, str(exc)) from exc
        if doc.bids is not None or doc.ratings is not None:
            raise ServiceError(422, "sessions collect sheets via submissions, not at creation")
        if doc.procedure == "nash":
            if doc.budget is None or doc.budget <= 0:
                raise ServiceError(422, "fix-your-own-price sessions need a positive budget")
        else:
            try:
                check_appreciation_factor(doc.K if doc.K is not None else 1.1)
            except ValueError as exc:
                raise ServiceError(422, str(exc)) from exc
            missing = [g.id for g in doc.goods if g.market_value is None or g.market_value <= 0]
            if missing:
                raise ServiceError(
                    422, f"price-and-rate sessions need positive market values; missing: {missing}"
                )
        session_id = uuid.uuid4().hex[:12]
        state = SessionState(
            session_id=session_id,
            config=doc,
            raw_config=config,
            mediator_token=secrets.token_urlsafe(16),
            agent_tokens={a.id: secrets.token_urlsafe(16) for a in doc.agents},
        )
        with self._registry_lock:
            self._sessions[session_id] = state
        self._append(
            session_id,
            {
                "event": "created",
                "at": _now(),
                "session_id": session_id,
                "config": config,
                "mediator_token": state.mediator_token,
                "agent_tokens": state.agent_tokens,
            },
        )
        return {
            "session_id": session_id,
            "state": state.state,
            "mediator_token": state.mediator_token,
            "agent_tokens": dict(state.agent_tokens),
        }

    def get(self, session_id: str) -> SessionState:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise ServiceError(404, f"no session {session_id!r}") from None

    def open(self, session_id: str, token: str) -> dict:
        state = self.get(session_id)
        with state.lock:
            role, _ = state.role_of(token)
            if role != "mediator":
                raise ServiceError(403, "only the mediator opens a session")
            if state.state != "setup":
                raise ServiceError(409, f"session is {state.state}, not setup")
            state.state = "collecting"
            self._append(session_id, {"event": "opened", "at": _now()})
        return {"session_id": session_id, "state": state.state}

    def submit(self, session_id: str, token: str, body: dict) -> dict:
        state = self.get(session_id)
        with state.lock:
            role, agent_id = state.role_of(token)
            if role != "agent":
                raise ServiceError(403, "submissions carry an agent token")
            if state.state != "collecting":
                raise ServiceError(409, f"session is {state.state}, not collecting")
            if agent_id in state.submissions:
                raise ServiceError(409, f"agent {agent_id!r} already submitted")
            doc = state.config
            order = doc.good_ids()
            scaled = False
            if doc.procedure == "nash":
                raw = body.get("bids")
                if not isinstance(raw, dict):
                    raise ServiceError(422, "bid sessions require a 'bids' map")
                missing = [g for g in order if g not in raw]
                if missing:
                    raise ServiceError(422, f"missing bids for goods: {missing}")
                try:
                    sheet = BidSheet(
                        agent_id=agent_id,
                        bids=tuple(money_from(raw[g], f"bid {g}") for g in order),
                        budget=doc.budget,
                    )
                except (FormatError, ValueError) as exc:
                    raise ServiceError(422, str(exc)) from exc
                if body.get("scale_to_budget"):
                    try:
                        new_sheet = scale_bids_to_budget(sheet, doc.budget)
                        scaled = new_sheet is not sheet
                        sheet = new_sheet
                    except ScalingError as exc:
                        raise ServiceError(422, str(exc)) from exc
                report = validate_bids(sheet, doc.range_list(), doc.budget, goods=doc.goods)
                if not report.ok:
                    return {"accepted": False, "report": _report_dict(report)}
                stored = {"bids": {g: money_str(b) for g, b in zip(order, sheet.bids)}}
            else:
                raw = body.get("ratings")
                if not isinstance(raw, dict):
                    raise ServiceError(422, "rating sessions require a 'ratings' map")
                missing = [g for g in order if g not in raw]
                if missing:
                    raise ServiceError(422, f"missing ratings for goods: {missing}")
                try:
                    sheet = RatingSheet(
                        agent_id=agent_id, ratings=tuple(float(raw[g]) for g in order)
                    )
                except (TypeError, ValueError) as exc:
                    raise ServiceError(422, str(exc)) from exc
                report = validate_ratings(
                    sheet, doc.goods, fractional=doc.options.fractional_ratings
                )
                if not report.ok:
                    return {"accepted": False, "report": _report_dict(report)}
                stored = {"ratings": {g: r for g, r in zip(order, sheet.ratings)}}
            received_at = _now()
            state.submissions[agent_id] = {
                "sheet": stored,
                "received_at": received_at,
                "scaled": scaled,
            }
            self._append(
                session_id,
                {
                    "event": "submitted",
                    "at": received_at,
                    "agent_id": agent_id,
                    "sheet": stored,
                    "scaled": scaled,
                },
            )
            report_doc = _report_dict(report)
            return {"accepted": True, "scaled": scaled, "report": report_doc}

    def _document_with_sheets(self, state: SessionState) -> CaseDocument:
        doc = state.config
        if doc.procedure == "nash":
            bids = {
                aid: {g: money_from(v) for g, v in sub["sheet"]["bids"].items()}
                for aid, sub in state.submissions.items()
            }
            return replace(doc, bids=bids)
        ratings = {
            aid: dict(sub["sheet"]["ratings"]) for aid, sub in state.submissions.items()
        }
        return replace(doc, ratings=ratings)

    def solve(self, session_id: str, token: str) -> dict:
        state = self.get(session_id)
        with state.lock:
            role, _ = state.role_of(token)
            if role != "mediator":
                raise ServiceError(403, "only the mediator triggers a solve")
            if state.state == "solved":
                raise ServiceError(409, "session already solved")
            if state.state != "collecting":
                raise ServiceError(409, f"session is {state.state}, not collecting")
            missing = [a.id for a in state.config.agents if a.id not in state.submissions]
            if missing:
                raise ServiceError(409, f"missing submissions from agents: {missing}")
            doc = self._document_with_sheets(state)
            try:
                result = solve_case_document(doc)
            except Exception as exc:
                raise ServiceError(500, f"solver failure: {exc}") from exc
            state.result = result
            state.state = "solved"
            self._append(session_id, {"event": "solved", "at": _now(), "result": result})
            return {
                "session_id": session_id,
                "state": state.state,
                "summary": {
                    "procedure": result["procedure"],
                    "split_count": result["split_count"],
                    "utilities": result["utilities"],
                },
            }

    def resolve_again(self, session_id: str) -> dict:
        """Recompute the stored result from persisted inputs (no mutation)."""
        state = self.get(session_id)
        if state.state != "solved":
            raise ServiceError(409, "session is not solved")
        return solve_case_document(self._document_with_sheets(state))

    # -- views --------------------------------------------------------------

    def status_view(self, session_id: str, token: str) -> dict:
        state = self.get(session_id)
        role, agent_id = state.role_of(token)
        doc = state.config
        base = {
            "session_id": session_id,
            "state": state.state,
            "procedure": doc.procedure,
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
                for g in doc.goods
            ],
        }
        if doc.budget is not None:
            base["budget"] = money_str(doc.budget)
        if doc.K is not None:
            base["K"] = doc.K
        if role == "mediator":
            base["roster"] = [
                {
                    "agent_id": a.id,
                    "label": a.label,
                    "weight": str(a.weight),
                    "submitted": a.id in state.submissions,
                    "received_at": state.submissions.get(a.id, {}).get("received_at"),
                    "scaled": state.submissions.get(a.id, {}).get("scaled", False),
                }
                for a in doc.agents
            ]
            if doc.ranges is not None:
                base["ranges"] = {
                    gid: {
                        "lower": money_str(r.lower),
                        "upper": None if r.upper is None else money_str(r.upper),
                    }
                    for gid, r in doc.ranges.items()
                }
            base["options"] = doc.options.to_dict()
        else:
            base["agent_id"] = agent_id
            base["submitted"] = agent_id in state.submissions
            base["fractional_ratings"] = doc.options.fractional_ratings
            if doc.options.disclose_ranges and doc.ranges is not None:
                base["ranges"] = {
                    gid: {
                        "lower": money_str(r.lower),
                        "upper": None if r.upper is None else money_str(r.upper),
                    }
                    for gid, r in doc.ranges.items()
                }
        return base

    def report_view(self, session_id: str, token: str) -> dict:
        state = self.get(session_id)
        role, agent_id = state.role_of(token)
        if role == "mediator":
            view = self.status_view(session_id, token)
            view["submissions"] = {
                aid: sub["sheet"] for aid, sub in state.submissions.items()
            }
            if state.result is not None:
                view["result"] = state.result
            return view
        # Agents: pending marker before solve, own slice after.
        if state.state != "solved":
            return {
                "session_id": session_id,
                "state": state.state,
                "agent_id": agent_id,
                "submitted": agent_id in state.submissions,
                "status": "pending",
            }
        return self._agent_result_view(state, agent_id)

    def _agent_result_view(self, state: SessionState, agent_id: str) -> dict:
        result = state.result
        doc = state.config
        idx = result["agent_ids"].index(agent_id)
        good_ids = result["good_ids"]
        view: dict[str, Any] = {
            "session_id": state.session_id,
            "state": state.state,
            "agent_id": agent_id,
            "procedure": result["procedure"],
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
                for g in doc.goods
            ],
            "your_submission": state.submissions[agent_id]["sheet"],
            "allocation": result["allocation"],
            "agent_ids": result["agent_ids"],
            "good_ids": good_ids,
            "your_bundle": {
                g: share
                for g, share in zip(good_ids, result["allocation"][idx])
                if share > 0
            },
            "your_utility": result["utilities"][idx],
            "your_normalized_utility": result["normalized_utilities"][idx],
            # The agent's own valuation of every bundle: their envy row. Other
            # agents' rows and diagonals stay server-side.
            "your_valuations_of_bundles": {
                other: result["audit"]["envy_matrix"][idx][j]
                for j, other in enumerate(result["agent_ids"])
            },
            "split_count": result["split_count"],
        }
        if "prices" in result:
            view["prices"] = result["prices"]
        if "purchases" in result:
            for plan in result["purchases"]:
                if plan["agent_id"] == agent_id:
                    view["your_purchase_plan"] = plan
        if "metrics" in result:
            for line in result["metrics"]:
                if line["agent_id"] == agent_id:
                    view["your_metrics"] = line
        return view


def create_app(data_dir: Optional[str] = None) -> FastAPI:
    """Build the HTTP app; the store lives for the app's lifetime."""
    data_dir = data_dir or os.environ.get("FAIRDIV_DATA_DIR", "data")
    store = SessionStore(data_dir)
    app = FastAPI(title="fairdiv mediation service", version="1.0")
    app.state.store = store

    def guard(fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ServiceError as exc:
            raise HTTPException(status_code=exc.status, detail=exc.message)

    @app.post("/v1/sessions")
    def create_session(config: dict = Body(...)):
        return guard(store.create, config)

    @app.post("/v1/sessions/{session_id}/open")
    def open_session(session_id: str, body: dict = Body(...)):
        return guard(store.open, session_id, body.get("token", ""))

    @app.get("/v1/sessions/{session_id}")
    def session_status(session_id: str, as_token: str = Query(alias="as")):
        return guard(store.status_view, session_id, as_token)

    @app.post("/v1/sessions/{session_id}/submissions")
    def submit(session_id: str, body: dict = Body(...)):
        return guard(store.submit, session_id, body.get("token", ""), body)

    @app.post("/v1/sessions/{session_id}/solve")
    def solve(session_id: str, body: dict = Body(...)):
        return guard(store.solve, session_id, body.get("token", ""))

    @app.get("/v1/sessions/{session_id}/report")
    def report(session_id: str, as_token: str = Query(alias="as")):
        return guard(store.report_view, session_id, as_token)

    @app.get("/v1/cases")
    def cases():
        return {"cases": list_cases()}

    @app.get("/v1/cases/{case_id}")
    def case_detail(case_id: str):
        try:
            fx = load_case(case_id)
        except UnknownCase as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return {"id": fx.id, "label": fx.label, "payload": fx.payload()}

    @app.post("/v1/solve-adhoc")
    def solve_adhoc(payload: dict = Body(...)):
        try:
            doc = parse_case(payload)
            return solve_case_document(doc)
        except (FormatError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    return app
