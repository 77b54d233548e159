"""Batch command-line interface.

Commands: solve a case file, audit an allocation against a case, print an
agent's posted-price discount table, emit the two-agent utility frontier,
and run the bundled regression corpus. Files use the same JSON schema as
the HTTP service; tables print with fixed decimal points and column order,
so identical inputs produce byte-identical output.

Exit codes: 0 success, 2 validation or structural failure, 3 solver
non-convergence.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .audit import RatingContext, audit
from .cases import CASE_IDS, UnknownCase, run_regression
from .fileformat import (
    FormatError,
    canonical_dumps,
    load_case_file,
    money_from,
    money_str,
)
from .model import Allocation, InfeasibleAllocation, DimensionMismatch
from .nash import ConvergenceError, PriceVector, purchase_explanation
from .pipeline import audit_to_dict, frontier_to_dict, purchases_to_dict, solve_case_document

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NO_CONVERGENCE = 3


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _write(path: Path, doc: dict) -> None:
    path.write_text(canonical_dumps(doc), encoding="utf-8")


def _table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(headers)]
    out = ["  ".join(h.rjust(widths[i]) for i, h in enumerate(headers))]
    for r in rows:
        out.append("  ".join(c.rjust(widths[i]) for i, c in enumerate(r)))
    return "\n".join(out)


def _money(x: float) -> str:
    return f"{x:.2f}"


def _share(x: float) -> str:
    return f"{x:.4f}"


def _print_result_tables(result: dict) -> None:
    agent_ids = result["agent_ids"]
    good_ids = result["good_ids"]
    print("Allocation (share of each good per agent)")
    rows = [
        [aid] + [_share(v) for v in row]
        for aid, row in zip(agent_ids, result["allocation"])
    ]
    print(_table(["agent"] + good_ids, rows))
    print()
    rows = [
        [aid, _money(money_from(u)), f"{nu:.6f}"]
        for aid, u, nu in zip(agent_ids, result["utilities"], result["normalized_utilities"])
    ]
    print(_table(["agent", "utility", "normalized"], rows))
    print(f"\nsplit goods: {result['split_count']}")
    if "prices" in result:
        p = result["prices"]
        print("\nEquilibrium prices (posted)")
        print(_table(
            ["good"] + good_ids + ["total"],
            [["price"] + [_money(money_from(v)) for v in p["scaled"]] + [_money(money_from(p["total"]))]],
        ))
        print(f"per-agent budget: {p['per_agent_budget']}")
    if "metrics" in result:
        print("\nBundle metrics")
        rows = [
            [
                m["agent_id"],
                _money(money_from(m["market_value"])),
                f"{m['gain']:+.4f}" if m["gain"] is not None else "undefined",
                f"{m['central_rating']:.4f}",
            ]
            for m in result["metrics"]
        ]
        print(_table(["agent", "market value", "gain", "central rating"], rows))
    if "equality" in result:
        eq = result["equality"]
        word = "equalized" if eq["equalized"] else ("max-min only" if eq["downgraded"] else "UNEQUAL")
        print(f"\nnormalized utilities: {word} (max gap {eq['max_gap']:.3e})")
    a = result["audit"]
    print(
        f"audit: envy {'pass' if a['envy_pass'] else 'FAIL'}, "
        f"fair share {'pass' if a['fair_share_pass'] else 'FAIL'}, "
        f"efficient {'yes' if a['efficient'] else 'NO'}"
    )


def cmd_solve(args) -> int:
    try:
        case = load_case_file(args.case)
    except (OSError, json.JSONDecodeError, FormatError, ValueError) as exc:
        return _fail(str(exc), EXIT_VALIDATION)
    try:
        result = solve_case_document(
            case,
            tol=args.tol,
            max_iter=args.max_iter,
            procedure_override=args.procedure,
        )
    except ConvergenceError as exc:
        return _fail(f"solver did not converge: {exc}", EXIT_NO_CONVERGENCE)
    except (FormatError, ValueError) as exc:
        return _fail(str(exc), EXIT_VALIDATION)
    out = Path(args.out) if args.out else Path(args.case).with_suffix(".result.json")
    _write(out, result)
    if args.format == "json":
        print(canonical_dumps(result), end="")
    else:
        if result.get("procedure_overridden"):
            print(f"note: procedure override -> {result['procedure']} "
                  "(not the default pairing for this case's sheets)")
        _print_result_tables(result)
        print(f"\nresult written to {out}")
    return EXIT_OK


def _load_allocation(path: str) -> tuple[Allocation, dict]:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if "allocation" not in doc:
        raise FormatError("allocation file needs an 'allocation' matrix")
    return Allocation(shares=np.array(doc["allocation"], dtype=float)), doc


def cmd_audit(args) -> int:
    try:
        case = load_case_file(args.case)
        alloc, _ = _load_allocation(args.allocation)
        problem = case.problem()
        context = None
        if case.ratings is not None:
            context = RatingContext(sheets=tuple(case.rating_sheets()), K=case.K or 1.1)
        report = audit(problem, alloc, rating_context=context)
    except (OSError, json.JSONDecodeError, FormatError, ValueError,
            InfeasibleAllocation, DimensionMismatch) as exc:
        return _fail(str(exc), EXIT_VALIDATION)
    doc = audit_to_dict(report, case.agent_ids())
    out = Path(args.out) if args.out else Path(args.allocation).with_suffix(".audit.json")
    _write(out, doc)
    if args.format == "json":
        print(canonical_dumps(doc), end="")
    else:
        agent_ids = case.agent_ids()
        print("Envy matrix (rows: valuations, columns: bundles)")
        rows = [
            [aid] + [_money(v) for v in row]
            for aid, row in zip(agent_ids, report.envy_matrix)
        ]
        print(_table(["agent"] + agent_ids, rows))
        print(f"\nenvy: {'pass' if report.envy_pass else 'FAIL'}")
        if report.envy_worst:
            print(f"  worst: {report.envy_worst[0]} envies {report.envy_worst[1]} "
                  f"by {report.envy_worst[2]:.4f}")
        print(f"fair share: {'pass' if report.fair_share_pass else 'FAIL'}")
        print(f"efficient: {'yes' if report.efficient else 'NO'}")
        if report.mv_gain_table is not None:
            print("\nMarket value vs gain")
            rows = [
                [
                    line.agent_id,
                    _money(line.market_value),
                    _money(line.mv_per_weight),
                    f"{line.gain:+.5f}" if line.gain is not None else "undefined",
                ]
                for line in report.mv_gain_table
            ]
            print(_table(["agent", "mkt value", "mv/weight", "gain"], rows))
            print(f"inverse ordering: {'pass' if report.ordering_pass else 'FAIL'}")
        print(f"split goods: {report.split_count}")
        print(f"\nreport written to {out}")
    return EXIT_OK


def cmd_explain(args) -> int:
    try:
        case = load_case_file(args.case)
        with open(args.result, "r", encoding="utf-8") as fh:
            result = json.load(fh)
        if result.get("procedure") != "nash" or "prices" not in result:
            return _fail("discount tables need a competitive (nash) result with prices",
                         EXIT_VALIDATION)
        problem = case.problem()
        p = result["prices"]
        scaled = np.array([money_from(v) for v in p["scaled"]])
        budget = money_from(p["budget"])
        prices = PriceVector(
            good_ids=tuple(p["good_ids"]),
            unit_prices=scaled * (problem.n / budget),
            scaled_prices=scaled,
            per_agent_budget=money_from(p["per_agent_budget"]),
            budget=budget,
        )
        explanation = purchase_explanation(problem, prices)
    except (OSError, json.JSONDecodeError, FormatError, ValueError, KeyError) as exc:
        return _fail(str(exc), EXIT_VALIDATION)
    plans = explanation.plans
    if args.agent:
        try:
            plans = (explanation.plan_for(args.agent),)
        except KeyError as exc:
            return _fail(str(exc), EXIT_VALIDATION)
    doc = {"plans": purchases_to_dict(explanation)}
    if args.out:
        _write(Path(args.out), doc)
    if args.format == "json":
        print(canonical_dumps(doc), end="")
        return EXIT_OK
    for plan in plans:
        print(f"Agent {plan.agent_id} (budget {money_str(plan.budget)})")
        rows = []
        for line in plan.lines:
            rows.append([
                line.good_id,
                _money(line.posted_price),
                _money(line.bid),
                "ruled out" if line.ruled_out else f"-{line.discount * 100:.2f}%",
            ])
        print(_table(["good", "price", "own bid", "discount"], rows))
        print("purchase walk:")
        for step in plan.steps:
            share = "all" if step.fraction == 1.0 else f"{step.fraction * 100:.2f}%"
            print(f"  buys {share} of {step.good_id} for {_money(step.spent)}"
                  f" (left: {_money(step.budget_left)})")
        print(f"  unspent: {_money(plan.remaining)}\n")
    return EXIT_OK


def cmd_frontier(args) -> int:
    try:
        case = load_case_file(args.case)
        problem = case.problem()
        doc = frontier_to_dict(problem)
    except (OSError, json.JSONDecodeError, FormatError, ValueError) as exc:
        return _fail(str(exc), EXIT_VALIDATION)
    out = Path(args.out) if args.out else Path(args.case).with_suffix(".frontier.json")
    _write(out, doc)
    if args.format == "json":
        print(canonical_dumps(doc), end="")
    else:
        a1, a2 = doc["agent_ids"]
        print(f"Pareto frontier vertices (utility of {a1}, utility of {a2})")
        for x, y in doc["vertices"]:
            print(f"  ({x:.4f}, {y:.4f})")
        if doc.get("equal_utility_point"):
            x, y = doc["equal_utility_point"]
            print(f"equal-utility point: ({x:.4f}, {y:.4f})")
        print(f"written to {out}")
    return EXIT_OK


def cmd_regress(args) -> int:
    failures = 0
    for cid in CASE_IDS:
        try:
            outcome = run_regression(cid, tol=args.tol, max_iter=args.max_iter)
        except UnknownCase as exc:
            return _fail(str(exc), EXIT_VALIDATION)
        except ConvergenceError as exc:
            print(f"{cid}: FAIL (no convergence: {exc})")
            failures += 1
            continue
        except (OSError, FormatError, ValueError, KeyError) as exc:
            print(f"{cid}: FAIL (fixture error: {exc})")
            failures += 1
            continue
        print(outcome.summary())
        if not outcome.passed:
            failures += 1
    total = len(CASE_IDS)
    print(f"{total - failures}/{total} cases pass")
    return EXIT_OK if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairdiv",
        description="Fair-division solver and mediation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--tol", type=float, default=1e-9, help="solver tolerance")
        p.add_argument("--max-iter", type=int, default=200_000, help="iteration cap")
        p.add_argument("--format", choices=("table", "json"), default="table")

    p = sub.add_parser("solve", help="solve a case file")
    p.add_argument("case")
    p.add_argument("--procedure", choices=("nash", "egalitarian"), default=None,
                   help="override the case's designated procedure")
    p.add_argument("--out", default=None, help="result file (default: <case>.result.json)")
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("audit", help="audit an allocation against a case")
    p.add_argument("case")
    p.add_argument("allocation", help="result file or bare allocation file")
    p.add_argument("--out", default=None)
    common(p)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("explain", help="posted-price discount table for agents")
    p.add_argument("case")
    p.add_argument("result", help="solved nash result file carrying prices")
    p.add_argument("--agent", default=None)
    p.add_argument("--out", default=None)
    common(p)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("frontier", help="two-agent utility frontier vertices")
    p.add_argument("case")
    p.add_argument("--out", default=None)
    common(p)
    p.set_defaults(func=cmd_frontier)

    p = sub.add_parser("regress", help="run the bundled case corpus")
    common(p)
    p.set_defaults(func=cmd_regress)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
