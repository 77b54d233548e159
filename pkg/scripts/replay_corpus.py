#!/usr/bin/env python3
"""Solve the four bundled cases end to end and print their characterizations.

A quick way to reproduce every headline number: the competitive allocation,
equilibrium prices and discount tables of the inheritance case, and the
egalitarian allocations with market-value/gain tables of the three rating
cases.
"""
import numpy as np

from fairdiv.cases import CASE_IDS, load_case, run_regression
from fairdiv.fileformat import money_from


def main():
    for case_id in CASE_IDS:
        fx = load_case(case_id)
        outcome = run_regression(case_id)
        result = outcome.result
        print("=" * 72)
        print(f"{fx.id}: {fx.label}")
        print(f"procedure: {result['procedure']}   regression: {outcome.summary()}")
        print("allocation:")
        for aid, row in zip(result["agent_ids"], result["allocation"]):
            cells = "  ".join(f"{v:7.4f}" for v in row)
            print(f"  {aid}: {cells}")
        if "prices" in result:
            prices = [money_from(v) for v in result["prices"]["scaled"]]
            print("prices:", "  ".join(f"{p:8.2f}" for p in prices),
                  f"(total {money_from(result['prices']['total']):.2f})")
            for plan in result["purchases"]:
                cells = []
                for line in plan["lines"]:
                    if line["ruled_out"]:
                        cells.append(f"{line['good_id']}: ruled out")
                    else:
                        cells.append(f"{line['good_id']}: -{line['discount'] * 100:.2f}%")
                print(f"  {plan['agent_id']} discounts: " + ", ".join(cells))
        if "metrics" in result:
            for line in result["metrics"]:
                print(
                    f"  {line['agent_id']}: bundle value {money_from(line['market_value']):10.3f}"
                    f"  gain {line['gain']:+8.5f}"
                    f"  central rating {line['central_rating']:.4f}"
                )
    print("=" * 72)


if __name__ == "__main__":
    main()
