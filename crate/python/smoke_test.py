"""Smoke test for the `ucmarket` extension module.

Build and install first, e.g. `pip install maturin && maturin develop -m
crates/python/Cargo.toml --features extension-module`, then run
`python python/smoke_test.py`.
"""

import json
import math
import sys

import ucmarket


def check(label, ok):
    print(f"{'PASS' if ok else 'FAIL'}  {label}")
    return ok


def main():
    results = []
    case = ucmarket.illustrative_case_json("T1_D1")
    parsed = json.loads(case)
    results.append(check("illustrative case has 15 units", len(parsed["generators"]) == 15))

    fcp = ucmarket.clear_market(case, "fcp")
    achp = ucmarket.clear_market(case, "achp")
    results.append(check("FCP competitive price is 25", abs(fcp["prices"][0] - 25.0) < 1e-4))
    results.append(check("aCHP competitive price is 15", abs(achp["prices"][0] - 15.0) < 1e-4))
    on_gen1 = sum(1 for gid, u in zip((g["id"] for g in parsed["generators"]), fcp["commitment"]) if gid.startswith("GEN1") and u[0] > 0.5)
    results.append(check("four block units committed", on_gen1 == 4))

    excluded = next(s for s, u in zip(fcp["settlements"], fcp["commitment"]) if s["gen_id"].startswith("GEN1") and u[0] < 0.5)
    results.append(check("excluded block unit perceives -250", abs(excluded["loc_display"] + 250.0) < 1e-6))

    profit, mwp, loc0, _ = ucmarket.settle_generator(case, "GEN1_1", [10.0], [25.0], [True], False)
    results.append(check("self-committed block unit at price 10 earns -125", abs(profit + 125.0) < 1e-6 and mwp == 0.0))

    test = ucmarket.welch_t([2.1, 2.0, 1.9, 2.2], [1.0, 1.1, 0.9, 1.0])
    results.append(check("welch t on reference samples", test is not None and abs(test[0] - 13.747727084867508) < 1e-6))
    results.append(check("welch needs two values per sample", ucmarket.welch_t([1.0], [1.0, 2.0]) is None))
    results.append(check("smooth recurrence", math.isclose(ucmarket.smooth([10.0, 20.0], 0.5), 15.0)))

    summary = json.loads(ucmarket.run_simulation(case, "achp", iterations=50, seed=3))
    results.append(check("short aCHP run has 50 iterations", len(summary["iterations"]) == 50))

    try:
        ucmarket.clear_market(case, "lmp")
        results.append(check("unknown pricing model rejected", False))
    except ValueError:
        results.append(check("unknown pricing model rejected", True))

    return 0 if all(results) else 1


if __name__ == "__main__":
    sys.exit(main())
