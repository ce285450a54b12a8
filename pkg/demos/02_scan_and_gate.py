"""End-to-end audit: scan a model, read the score card, gate it for CI.

Materializes the synthetic loan data as CSV + schema JSON (the same files
the CLI consumes), runs a full scan (explainability, robustness,
performance, drift, fairness, trust), then checks the report against a
deployment policy the way a CI pipeline would.
"""

import json
import pathlib

from complai import save_csv
from complai.workbench import ScanConfig, gate, scan

from _loan_data import SCHEMA, make_loans

OUT = pathlib.Path(__file__).parent / "out"


def main():
    OUT.mkdir(exist_ok=True)
    (OUT / "schema.json").write_text(json.dumps(SCHEMA.to_json(), indent=2), encoding="utf-8")
    save_csv(make_loans(400), str(OUT / "train.csv"))
    save_csv(make_loans(150, seed=23), str(OUT / "validation.csv"))
    save_csv(make_loans(120, seed=77), str(OUT / "oot.csv"))

    config = ScanConfig(
        schema=str(OUT / "schema.json"),
        train=str(OUT / "train.csv"),
        validation=str(OUT / "validation.csv"),
        oot=str(OUT / "oot.csv"),
        model="builtin:logistic",
        metric_weights={"precision": 0.3, "f1": 0.7},
        favorable="approved",
        out=str(OUT / "scan_report.json"),
    )
    report = scan(config)

    print("score card:")
    for name, value in report["scorecard"].items():
        if isinstance(value, (int, float)):
            print(f"  {name:<20} {value:7.2f}")
    print(f"\nreport persisted to {config.out}")

    policy = {"min_scores": {"explainability": 60, "robustness": 1,
                             "performance": 70, "fairness": 80, "drift": 75}}
    verdict = gate(report, policy)
    print(f"\npolicy gate: {'PASS' if verdict.passed else 'FAIL'}")
    for violation in verdict.violations:
        print(f"  {violation['component']}: score {violation['score']:.2f} "
              f"< threshold {violation['threshold']}")
    print("\n(the CLI equivalent: complai scan --config scan.json && "
          "complai gate --report scan_report.json --policy policy.json)")


if __name__ == "__main__":
    main()
