"""Interactive what-if, scripted: edit an applicant, watch the decision.

Builds an audit session (the same object the HTTP service and the web
console sit on), asks a what-if question for a hand-edited applicant, and
prints the prediction, the counterfactual diff, and the per-feature
responsibility ranking. Serving the same session over HTTP is one command:

    complai serve --config demos/out/scan.json --port 8501
"""

import json
import pathlib

from complai import save_csv
from complai.workbench import AuditSession, ScanConfig, whatif

from _loan_data import SCHEMA, make_loans

OUT = pathlib.Path(__file__).parent / "out"


def main():
    OUT.mkdir(exist_ok=True)
    (OUT / "schema.json").write_text(json.dumps(SCHEMA.to_json(), indent=2), encoding="utf-8")
    save_csv(make_loans(400), str(OUT / "train.csv"))
    save_csv(make_loans(150, seed=23), str(OUT / "validation.csv"))
    config = ScanConfig(
        schema=str(OUT / "schema.json"),
        train=str(OUT / "train.csv"),
        validation=str(OUT / "validation.csv"),
        model="builtin:logistic",
        favorable="approved",
        out=str(OUT / "scan_report.json"),
    )
    session = AuditSession.open(config)

    applicant = (36000.0, 0.0, 4100.0, 3.0, "1", "rural", "female")
    response = whatif(applicant, session)
    print("edited applicant:", dict(zip(SCHEMA.feature_names, applicant)))
    print(f"prediction: {response.prediction['label']!r} "
          f"(scores {response.prediction['scores']})")

    print("\nwhat would change the outcome:")
    for row in response.diff:
        print(f"  {row['feature']:<20} {row['original']!r} -> {row['counterfactual']!r}")

    print("\nper-feature responsibility (signed shift in approval score):")
    for entry in response.attribution:
        if entry["group"] != "zero":
            print(f"  {entry['feature']:<20} {entry['delta']:+.4f} ({entry['group']})")


if __name__ == "__main__":
    main()
