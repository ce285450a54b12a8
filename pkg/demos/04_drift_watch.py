"""Is the live data still the data the model was trained for?

Compares counterfactual-based feature-importance rankings between the
training window and two out-of-time windows: a faithful one, and one hit by
a classic pipeline bug (two numeric columns swapped upstream). The
rank-similarity score is 1.0 when the importance ordering is preserved and
drops as it scrambles; below the threshold an alert fires.
"""

from complai import Dataset, DistanceConfig, NiceConfig, compute_norm_stats, train_builtin
from complai.drift import oot_drift

from _loan_data import SCHEMA, make_loans

THRESHOLD = 0.95


def show(report, title):
    print(f"\n--- {title} ---")
    print(f"train ranking: {', '.join(report.train_attr.ranking[:4])} ...")
    print(f"live  ranking: {', '.join(report.oot_attr.ranking[:4])} ...")
    print(f"rank-similarity score: {report.score:.3f} "
          f"(threshold {report.threshold}) -> {'ALERT' if report.alert else 'ok'}")


def main():
    train = make_loans(400)
    model = train_builtin("logistic", train)
    cfg = NiceConfig(distance=DistanceConfig(norm_stats=compute_norm_stats(train)))

    live_ok = make_loans(150, seed=23)
    show(oot_drift(model, train, live_ok, cfg, threshold=THRESHOLD), "faithful live window")

    amount, years = SCHEMA.index("loan_amount"), SCHEMA.index("years_employed")
    corrupted_rows = []
    for row in live_ok.rows:
        values = list(row)
        values[amount], values[years] = values[years], values[amount]
        corrupted_rows.append(tuple(values))
    corrupted = Dataset(schema=SCHEMA, rows=corrupted_rows, labels=list(live_ok.labels))
    show(oot_drift(model, train, corrupted, cfg, threshold=THRESHOLD),
         "live window with loan_amount/years_employed swapped upstream")


if __name__ == "__main__":
    main()
