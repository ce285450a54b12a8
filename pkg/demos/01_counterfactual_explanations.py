"""Why was this loan rejected, and what would flip the decision?

Trains a logistic model on synthetic loan applications, picks a rejected
applicant, and asks the counterfactual engine for the smallest set of value
substitutions (taken from a real similar applicant) that gets the loan
approved. Then scores how explainable the model is overall: the fewer
features a typical flip needs, the higher the score.
"""

from complai import (
    DistanceConfig,
    NiceConfig,
    SearchContext,
    compute_norm_stats,
    explainability_histogram,
    explainability_score,
    feature_importance,
    generate_batch,
    generate_counterfactual,
    target_region,
    train_builtin,
)

from _loan_data import SCHEMA, make_loans


def main():
    train = make_loans(400)
    validation = make_loans(150, seed=23)
    model = train_builtin("logistic", train)

    cfg = NiceConfig(distance=DistanceConfig(norm_stats=compute_norm_stats(train)))
    context = SearchContext.build(train, model, cfg)

    rejected_idx = next(
        i for i, row in enumerate(validation.rows)
        if model.predict_one(row).label == "rejected"
    )
    applicant = validation.rows[rejected_idx]
    prediction = model.predict_one(applicant)
    print(f"applicant #{rejected_idx}: predicted {prediction.label!r}")

    region = target_region(prediction, SCHEMA.target)
    result = generate_counterfactual(applicant, train, model, region, cfg, context)

    print(f"\nnearest counterfactual ({result.n_changed} change(s), "
          f"distance {result.distance:.3f}, {result.query_count} model queries):")
    print(f"{'feature':>20} {'current':>12} {'needed':>12}")
    for name in result.changed_features:
        j = SCHEMA.index(name)
        print(f"{name:>20} {applicant[j]!r:>12} {result.counterfactual[j]!r:>12}")

    # Whole-model view: generate counterfactuals for every validation row.
    preds, results = generate_batch(validation.rows, context)
    ok = [r for r in results if r is not None]
    print(f"\ncounterfactuals found for {len(ok)}/{len(validation)} validation rows")
    print(f"explainability score: {explainability_score(ok):.2f} / 100")
    print("changes-needed histogram (% of rows):")
    for bin_label, pct in explainability_histogram(ok).items():
        print(f"  {bin_label:>3} feature(s): {pct:5.1f}%")

    attr = feature_importance(ok, SCHEMA)
    print("\nmost decision-driving features (by change frequency):")
    for name in attr.ranking[:3]:
        print(f"  {name:<20} share {attr.shares[name]:.2f}")


if __name__ == "__main__":
    main()
