"""Synthetic loan-approval data shared by the demo scripts.

Seven mixed features, a deterministic-but-messy approval rule, and a fixed
seed, so every demo prints the same story on every run.
"""

import numpy as np

from complai import Dataset, FeatureSpec, Schema, TargetSpec

AREAS = ("urban", "semiurban", "rural")

SCHEMA = Schema(
    features=(
        FeatureSpec(name="applicant_income", kind="numerical"),
        FeatureSpec(name="coapplicant_income", kind="numerical"),
        FeatureSpec(name="loan_amount", kind="numerical"),
        FeatureSpec(name="years_employed", kind="numerical"),
        FeatureSpec(name="credit_history", kind="categorical", allowed_values=("0", "1")),
        FeatureSpec(name="property_area", kind="categorical", allowed_values=AREAS),
        FeatureSpec(name="gender", kind="categorical", allowed_values=("male", "female")),
    ),
    target=TargetSpec(name="loan_status", task="binary",
                      classes=("rejected", "approved"), favorable="approved"),
    protected=("gender", "property_area"),
)


def _label(row, wobble):
    income = row[0] + 0.6 * row[1]
    score = 0.9 * (income / 1000.0) - 1.1 * (row[2] / 100.0) + 0.4 * row[3]
    score += 18.0 if row[4] == "1" else 0.0
    score += {"urban": 2.0, "semiurban": 1.0, "rural": 0.0}[row[5]]
    score += -2.5 if row[6] == "female" else 0.0  # baked-in bias, on purpose
    return "approved" if score + wobble > 38.0 else "rejected"


def make_loans(n: int, seed: int = 11) -> Dataset:
    rng = np.random.default_rng(seed)
    rows, labels = [], []
    for _ in range(n):
        row = (
            float(np.round(rng.normal(42000, 9000) / 100) * 100),
            float(np.round(max(rng.normal(8000, 6000), 0.0) / 100) * 100),
            float(np.round(rng.uniform(900, 5200))),
            float(int(rng.uniform(0, 25))),
            "1" if rng.random() < 0.75 else "0",
            AREAS[int(rng.integers(0, 3))],
            "female" if rng.random() < 0.4 else "male",
        )
        rows.append(row)
        labels.append(_label(row, float(rng.normal(0, 2.0))))
    return Dataset(schema=SCHEMA, rows=rows, labels=labels)
