"""Shared fixtures: schemas, synthetic datasets and rule-based test models."""

from __future__ import annotations

import numpy as np
import pytest

from complai import Dataset, FeatureSpec, Model, Prediction, Schema, TargetSpec
from complai.tabular import CATEGORICAL, NUMERICAL


class RuleModel(Model):
    """Deterministic test model driven by a plain Python function.

    ``fn`` maps an instance tuple to a class label (classification) or a
    float (regression); ``score_fn`` optionally maps an instance to a
    per-class score vector.
    """

    def __init__(self, target: TargetSpec, fn, score_fn=None):
        super().__init__(target)
        self._fn = fn
        self._score_fn = score_fn

    def _predict(self, batch):
        preds = []
        for row in batch:
            out = self._fn(row)
            if self.target.is_classification:
                scores = tuple(self._score_fn(row)) if self._score_fn else None
                preds.append(Prediction(label=out, scores=scores))
            else:
                preds.append(Prediction(value=float(out)))
        return preds


def binary_target(classes=("no", "yes"), favorable=None) -> TargetSpec:
    return TargetSpec(name="outcome", task="binary", classes=classes, favorable=favorable)


def make_schema(kinds, task="binary", classes=("no", "yes"), protected=(), favorable=None) -> Schema:
    """Schema from a kind string like "nnc" (numerical, numerical, categorical)."""
    features = []
    for i, k in enumerate(kinds):
        name = f"f{i}"
        kind = NUMERICAL if k == "n" else CATEGORICAL
        features.append(FeatureSpec(name=name, kind=kind))
    if task == "regression":
        target = TargetSpec(name="y", task=task, favorable=favorable)
    else:
        target = TargetSpec(name="y", task=task, classes=classes, favorable=favorable)
    return Schema(features=tuple(features), target=target, protected=tuple(protected))


CAT_TOKENS = ("red", "green", "blue", "gray")


def random_rows(rng: np.random.Generator, schema: Schema, n: int, n_tokens: int = 3):
    rows = []
    for _ in range(n):
        values = []
        for spec in schema.features:
            if spec.kind == NUMERICAL:
                values.append(float(np.round(rng.normal(0.0, 2.0), 4)))
            else:
                values.append(CAT_TOKENS[rng.integers(0, n_tokens)])
        rows.append(tuple(values))
    return rows


def random_dataset(rng: np.random.Generator, schema: Schema, n: int, n_tokens: int = 3) -> Dataset:
    """Rows with labels from a fixed nonlinear rule, so every task has signal
    and classification data contains multiple classes."""
    rows = random_rows(rng, schema, n, n_tokens)
    labels = []
    for row in rows:
        score = 0.0
        for spec, v in zip(schema.features, row):
            if spec.kind == NUMERICAL:
                score += v
            else:
                score += 1.5 if v == "red" else -0.5
        if schema.target.task == "regression":
            labels.append(float(np.round(score, 4)))
        else:
            classes = schema.target.classes
            if schema.target.task == "binary":
                labels.append(classes[0] if score < 0 else classes[1])
            else:
                edges = np.linspace(-3, 3, len(classes) - 1)
                labels.append(classes[int(np.searchsorted(edges, score))])
    data = Dataset(schema=schema, rows=rows, labels=labels)
    if schema.target.is_classification and len(set(labels)) < 2:
        # Nudge one label so classification fixtures are never degenerate.
        other = next(c for c in schema.target.classes if c != labels[0])
        data.labels[0] = other
    return data


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260810)
