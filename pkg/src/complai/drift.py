"""Drift susceptibility via feature-importance rank similarity.

Counterfactual-based feature importance is computed on the training data and
on an out-of-time window, and the two rankings are compared with NDCG. The
relevance of a feature is its training attribution share, so the score is 1
exactly when the out-of-time ranking preserves the training rank order and
drops as important features move down the list. A score below the threshold
raises a drift alert.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import EmptyWindow, FeatureSetMismatch, ZeroTrainAttribution
from .models import Model
from .nice import NiceConfig, RegionSettings, SearchContext, generate_batch
from .scores import AttributionVector, feature_importance
from .tabular import Dataset

DEFAULT_THRESHOLD = 0.8


@dataclass(frozen=True)
class DriftReport:
    train_attr: AttributionVector
    oot_attr: AttributionVector
    dcg: float
    idcg: float
    score: float
    threshold: float
    alert: bool
    skipped_train: int = 0
    skipped_oot: int = 0

    def to_json(self) -> dict:
        return {
            "train_attribution": self.train_attr.to_json(),
            "oot_attribution": self.oot_attr.to_json(),
            "dcg": self.dcg,
            "idcg": self.idcg,
            "score": self.score,
            "threshold": self.threshold,
            "alert": self.alert,
            "skipped_train": self.skipped_train,
            "skipped_oot": self.skipped_oot,
        }


def _discounted_sum(ranking, relevance) -> float:
    return sum(relevance[f] / math.log2(i + 2) for i, f in enumerate(ranking))


def drift_score(train_attr: AttributionVector, oot_attr: AttributionVector,
                threshold: float = DEFAULT_THRESHOLD) -> DriftReport:
    """NDCG of the out-of-time ranking against the training ranking."""
    if set(train_attr.shares) != set(oot_attr.shares):
        raise FeatureSetMismatch("attribution vectors cover different feature sets")
    relevance = train_attr.shares
    if all(v == 0.0 for v in relevance.values()):
        raise ZeroTrainAttribution("training attribution has no nonzero share")
    idcg = _discounted_sum(train_attr.ranking, relevance)
    dcg = _discounted_sum(oot_attr.ranking, relevance)
    score = dcg / idcg
    return DriftReport(train_attr=train_attr, oot_attr=oot_attr, dcg=dcg, idcg=idcg,
                       score=score, threshold=threshold, alert=score < threshold)


def oot_drift(model: Model, train: Dataset, oot: Dataset, cfg: NiceConfig,
              threshold: float = DEFAULT_THRESHOLD,
              settings: RegionSettings = RegionSettings(), sigma: float | None = None,
              parallelism: int = 1, context: SearchContext | None = None) -> DriftReport:
    """Counterfactual importance on train vs an out-of-time window, compared
    with :func:`drift_score`. The caller picks the window (cumulative or
    checkpoint); rows with no reachable counterfactual are skipped and
    counted."""
    if train.schema.feature_names != oot.schema.feature_names:
        raise FeatureSetMismatch("train and out-of-time schemas disagree")
    if len(oot) == 0:
        raise EmptyWindow("out-of-time window has no rows")

    ctx = context or SearchContext.build(train, model, cfg)
    if sigma is None and not train.schema.target.is_classification:
        import numpy as np

        sigma = float(np.std(np.array(train.labels, dtype=float)))

    _, train_results = generate_batch(train.rows, ctx, settings, sigma, parallelism)
    _, oot_results = generate_batch(oot.rows, ctx, settings, sigma, parallelism)
    train_ok = [r for r in train_results if r is not None]
    oot_ok = [r for r in oot_results if r is not None]

    train_attr = feature_importance(train_ok, train.schema)
    oot_attr = feature_importance(oot_ok, train.schema)
    base = drift_score(train_attr, oot_attr, threshold)
    return DriftReport(
        train_attr=base.train_attr, oot_attr=base.oot_attr, dcg=base.dcg, idcg=base.idcg,
        score=base.score, threshold=base.threshold, alert=base.alert,
        skipped_train=len(train_results) - len(train_ok),
        skipped_oot=len(oot_results) - len(oot_ok),
    )
