"""Per-aspect scoring and the overall trust factor.

All scores land on a 0-100 scale. Explainability rewards counterfactuals that
change few features; robustness averages counterfactual distances on a bounded
percentage scale; performance is a user-weighted blend of task metrics; the
trust factor is the weight-renormalized blend of whichever component scores
are applicable.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AdjR2Undefined,
    EmptyResults,
    IncompatibleMetric,
    NoApplicableScores,
    SchemaError,
)
from .heom import MEAN_CLAMPED, DistanceConfig, heom
from .models import Prediction
from .nice import CounterfactualResult
from .tabular import Schema, TargetSpec

DEFAULT_BIN_WEIGHTS = (1.0, 0.8, 0.6, 0.4, 0.2, 0.0)

BIN_LABELS = ("1", "2", "3", "4", "5", ">5")

CLASSIFICATION_METRICS = ("accuracy", "precision", "recall", "f1")
REGRESSION_METRICS = ("r2", "adjusted_r2")


@dataclass(frozen=True)
class ExplainabilityConfig:
    """Weights for the change-count bins 1, 2, 3, 4, 5 and >5."""

    bin_weights: tuple[float, ...] = DEFAULT_BIN_WEIGHTS

    def __post_init__(self):
        w = self.bin_weights
        if len(w) != 6:
            raise SchemaError("explainability needs 6 bin weights (bins 1..5 and overflow)")
        if w[0] > 1.0 or w[-1] < 0.0 or any(a < b for a, b in zip(w, w[1:])):
            raise SchemaError("bin weights must be non-increasing within [0, 1]")


def _bin_index(n_changed: int) -> int:
    return min(n_changed, 6) - 1


def explainability_histogram(results: list[CounterfactualResult]) -> dict[str, float]:
    """Percentage of counterfactuals per change-count bin."""
    if not results:
        raise EmptyResults("no counterfactuals to bin")
    counts = [0] * 6
    for r in results:
        counts[_bin_index(r.n_changed)] += 1
    total = len(results)
    return {label: 100.0 * c / total for label, c in zip(BIN_LABELS, counts)}


def explainability_score(results: list[CounterfactualResult],
                         cfg: ExplainabilityConfig = ExplainabilityConfig()) -> float:
    """Weighted sum of bin occupancy percentages."""
    hist = explainability_histogram(results)
    return float(sum(w * hist[label] for w, label in zip(cfg.bin_weights, BIN_LABELS)))


@dataclass(frozen=True)
class AttributionVector:
    """How often each feature changes across counterfactuals."""

    counts: dict  # feature name -> int
    shares: dict  # feature name -> float, summing to 1 when any change exists
    ranking: tuple[str, ...]

    def to_json(self) -> dict:
        return {"counts": dict(self.counts), "shares": dict(self.shares), "ranking": list(self.ranking)}


def feature_importance(results: list[CounterfactualResult], schema: Schema) -> AttributionVector:
    """Change frequency per feature; the top-ranked feature is the one the
    model leans on hardest."""
    if not results:
        raise EmptyResults("no counterfactuals to attribute")
    counts = {name: 0 for name in schema.feature_names}
    for r in results:
        for name in r.changed_features:
            counts[name] += 1
    total = sum(counts.values())
    shares = {name: (c / total if total else 0.0) for name, c in counts.items()}
    order = {name: i for i, name in enumerate(schema.feature_names)}
    ranking = tuple(sorted(counts, key=lambda name: (-shares[name], order[name])))
    return AttributionVector(counts=counts, shares=shares, ranking=ranking)


@dataclass(frozen=True)
class RobustnessReport:
    per_class: dict  # class label -> percentage; empty for regression
    minimum: float
    average: float
    skipped_classes: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "per_class": dict(self.per_class),
            "min": self.minimum,
            "avg": self.average,
            "skipped_classes": list(self.skipped_classes),
        }


def robustness_scores(results_by_class: dict, schema: Schema, cfg: DistanceConfig) -> RobustnessReport:
    """Mean counterfactual distance per predicted class, on a 0-100 scale.

    ``results_by_class`` maps each predicted class to that class's
    counterfactual results; regression callers pass a single ``None`` key and
    get one overall score. Distances are recomputed under the bounded
    mean-clamped aggregation so 100 means every counterfactual is maximally
    far on every feature.
    """
    if cfg.aggregation != MEAN_CLAMPED:
        raise SchemaError("robustness requires the mean_clamped distance configuration")
    if not results_by_class or all(not v for v in results_by_class.values()):
        raise EmptyResults("no counterfactuals to score")

    per_class = {}
    skipped = []
    for label, results in results_by_class.items():
        if not results:
            skipped.append(str(label))
            warnings.warn(f"robustness: class {label!r} has no scored instances; skipped")
            continue
        dists = [heom(r.original, r.counterfactual, schema, cfg) for r in results]
        per_class[label] = 100.0 * float(np.mean(dists))

    values = list(per_class.values())
    report = RobustnessReport(
        per_class={} if set(per_class) == {None} else {str(k): v for k, v in per_class.items()},
        minimum=float(min(values)),
        average=float(np.mean(values)),
        skipped_classes=tuple(skipped),
    )
    return report


@dataclass(frozen=True)
class MetricWeights:
    """User-chosen performance metrics and their normalized weights."""

    weights: dict  # metric name -> weight

    def __post_init__(self):
        if not self.weights:
            raise SchemaError("at least one performance metric is required")
        known = set(CLASSIFICATION_METRICS) | set(REGRESSION_METRICS)
        for name, w in self.weights.items():
            if name not in known:
                raise IncompatibleMetric(f"unknown metric {name!r}")
            if w < 0:
                raise SchemaError(f"metric weight for {name!r} must be nonnegative")
        if sum(self.weights.values()) <= 0:
            raise SchemaError("metric weights must not all be zero")

    def normalized(self) -> dict:
        total = sum(self.weights.values())
        return {name: w / total for name, w in self.weights.items()}

    @staticmethod
    def default_for(task: str) -> "MetricWeights":
        if task == "regression":
            return MetricWeights({"r2": 1.0})
        return MetricWeights({"accuracy": 1.0})


def _confusion_counts(preds: list[Prediction], labels: list, positive: str) -> tuple[int, int, int, int]:
    tp = fp = fn = tn = 0
    for p, y in zip(preds, labels):
        predicted_pos = p.label == positive
        actual_pos = y == positive
        if predicted_pos and actual_pos:
            tp += 1
        elif predicted_pos:
            fp += 1
        elif actual_pos:
            fn += 1
        else:
            tn += 1
    return tp, fp, fn, tn


def _precision_recall_f1(preds, labels, positive) -> tuple[float, float, float]:
    tp, fp, fn, _ = _confusion_counts(preds, labels, positive)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def _positive_class(spec: TargetSpec) -> str:
    if isinstance(spec.favorable, str):
        return spec.favorable
    return spec.classes[-1]


def _r_squared(preds: list[Prediction], labels: list) -> float:
    y = np.array(labels, dtype=np.float64)
    yhat = np.array([p.value for p in preds], dtype=np.float64)
    ss_res = float(((y - yhat) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot == 0.0:
        return 1.0 if ss_res == 0.0 else 0.0
    return 1.0 - ss_res / ss_tot


def compute_metric(name: str, preds: list[Prediction], labels: list,
                   spec: TargetSpec, m_features: int) -> float:
    """A single metric as a percentage in [0, 100]."""
    if spec.is_classification:
        if name not in CLASSIFICATION_METRICS:
            raise IncompatibleMetric(f"metric {name!r} is not defined for classification")
        if name == "accuracy":
            correct = sum(1 for p, y in zip(preds, labels) if p.label == y)
            return 100.0 * correct / len(labels)
        if spec.task == "binary":
            p, r, f1 = _precision_recall_f1(preds, labels, _positive_class(spec))
            value = {"precision": p, "recall": r, "f1": f1}[name]
        else:
            per_class = [_precision_recall_f1(preds, labels, c) for c in spec.classes]
            idx = {"precision": 0, "recall": 1, "f1": 2}[name]
            value = float(np.mean([t[idx] for t in per_class]))
        return 100.0 * value

    if name not in REGRESSION_METRICS:
        raise IncompatibleMetric(f"metric {name!r} is not defined for regression")
    r2 = _r_squared(preds, labels)
    if name == "adjusted_r2":
        n = len(labels)
        if n <= m_features + 1:
            raise AdjR2Undefined(f"adjusted R2 needs more than {m_features + 1} rows, got {n}")
        r2 = 1.0 - (1.0 - r2) * (n - 1) / (n - m_features - 1)
    return 100.0 * max(r2, 0.0)


def performance_score(preds: list[Prediction], labels: list, weights: MetricWeights,
                      spec: TargetSpec, m_features: int) -> float:
    """Weighted blend of the chosen metrics."""
    if len(preds) != len(labels):
        raise SchemaError("predictions and labels must align")
    if len(labels) < 2:
        raise EmptyResults("performance needs at least 2 rows")
    return float(sum(
        w * compute_metric(name, preds, labels, spec, m_features)
        for name, w in weights.normalized().items()
    ))


TRUST_COMPONENTS = ("explainability", "robustness", "performance", "drift", "fairness")


@dataclass
class ScoreCard:
    """The five component scores plus the blended trust factor.

    ``None`` marks a component as not applicable; it is dropped from the
    trust blend and the remaining weights are renormalized.
    """

    explainability: float | None = None
    robustness_avg: float | None = None
    robustness_min: float | None = None
    robustness_per_class: dict = field(default_factory=dict)
    performance: float | None = None
    drift: float | None = None
    fairness: float | None = None
    trust_weights: dict = field(default_factory=dict)
    trust: float | None = None

    def components(self) -> dict:
        return {
            "explainability": self.explainability,
            "robustness": self.robustness_avg,
            "performance": self.performance,
            "drift": self.drift,
            "fairness": self.fairness,
        }

    def to_json(self) -> dict:
        return {
            "explainability": self.explainability,
            "robustness_avg": self.robustness_avg,
            "robustness_min": self.robustness_min,
            "robustness_per_class": dict(self.robustness_per_class),
            "performance": self.performance,
            "drift": self.drift,
            "fairness": self.fairness,
            "trust_weights": dict(self.trust_weights),
            "trust": self.trust,
        }


def trust_factor(card: ScoreCard) -> float:
    """Weighted sum over the applicable component scores, weights
    renormalized; equal weights unless the card says otherwise."""
    weights = card.trust_weights or {name: 1.0 for name in TRUST_COMPONENTS}
    for name in weights:
        if name not in TRUST_COMPONENTS:
            raise SchemaError(f"unknown trust component {name!r}")
    applicable = {name: score for name, score in card.components().items()
                  if score is not None and weights.get(name, 0.0) > 0.0}
    if not applicable:
        raise NoApplicableScores("no applicable component scores to blend")
    total = sum(weights[name] for name in applicable)
    return float(sum(weights[name] * score for name, score in applicable.items()) / total)
