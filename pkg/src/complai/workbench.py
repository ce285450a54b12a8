"""Scan orchestration: config, the full audit pipeline, report persistence,
the policy gate, What-If evaluation and slice reports.

A scan loads the datasets, caches training predictions, generates a
counterfactual for every validation row, derives all component scores plus
the trust factor, and persists a versioned JSON report next to an artifacts
directory (training prediction cache and the per-instance counterfactual
table as JSON-lines). Re-running an identical config against a deterministic
model reproduces the report byte for byte, timestamps aside, regardless of
the worker count.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__ as engine_version
from .errors import (
    ComplaiError,
    MalformedPolicy,
    MalformedReport,
    NoUnlikeNeighbor,
    PipelineError,
    SchemaError,
)
from .fairness import FlipTestReport, fairness_audit
from .drift import DriftReport, oot_drift
from .heom import DistanceConfig, heom, percentage_config
from .models import Model, Prediction, resolve_model
from .nice import (
    CounterfactualResult,
    NiceConfig,
    RegionSettings,
    SearchContext,
    generate_batch,
    generate_counterfactual,
    target_region,
)
from .scores import (
    MetricWeights,
    ExplainabilityConfig,
    ScoreCard,
    compute_metric,
    explainability_histogram,
    explainability_score,
    feature_importance,
    performance_score,
    robustness_scores,
    trust_factor,
)
from .tabular import (
    Dataset,
    Schema,
    SliceQuery,
    compute_norm_stats,
    load_csv,
    load_schema,
    slice_indices,
)

REPORT_FORMAT = 1
DEFAULT_OUT = "./complai_report.json"
DEFAULT_LOW_SUPPORT_FLOOR = 30


@dataclass
class ScanConfig:
    """Everything a scan needs, loadable from a snake_case JSON document."""

    schema: str = ""
    train: str = ""
    validation: str = ""
    oot: str | None = None
    model: str = "builtin:logistic"
    model_hyper: dict = field(default_factory=dict)
    lambda_lo: float = 1.0
    lambda_hi: float = 1.0
    side: str = "both"
    norm_method: str = "range"
    clamp_numeric: bool = False
    reward_mode: str = "sparsity"
    max_queries: int | None = None
    require_correct_neighbor: bool = True
    metric_weights: dict | None = None
    trust_weights: dict | None = None
    explainability_weights: list | None = None
    drift_threshold: float = 0.8
    protected: list | None = None
    favorable: object = None
    fairness_mode: str = "synthetic"
    intersectional: bool = False
    parallelism: int = 1
    batch_cap: int = 1024
    slice_queries: list = field(default_factory=list)
    low_support_floor: int = DEFAULT_LOW_SUPPORT_FLOOR
    out: str = DEFAULT_OUT

    KEYS = None  # filled in below

    @staticmethod
    def from_json(doc: dict) -> "ScanConfig":
        unknown = set(doc) - ScanConfig.KEYS
        if unknown:
            raise SchemaError(f"unknown scan config keys: {sorted(unknown)}")
        cfg = ScanConfig(**doc)
        for required in ("schema", "train", "validation"):
            if not getattr(cfg, required):
                raise SchemaError(f"scan config is missing {required!r}")
        return cfg

    @staticmethod
    def load(path: str) -> "ScanConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return ScanConfig.from_json(json.load(fh))

    def to_json(self) -> dict:
        doc = asdict(self)
        if isinstance(doc.get("favorable"), tuple):
            doc["favorable"] = list(doc["favorable"])
        return doc

    def validate_paths(self):
        for name in ("schema", "train", "validation"):
            path = getattr(self, name)
            if not os.path.exists(path):
                raise SchemaError(f"{name} file not found: {path}")
        if self.oot and not os.path.exists(self.oot):
            raise SchemaError(f"oot file not found: {self.oot}")


ScanConfig.KEYS = set(ScanConfig.__dataclass_fields__) - {"KEYS"}


def _region_settings(config: ScanConfig) -> RegionSettings:
    return RegionSettings(lam_lo=config.lambda_lo, lam_hi=config.lambda_hi, side=config.side)


def _favorable_choice(config: ScanConfig):
    fav = config.favorable
    if isinstance(fav, list):
        return tuple(fav)
    return fav


@dataclass
class AuditSession:
    """Loaded artifacts shared by scan, What-If, slices and the service."""

    config: ScanConfig
    schema: Schema
    train: Dataset
    validation: Dataset
    oot: Dataset | None
    model: Model
    nice_cfg: NiceConfig
    context: SearchContext
    sigma: float | None
    settings: RegionSettings
    validation_predictions: list[Prediction] | None = None

    @staticmethod
    def open(config: ScanConfig, cached_train_predictions: list[Prediction] | None = None,
             ) -> "AuditSession":
        config.validate_paths()
        schema = load_schema(config.schema)
        train = load_csv(config.train, schema)
        validation = load_csv(config.validation, schema)
        oot = load_csv(config.oot, schema) if config.oot else None
        model = resolve_model(config.model, train, config.model_hyper or None,
                              batch_cap=config.batch_cap)
        stats = compute_norm_stats(train, config.norm_method)
        nice_cfg = NiceConfig(
            distance=DistanceConfig(norm_stats=stats, clamp_numeric=config.clamp_numeric),
            reward_mode=config.reward_mode,
            max_queries=config.max_queries,
            require_correct_neighbor=config.require_correct_neighbor,
        )
        context = SearchContext.build(train, model, nice_cfg, cached_train_predictions)
        sigma = None
        if not schema.target.is_classification:
            sigma = float(np.std(np.array(train.labels, dtype=float)))
        return AuditSession(config=config, schema=schema, train=train, validation=validation,
                            oot=oot, model=model, nice_cfg=nice_cfg, context=context,
                            sigma=sigma, settings=_region_settings(config))

    def metric_weights(self) -> MetricWeights:
        if self.config.metric_weights:
            return MetricWeights(dict(self.config.metric_weights))
        return MetricWeights.default_for(self.schema.target.task)

    def predict_validation(self) -> list[Prediction]:
        if self.validation_predictions is None:
            self.validation_predictions = self.model.predict_batch(self.validation.rows)
        return self.validation_predictions

    def close(self):
        closer = getattr(self.model, "close", None)
        if closer is not None:
            closer()


def _round6(value):
    if isinstance(value, float):
        return round(value, 6)
    return value


def _cf_digest(index: int, result: CounterfactualResult, schema: Schema) -> dict:
    changes = []
    for name in result.changed_features:
        j = schema.index(name)
        changes.append({
            "feature": name,
            "original": _round6(result.original[j]),
            "counterfactual": _round6(result.counterfactual[j]),
        })
    return {
        "row": index,
        "changes": changes,
        "n_changed": result.n_changed,
        "distance": _round6(result.distance),
        "query_count": result.query_count,
    }


def _stage(name, fn):
    try:
        return fn()
    except ComplaiError:
        raise
    except Exception as exc:  # pragma: no cover - defensive wrap
        raise PipelineError(name, exc) from exc


def scan(config: ScanConfig, session: AuditSession | None = None) -> dict:
    """Run the full audit pipeline and persist the report.

    Returns the report as a JSON-serializable dict; writes it to
    ``config.out`` plus an artifacts directory alongside.
    """
    started = time.time()
    session = session or AuditSession.open(config)
    schema, model = session.schema, session.model

    val_preds = session.predict_validation()
    _, results = generate_batch(session.validation.rows, session.context, session.settings,
                                session.sigma, config.parallelism, predictions=val_preds)
    ok = [(i, r) for i, r in enumerate(results) if r is not None]
    skipped = len(results) - len(ok)
    ok_results = [r for _, r in ok]
    if not ok_results:
        raise PipelineError("counterfactuals", NoUnlikeNeighbor(
            "no validation instance has a reachable counterfactual"))

    exp_cfg = (ExplainabilityConfig(tuple(config.explainability_weights))
               if config.explainability_weights else ExplainabilityConfig())
    exp_score = _stage("explainability", lambda: explainability_score(ok_results, exp_cfg))
    histogram = explainability_histogram(ok_results)
    attribution = _stage("importance", lambda: feature_importance(ok_results, schema))

    range_stats = (session.nice_cfg.distance.norm_stats
                   if config.norm_method == "range" else compute_norm_stats(session.train, "range"))
    pct_cfg = percentage_config(range_stats)
    if schema.target.is_classification:
        grouped: dict = {}
        for i, r in ok:
            grouped.setdefault(val_preds[i].label, []).append(r)
    else:
        grouped = {None: ok_results}
    robustness = _stage("robustness", lambda: robustness_scores(grouped, schema, pct_cfg))

    # Performance metrics need at least 2 rows; tinier validation sets keep
    # the rest of the scan and drop the component as not-applicable.
    weights = session.metric_weights()
    if len(session.validation) >= 2:
        performance = _stage("performance", lambda: performance_score(
            val_preds, session.validation.labels, weights, schema.target, schema.m))
        metric_values = {
            name: compute_metric(name, val_preds, session.validation.labels, schema.target, schema.m)
            for name in weights.weights
        }
    else:
        performance, metric_values = None, {}

    drift_report: DriftReport | None = None
    if session.oot is not None:
        drift_report = _stage("drift", lambda: oot_drift(
            model, session.train, session.oot, session.nice_cfg, config.drift_threshold,
            session.settings, session.sigma, config.parallelism, session.context))

    protected = config.protected if config.protected is not None else list(schema.protected)
    fairness_report: FlipTestReport | None = None
    if protected:
        fairness_report = _stage("fairness", lambda: fairness_audit(
            session.validation, protected, model, session.nice_cfg,
            favorable=_favorable_choice(config), mode=config.fairness_mode,
            settings=session.settings, sigma=session.sigma,
            parallelism=config.parallelism, intersectional=config.intersectional))

    card = ScoreCard(
        explainability=exp_score,
        robustness_avg=robustness.average,
        robustness_min=robustness.minimum,
        robustness_per_class=robustness.per_class,
        performance=performance,
        drift=None if drift_report is None else 100.0 * drift_report.score,
        fairness=None if fairness_report is None else fairness_report.score,
        trust_weights=dict(config.trust_weights or {}),
    )
    card.trust = _stage("trust", lambda: trust_factor(card))

    slices = []
    for doc in config.slice_queries:
        slices.append(slice_report(SliceQuery.from_json(doc), session))

    digests = [_cf_digest(i, r, schema) for i, r in ok]
    report = {
        "format": REPORT_FORMAT,
        "engine_version": engine_version,
        "config": config.to_json(),
        "scorecard": _jsonify(card.to_json()),
        "explainability": {"score": _round6(exp_score), "histogram": _jsonify(histogram)},
        "importance": _jsonify(attribution.to_json()),
        "robustness": _jsonify(robustness.to_json()),
        "performance": {"score": _round6(performance),
                        "metrics": _jsonify(metric_values),
                        "weights": _jsonify(weights.normalized())},
        "drift": None if drift_report is None else _jsonify(drift_report.to_json()),
        "fairness": None if fairness_report is None else _jsonify(fairness_report.to_json()),
        "counterfactuals": digests,
        "slices": slices,
        "skipped_instances": skipped,
        "totals": {"validation_rows": len(session.validation),
                   "model_queries": model.query_count},
        "timing": {"seconds": round(time.time() - started, 3)},
        "created_at": datetime.now(timezone.utc).isoformat(),
    }
    persist_report(report, config.out, session)
    return report


def _jsonify(obj):
    """Round floats and neutralize non-JSON scalars so reports serialize
    identically across runs."""
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, float):
        if obj == float("inf"):
            return "inf"
        if obj == float("-inf"):
            return "-inf"
        return round(obj, 6)
    return obj


def report_to_bytes(report: dict) -> bytes:
    return (json.dumps(report, indent=2, sort_keys=True) + "\n").encode("utf-8")


def persist_report(report: dict, out_path: str, session: AuditSession | None = None) -> None:
    out_dir = os.path.dirname(os.path.abspath(out_path))
    os.makedirs(out_dir, exist_ok=True)
    with open(out_path, "wb") as fh:
        fh.write(report_to_bytes(report))

    artifacts = artifacts_dir(out_path)
    os.makedirs(artifacts, exist_ok=True)
    with open(os.path.join(artifacts, "counterfactuals.jsonl"), "w", encoding="utf-8") as fh:
        for digest in report["counterfactuals"]:
            fh.write(json.dumps(digest, sort_keys=True) + "\n")
    if session is not None:
        with open(os.path.join(artifacts, "train_predictions.jsonl"), "w", encoding="utf-8") as fh:
            for pred in session.context.predictions:
                doc = {"label": pred.label, "value": pred.value,
                       "scores": list(pred.scores) if pred.scores else None}
                fh.write(json.dumps(doc, sort_keys=True) + "\n")


def artifacts_dir(out_path: str) -> str:
    base, _ = os.path.splitext(out_path)
    return base + ".artifacts"


def load_cached_train_predictions(out_path: str) -> list[Prediction] | None:
    path = os.path.join(artifacts_dir(out_path), "train_predictions.jsonl")
    if not os.path.exists(path):
        return None
    preds = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            doc = json.loads(line)
            preds.append(Prediction(
                label=doc.get("label"),
                value=doc.get("value"),
                scores=tuple(doc["scores"]) if doc.get("scores") else None,
            ))
    return preds


# --- policy gate ---------------------------------------------------------

GATE_ALIASES = {
    "robustness": "robustness_avg",
    "robustness_min": "robustness_min",
    "explainability": "explainability",
    "performance": "performance",
    "drift": "drift",
    "fairness": "fairness",
    "trust": "trust",
}


@dataclass(frozen=True)
class GateResult:
    passed: bool
    violations: tuple[dict, ...]

    def to_json(self) -> dict:
        return {"passed": self.passed, "violations": list(self.violations)}


def gate(report: dict, policy: dict) -> GateResult:
    """Check every policy threshold against the report's score card.

    A component fails when its score is below the threshold; components the
    policy does not mention, and components marked not-applicable in the
    report, are unconstrained.
    """
    if not isinstance(report, dict) or "scorecard" not in report:
        raise MalformedReport("report has no scorecard")
    if not isinstance(policy, dict) or not isinstance(policy.get("min_scores", {}), dict):
        raise MalformedPolicy("policy must carry a 'min_scores' object")
    card = report["scorecard"]

    violations = []
    for name, threshold in sorted(policy.get("min_scores", {}).items()):
        key = GATE_ALIASES.get(name)
        if key is None:
            raise MalformedPolicy(f"unknown policy component {name!r}")
        if not isinstance(threshold, (int, float)) or not (0 <= threshold <= 100):
            raise MalformedPolicy(f"threshold for {name!r} must be within [0, 100]")
        score = card.get(key)
        if score is not None and score < threshold:
            violations.append({"component": name, "score": score, "threshold": threshold})
    return GateResult(passed=not violations, violations=tuple(violations))


# --- What-If --------------------------------------------------------------


@dataclass(frozen=True)
class WhatIfResponse:
    prediction: dict
    diff: tuple[dict, ...]
    attribution: tuple[dict, ...]
    distance: float
    query_count: int

    def to_json(self) -> dict:
        return {
            "prediction": self.prediction,
            "diff": [dict(d) for d in self.diff],
            "attribution": [dict(a) for a in self.attribution],
            "distance": _round6(self.distance),
            "query_count": self.query_count,
        }


def _prediction_json(pred: Prediction) -> dict:
    return {
        "label": pred.label,
        "value": None if pred.value is None else _round6(pred.value),
        "scores": None if pred.scores is None else [_round6(s) for s in pred.scores],
    }


def _reference_score(pred: Prediction, session: AuditSession):
    """What the attribution deltas are measured on: the favorable-class score
    for classification (falling back to the instance's own predicted class
    when no favorable class is configured), the raw output for regression."""
    spec = session.schema.target
    if not spec.is_classification:
        return None, pred.value
    favorable = _favorable_choice(session.config)
    if not isinstance(favorable, str):
        favorable = spec.favorable if isinstance(spec.favorable, str) else None
    if favorable is None:
        favorable = spec.classes[-1] if spec.task == "binary" else pred.label
    idx = spec.classes.index(favorable)
    if pred.scores is None:
        return idx, None
    return idx, pred.scores[idx]


def whatif(instance, session: AuditSession) -> WhatIfResponse:
    """Predict an edited instance, find its nearest counterfactual, and rate
    every feature by the prediction shift caused by substituting the
    neighbor's value for it."""
    schema = session.schema
    x = schema.validate_instance(instance)
    pred = session.model.predict_one(x)
    region = target_region(pred, schema.target, session.settings.lam_lo,
                           session.settings.lam_hi, session.sigma, session.settings.side)
    result = generate_counterfactual(x, session.train, session.model, region,
                                     session.nice_cfg, session.context)

    diff = []
    for name in result.changed_features:
        j = schema.index(name)
        diff.append({"feature": name, "original": _round6(x[j]),
                     "counterfactual": _round6(result.counterfactual[j])})

    class_idx, base = _reference_score(pred, session)
    neighbor = result.neighbor
    probe_idx = [j for j in range(schema.m) if x[j] != neighbor[j]]
    probes = []
    for j in probe_idx:
        cand = list(x)
        cand[j] = neighbor[j]
        probes.append(tuple(cand))
    probe_preds = session.model.predict_batch(probes) if probes else []

    deltas = {j: 0.0 for j in range(schema.m)}
    for j, p in zip(probe_idx, probe_preds):
        if schema.target.is_classification:
            if base is None or p.scores is None:
                deltas[j] = 1.0 if p.label != pred.label else 0.0
            else:
                deltas[j] = p.scores[class_idx] - base
        else:
            deltas[j] = p.value - base

    attribution = []
    order = sorted(range(schema.m), key=lambda j: (-abs(deltas[j]), j))
    for j in order:
        d = deltas[j]
        attribution.append({
            "feature": schema.features[j].name,
            "delta": _round6(d),
            "group": "positive" if d > 0 else ("negative" if d < 0 else "zero"),
        })

    return WhatIfResponse(
        prediction=_prediction_json(pred),
        diff=tuple(diff),
        attribution=tuple(attribution),
        distance=result.distance,
        query_count=result.query_count,
    )


# --- slice reports ---------------------------------------------------------


def slice_report(query: SliceQuery, session: AuditSession,
                 weights: MetricWeights | None = None,
                 low_support_floor: int | None = None) -> dict:
    """Performance on a validation slice: blended score, each raw metric, the
    support count, and a low-support warning under the configured floor.
    An empty slice reports support 0 with undefined metrics."""
    floor = low_support_floor if low_support_floor is not None else session.config.low_support_floor
    weights = weights or session.metric_weights()
    indices = slice_indices(session.validation, query)
    preds = session.predict_validation()
    support = len(indices)
    doc = {
        "query": query.to_json(),
        "support": support,
        "low_support": support < floor,
        "score": None,
        "metrics": None,
    }
    if support < 2:
        return doc
    sliced_preds = [preds[i] for i in indices]
    sliced_labels = [session.validation.labels[i] for i in indices]
    spec = session.schema.target
    doc["score"] = _round6(performance_score(sliced_preds, sliced_labels, weights,
                                             spec, session.schema.m))
    doc["metrics"] = {
        name: _round6(compute_metric(name, sliced_preds, sliced_labels, spec, session.schema.m))
        for name in weights.weights
    }
    return doc
