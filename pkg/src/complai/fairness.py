"""Counterfactual flip-test fairness, disparate impact, and intersectional
analysis over protected attributes.

The flip-test asks whether a data point would have been treated differently
with a different protected-attribute value: each member of a subgroup is
matched to its nearest neighbor in the alternate group (1-NN under HEOM with
feature-wise mean-absolute-deviation normalization, the protected coordinate
excluded), and the net rate of favorable/unfavorable flips is charged against
the subgroup's fairness score.

Small datasets make real cross-group neighbors far away and the test noisy,
so the audit can first augment the data with synthetic counterfactuals that
keep their protected value; the alternate groups become denser and the
matched neighbors closer.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AllCellsEmpty,
    EmptyAlternateGroup,
    EmptyRange,
    EmptySubgroup,
    SchemaError,
    UndefinedRate,
    UnknownClass,
)
from .heom import DistanceConfig, EncodedFrame
from .models import Model, Prediction
from .nice import NiceConfig, RegionSettings, SearchContext, generate_batch
from .tabular import Dataset, NormStats, Schema, TargetSpec, compute_norm_stats

MODE_SYNTHETIC = "synthetic"
MODE_REAL = "real"


@dataclass(frozen=True)
class FavorableOutcome:
    """Binary partition of the outcome space: favorable (1) vs the rest (0)."""

    label: str | None = None
    lo: float | None = None
    hi: float | None = None

    def outcome(self, pred: Prediction) -> int:
        if self.label is not None:
            return 1 if pred.label == self.label else 0
        return 1 if self.lo <= pred.value <= self.hi else 0

    def describe(self):
        if self.label is not None:
            return self.label
        return [None if self.lo == float("-inf") else self.lo,
                None if self.hi == float("inf") else self.hi]


def adapt_favorable(spec: TargetSpec, choice) -> FavorableOutcome:
    """Turn a class label or a numeric range into an outcome partition."""
    if spec.is_classification:
        if not isinstance(choice, str):
            raise UnknownClass(f"classification favorable outcome must be a class label, got {choice!r}")
        if choice not in spec.classes:
            raise UnknownClass(f"{choice!r} is not a declared class")
        return FavorableOutcome(label=choice)
    try:
        lo, hi = choice
    except (TypeError, ValueError):
        raise EmptyRange(f"regression favorable outcome must be a (lo, hi) range, got {choice!r}") from None
    lo = float("-inf") if lo is None else float(lo)
    hi = float("inf") if hi is None else float(hi)
    if lo > hi:
        raise EmptyRange(f"favorable range ({lo}, {hi}) is empty")
    return FavorableOutcome(lo=lo, hi=hi)


def default_favorable_choices(spec: TargetSpec, configured=None) -> list[FavorableOutcome]:
    """The favorable outcomes a scan iterates: the configured one for binary
    and regression, every class in turn for multiclass."""
    if spec.task == "multiclass":
        return [FavorableOutcome(label=c) for c in spec.classes]
    if spec.task == "binary":
        choice = configured if configured is not None else (spec.favorable or spec.classes[-1])
        return [adapt_favorable(spec, choice)]
    choice = configured if configured is not None else spec.favorable
    if choice is None:
        raise EmptyRange("regression fairness needs a favorable prediction range")
    return [adapt_favorable(spec, choice)]


# --- synthetic counterfactual augmentation -------------------------------


@dataclass(frozen=True)
class AugmentationStats:
    original: int
    synthetic: int
    total: int
    skipped: int

    def to_json(self) -> dict:
        return {"original": self.original, "synthetic": self.synthetic,
                "total": self.total, "skipped": self.skipped}


def _group_indices(data: Dataset, attrs: list[str]) -> dict[tuple, list[int]]:
    cols = [data.schema.index(a) for a in attrs]
    groups: dict[tuple, list[int]] = {}
    for i, row in enumerate(data.rows):
        groups.setdefault(tuple(row[c] for c in cols), []).append(i)
    return groups


def synth_cf_augment(data: Dataset, p: str | list[str], model: Model, cfg: NiceConfig,
                     settings: RegionSettings = RegionSettings(), sigma: float | None = None,
                     parallelism: int = 1, context: SearchContext | None = None,
                     generated=None) -> tuple[Dataset, AugmentationStats]:
    """Augment ``data`` with synthetic counterfactuals whose protected
    value(s) stayed put.

    Every row gets a counterfactual against the full dataset as neighbor
    pool; a synthetic is kept only if it left the protected coordinate(s)
    unchanged, so it lands in its source subgroup. Synthetics identical to an
    existing row (or to each other) are dropped to keep the later 1-NN step
    free of self-matches. Synthetic rows carry the model's prediction as
    label; the flip-test only consumes model outcomes.
    """
    attrs = [p] if isinstance(p, str) else list(p)
    if len(data) == 0:
        raise EmptySubgroup("cannot augment an empty dataset")
    for a in attrs:
        if a not in data.schema.protected:
            raise SchemaError(f"{a!r} is not a declared protected attribute")
    cols = [data.schema.index(a) for a in attrs]

    if generated is not None:
        results = generated
    else:
        ctx = context or SearchContext.build(data, model, cfg)
        _, results = generate_batch(data.rows, ctx, settings, sigma, parallelism,
                                    predictions=ctx.predictions)

    seen = set(data.rows)
    synthetics = []
    skipped = 0
    for i, result in enumerate(results):
        if result is None:
            skipped += 1
            continue
        cf = result.counterfactual
        if any(cf[c] != data.rows[i][c] for c in cols):
            continue
        if cf in seen:
            continue
        seen.add(cf)
        synthetics.append(cf)

    synth_preds = model.predict_batch(synthetics)
    rows = list(data.rows) + synthetics
    labels = list(data.labels) + [
        p.label if p.label is not None else p.value for p in synth_preds
    ]
    augmented = Dataset(schema=data.schema, rows=rows, labels=labels)
    stats = AugmentationStats(original=len(data), synthetic=len(synthetics),
                              total=len(rows), skipped=skipped)
    return augmented, stats


# --- flip test ------------------------------------------------------------


@dataclass(frozen=True)
class SubgroupResult:
    attribute: str
    value: object  # token, or tuple of tokens for intersectional cells
    size: int
    f_plus: int
    f_minus: int
    flip_rate: float
    fairness: float

    def to_json(self) -> dict:
        value = list(self.value) if isinstance(self.value, tuple) else self.value
        return {"attribute": self.attribute, "value": value, "size": self.size,
                "f_plus": self.f_plus, "f_minus": self.f_minus,
                "flip_rate": self.flip_rate, "fairness": self.fairness}


@dataclass(frozen=True)
class FlipTestOutcome:
    """One attribute (or composite) tested against one favorable outcome."""

    attribute: str
    favorable: object
    subgroups: tuple[SubgroupResult, ...]
    score: float  # min subgroup fairness
    skipped_cells: tuple = ()

    def to_json(self) -> dict:
        return {
            "attribute": self.attribute,
            "favorable": self.favorable,
            "subgroups": [s.to_json() for s in self.subgroups],
            "score": self.score,
            "skipped_cells": [list(c) if isinstance(c, tuple) else c for c in self.skipped_cells],
        }


def _mad_distance_config(X: Dataset) -> DistanceConfig:
    return DistanceConfig(norm_stats=compute_norm_stats(X, "mad"), aggregation="euclidean")


def _nearest_alternate(frame: EncodedFrame, X: Dataset, cfg: DistanceConfig,
                       member_idx: list[int], alternate_mask: np.ndarray,
                       skip: frozenset[int]) -> list[int]:
    out = []
    for i in member_idx:
        dists = frame.distances_from(X.rows[i], cfg, skip=skip)
        dists = np.where(alternate_mask, dists, np.inf)
        out.append(int(np.argmin(dists)))
    return out


def flip_test(X: Dataset, p: str | list[str], model: Model, favorable: FavorableOutcome,
              cfg: DistanceConfig | None = None,
              predictions: list[Prediction] | None = None) -> FlipTestOutcome:
    """Exact 1-NN flip-test for one protected attribute (or a composite of
    several). ``cfg`` defaults to HEOM with feature-wise MAD computed over
    ``X``; the protected coordinate(s) never enter the distance."""
    attrs = [p] if isinstance(p, str) else list(p)
    name = "×".join(attrs)
    cols = [X.schema.index(a) for a in attrs]
    skip = frozenset(cols)
    if cfg is None:
        cfg = _mad_distance_config(X)
    if predictions is None:
        predictions = model.predict_batch(X.rows)
    outcomes = np.array([favorable.outcome(pr) for pr in predictions], dtype=np.int64)

    groups = _group_indices(X, attrs)
    if len(groups) < 2:
        raise EmptyAlternateGroup(f"attribute {name!r} has a single value in the data")

    frame = EncodedFrame.from_dataset(X)
    group_of = np.empty(len(X), dtype=np.int64)
    for g, (_, idx) in enumerate(sorted(groups.items(), key=lambda kv: kv[0])):
        group_of[idx] = g

    subgroups = []
    for g, (value, member_idx) in enumerate(sorted(groups.items(), key=lambda kv: kv[0])):
        alternate = group_of != g
        nn = _nearest_alternate(frame, X, cfg, member_idx, alternate, skip)
        f_plus = f_minus = 0
        for i, j in zip(member_idx, nn):
            if outcomes[i] == 0 and outcomes[j] == 1:
                f_plus += 1
            elif outcomes[i] == 1 and outcomes[j] == 0:
                f_minus += 1
        size = len(member_idx)
        ft = abs(f_plus - f_minus) / size
        subgroups.append(SubgroupResult(
            attribute=name,
            value=value[0] if len(attrs) == 1 else value,
            size=size, f_plus=f_plus, f_minus=f_minus,
            flip_rate=ft, fairness=(1.0 - ft) * 100.0,
        ))

    return FlipTestOutcome(
        attribute=name,
        favorable=favorable.describe(),
        subgroups=tuple(subgroups),
        score=min(s.fairness for s in subgroups),
    )


# --- disparate impact ------------------------------------------------------


@dataclass(frozen=True)
class DisparateImpact:
    per_facet: dict  # facet value -> DI ratio
    final: float  # min DI / max DI

    def to_json(self) -> dict:
        return {"per_facet": {str(k): v for k, v in self.per_facet.items()}, "final": self.final}


def combine_di(ratios) -> float:
    """Fold per-facet DI ratios into the final min/max score."""
    ratios = list(ratios)
    if not ratios:
        raise UndefinedRate("no facet ratios to combine")
    return min(ratios) / max(ratios)


def disparate_impact(X: Dataset, p: str, model: Model, favorable: FavorableOutcome,
                     predictions: list[Prediction] | None = None) -> DisparateImpact:
    """Favorable-rate ratio of each facet against its complement; the final
    score is the min/max ratio across facets."""
    if predictions is None:
        predictions = model.predict_batch(X.rows)
    outcomes = np.array([favorable.outcome(pr) for pr in predictions], dtype=np.float64)
    col = X.schema.index(p)
    values = sorted({row[col] for row in X.rows})
    if len(values) < 2:
        raise EmptyAlternateGroup(f"attribute {p!r} has a single value in the data")

    per_facet = {}
    for v in values:
        mask = np.array([row[col] == v for row in X.rows])
        rate = float(outcomes[mask].mean())
        comp = float(outcomes[~mask].mean())
        if comp == 0.0:
            if rate == 0.0:
                raise UndefinedRate(f"facet {v!r}: favorable rate is 0 on both sides")
            per_facet[v] = float("inf")
        else:
            per_facet[v] = rate / comp

    return DisparateImpact(per_facet=per_facet, final=combine_di(per_facet.values()))


# --- intersectional + audit assembly ---------------------------------------


def intersectional_fairness(X: Dataset, attrs: list[str], model: Model,
                            favorable: FavorableOutcome, cfg: DistanceConfig | None = None,
                            predictions: list[Prediction] | None = None) -> FlipTestOutcome:
    """Flip-test over the cross product of several protected attributes.

    Cells of the cross product with no rows are skipped and reported; a
    single-attribute list degenerates to the plain flip-test.
    """
    if len(X) == 0:
        raise AllCellsEmpty("no rows to analyze")
    outcome = flip_test(X, attrs, model, favorable, cfg, predictions)
    value_sets = [sorted({row[X.schema.index(a)] for row in X.rows}) for a in attrs]
    present = {tuple(s.value) if isinstance(s.value, tuple) else (s.value,) for s in outcome.subgroups}
    skipped = []

    def walk(prefix, rest):
        if not rest:
            if tuple(prefix) not in present:
                skipped.append(tuple(prefix))
            return
        for v in rest[0]:
            walk(prefix + [v], rest[1:])

    walk([], value_sets)
    for cell in skipped:
        warnings.warn(f"intersectional cell {cell!r} has no rows; skipped")
    return FlipTestOutcome(attribute=outcome.attribute, favorable=outcome.favorable,
                           subgroups=outcome.subgroups, score=outcome.score,
                           skipped_cells=tuple(skipped))


@dataclass(frozen=True)
class AttributeFairness:
    attribute: str
    augmentation: AugmentationStats | None
    tests: tuple[FlipTestOutcome, ...]
    score: float  # min across tests
    disparate_impact: DisparateImpact | None

    def to_json(self) -> dict:
        return {
            "attribute": self.attribute,
            "augmentation": self.augmentation.to_json() if self.augmentation else None,
            "tests": [t.to_json() for t in self.tests],
            "score": self.score,
            "disparate_impact": self.disparate_impact.to_json() if self.disparate_impact else None,
        }


@dataclass(frozen=True)
class FlipTestReport:
    mode: str
    attributes: tuple[AttributeFairness, ...]
    score: float  # min across attributes
    intersectional: AttributeFairness | None = None

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "attributes": [a.to_json() for a in self.attributes],
            "score": self.score,
            "intersectional": self.intersectional.to_json() if self.intersectional else None,
        }


def _audit_attribute(data: Dataset, attrs: list[str], model: Model,
                     favorables: list[FavorableOutcome], cfg: NiceConfig, mode: str,
                     settings: RegionSettings, sigma: float | None, parallelism: int,
                     context: SearchContext | None, intersectional: bool,
                     generated=None) -> AttributeFairness:
    if mode == MODE_SYNTHETIC:
        X, stats = synth_cf_augment(data, attrs if len(attrs) > 1 else attrs[0], model, cfg,
                                    settings, sigma, parallelism, context, generated=generated)
    else:
        X, stats = data, None
    predictions = model.predict_batch(X.rows)

    tests = []
    di = None
    for fav in favorables:
        if intersectional:
            outcome = intersectional_fairness(X, attrs, model, fav, predictions=predictions)
        else:
            outcome = flip_test(X, attrs[0] if len(attrs) == 1 else attrs, model, fav,
                                predictions=predictions)
        tests.append(outcome)
        if len(attrs) == 1:
            try:
                candidate = disparate_impact(X, attrs[0], model, fav, predictions=predictions)
            except UndefinedRate:
                candidate = None
            if candidate is not None and (di is None or candidate.final < di.final):
                di = candidate
    return AttributeFairness(
        attribute="×".join(attrs),
        augmentation=stats,
        tests=tuple(tests),
        score=min(t.score for t in tests),
        disparate_impact=di,
    )


def fairness_audit(data: Dataset, protected: list[str], model: Model, cfg: NiceConfig,
                   favorable=None, mode: str = MODE_SYNTHETIC,
                   settings: RegionSettings = RegionSettings(), sigma: float | None = None,
                   parallelism: int = 1, context: SearchContext | None = None,
                   intersectional: bool = False) -> FlipTestReport:
    """Full fairness pass: per-attribute flip-tests (every class in turn for
    multiclass targets) plus disparate impact, optionally preceded by
    synthetic augmentation and followed by an intersectional cross-product
    test when two or more attributes are given."""
    if mode not in (MODE_SYNTHETIC, MODE_REAL):
        raise SchemaError(f"unknown fairness mode {mode!r}")
    if not protected:
        raise SchemaError("fairness audit needs at least one protected attribute")
    favorables = default_favorable_choices(data.schema.target, favorable)
    if sigma is None and not data.schema.target.is_classification:
        sigma = float(np.std(np.array(data.labels, dtype=float)))
    generated = None
    if mode == MODE_SYNTHETIC:
        # One counterfactual per row serves every attribute; only the
        # keep-protected-value filter differs between attributes.
        if context is None:
            context = SearchContext.build(data, model, cfg)
        _, generated = generate_batch(data.rows, context, settings, sigma, parallelism,
                                      predictions=context.predictions)

    attributes = []
    for p in protected:
        attributes.append(_audit_attribute(data, [p], model, favorables, cfg, mode,
                                           settings, sigma, parallelism, context, False,
                                           generated=generated))
    cross = None
    if intersectional and len(protected) >= 2:
        cross = _audit_attribute(data, list(protected), model, favorables, cfg, mode,
                                 settings, sigma, parallelism, context, True,
                                 generated=generated)
    elif intersectional:
        cross = attributes[0]

    return FlipTestReport(
        mode=mode,
        attributes=tuple(attributes),
        score=min(a.score for a in attributes),
        intersectional=cross,
    )
