"""Nearest-counterfactual generation.

The search picks the nearest unlike neighbor (closest training instance whose
prediction falls in the target region and, by default, whose true label agrees
with its prediction), then greedily substitutes feature values from that
neighbor into the query instance until the hybrid's prediction enters the
region. Every counterfactual value therefore occurs in a real instance, which
is what keeps the explanations plausible.

Target regions cover all three tasks: the complement class (binary), any other
class (multiclass), and predictions outside a closed tolerance band around the
original output (regression), optionally one-sided.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MissingTolerance, NoUnlikeNeighbor, QueryBudgetExceeded, SchemaError
from .heom import DistanceConfig, EncodedFrame, heom
from .models import Model, Prediction
from .tabular import Dataset, Instance, TargetSpec

SIDE_BOTH = "both"
SIDE_ABOVE = "above_only"
SIDE_BELOW = "below_only"

SPARSITY = "sparsity"
PROXIMITY = "proximity"


@dataclass(frozen=True)
class TargetRegion:
    """Acceptance test for counterfactual predictions."""

    task: str
    original_label: str | None = None
    original_value: float | None = None
    lo: float | None = None
    hi: float | None = None
    side: str = SIDE_BOTH

    def contains(self, pred: Prediction) -> bool:
        if self.task in ("binary", "multiclass"):
            return pred.label != self.original_label
        v = pred.value
        if self.side == SIDE_ABOVE:
            return v > self.hi
        if self.side == SIDE_BELOW:
            return v < self.lo
        return v < self.lo or v > self.hi

    def contains_value(self, value: float) -> bool:
        return self.contains(Prediction(value=value))


def target_region(pred_x0: Prediction, spec: TargetSpec, lam_lo: float | None = None,
                  lam_hi: float | None = None, sigma: float | None = None,
                  side: str = SIDE_BOTH) -> TargetRegion:
    """Build the acceptance region around an original prediction.

    Classification ignores the tolerances. Regression accepts predictions
    strictly outside the closed band
    ``[v - lam_lo * sigma, v + lam_hi * sigma]`` (band endpoints rejected),
    restricted to one tail when ``side`` says so.
    """
    if side not in (SIDE_BOTH, SIDE_ABOVE, SIDE_BELOW):
        raise SchemaError(f"unknown side {side!r}")
    if spec.is_classification:
        return TargetRegion(task=spec.task, original_label=pred_x0.label)
    if lam_lo is None or lam_hi is None or sigma is None:
        raise MissingTolerance("regression regions need both tolerances and the target std")
    if lam_lo < 0 or lam_hi < 0 or sigma < 0:
        raise SchemaError("tolerances and std must be nonnegative")
    v = pred_x0.value
    return TargetRegion(task="regression", original_value=v,
                        lo=v - lam_lo * sigma, hi=v + lam_hi * sigma, side=side)


@dataclass(frozen=True)
class NiceConfig:
    distance: DistanceConfig
    reward_mode: str = SPARSITY
    max_queries: int | None = None
    require_correct_neighbor: bool = True

    def __post_init__(self):
        if self.reward_mode not in (SPARSITY, PROXIMITY):
            raise SchemaError(f"unknown reward mode {self.reward_mode!r}")


@dataclass(frozen=True)
class CounterfactualResult:
    original: Instance
    counterfactual: Instance
    changed_features: tuple[str, ...]
    distance: float
    query_count: int
    neighbor: Instance

    @property
    def n_changed(self) -> int:
        return len(self.changed_features)


@dataclass
class SearchContext:
    """Per-scan cache: encoded training rows plus their predictions, so the
    neighbor scan costs one batched model call for the whole audit."""

    train: Dataset
    model: Model
    cfg: NiceConfig
    frame: EncodedFrame
    predictions: list[Prediction]
    pred_labels: np.ndarray | None = field(default=None)   # classification
    pred_values: np.ndarray | None = field(default=None)   # regression
    true_match: np.ndarray | None = field(default=None)    # label == prediction
    true_values: np.ndarray | None = field(default=None)

    @staticmethod
    def build(train: Dataset, model: Model, cfg: NiceConfig,
              predictions: list[Prediction] | None = None) -> "SearchContext":
        if predictions is None:
            predictions = model.predict_batch(train.rows)
        ctx = SearchContext(train=train, model=model, cfg=cfg,
                            frame=EncodedFrame.from_dataset(train), predictions=predictions)
        if train.schema.target.is_classification:
            ctx.pred_labels = np.array([p.label for p in predictions], dtype=object)
            truth = np.array(train.labels, dtype=object)
            ctx.true_match = ctx.pred_labels == truth
        else:
            ctx.pred_values = np.array([p.value for p in predictions], dtype=np.float64)
            ctx.true_values = np.array(train.labels, dtype=np.float64)
        return ctx


def _region_mask(ctx: SearchContext, region: TargetRegion) -> np.ndarray:
    if region.task in ("binary", "multiclass"):
        mask = ctx.pred_labels != region.original_label
        if ctx.cfg.require_correct_neighbor:
            mask = mask & ctx.true_match
        return mask
    if region.side == SIDE_ABOVE:
        mask = ctx.pred_values > region.hi
        truth_ok = ctx.true_values > region.hi
    elif region.side == SIDE_BELOW:
        mask = ctx.pred_values < region.lo
        truth_ok = ctx.true_values < region.lo
    else:
        mask = (ctx.pred_values < region.lo) | (ctx.pred_values > region.hi)
        truth_ok = (ctx.true_values < region.lo) | (ctx.true_values > region.hi)
    if ctx.cfg.require_correct_neighbor:
        mask = mask & truth_ok
    return mask


def _select_neighbor(x: Instance, region: TargetRegion, ctx: SearchContext) -> tuple[int, float]:
    mask = _region_mask(ctx, region)
    if not mask.any():
        raise NoUnlikeNeighbor("no training instance predicts into the target region")
    dists = ctx.frame.distances_from(x, ctx.cfg.distance)
    dists = np.where(mask, dists, np.inf)
    idx = int(np.argmin(dists))  # first minimum: lowest row index wins ties
    return idx, float(dists[idx])


def nearest_unlike_neighbor(x: Instance, train: Dataset, model: Model, region: TargetRegion,
                            cfg: NiceConfig, context: SearchContext | None = None) -> Instance:
    """The training instance closest to ``x`` that qualifies as a
    counterfactual anchor."""
    ctx = context or SearchContext.build(train, model, cfg)
    idx, _ = _select_neighbor(x, region, ctx)
    return train.rows[idx]


def _have_scores(task: str, preds: list[Prediction]) -> bool:
    if task == "regression":
        return True
    return all(p.scores is not None for p in preds)


def generate_counterfactual(x: Instance, train: Dataset, model: Model, region: TargetRegion,
                            cfg: NiceConfig, context: SearchContext | None = None) -> CounterfactualResult:
    """Greedy hybrid search from ``x`` toward its nearest unlike neighbor.

    Each round substitutes one remaining neighbor value into the hybrid: all
    single-substitution candidates are batch-predicted, the one with the best
    reward wins (ties to the lowest feature index), and the search stops at
    the first hybrid predicted inside the region. The hybrid reaches the
    neighbor itself after at most one round per differing feature, so the
    search always terminates.
    """
    schema = train.schema
    queries = 0
    ctx = context
    if ctx is None:
        budget = cfg.max_queries
        if budget is not None and len(train) > budget:
            raise QueryBudgetExceeded(f"neighbor scan alone needs {len(train)} queries, budget is {budget}")
        ctx = SearchContext.build(train, model, cfg)
        queries += len(train)

    nn_idx, _ = _select_neighbor(x, region, ctx)
    x_nn = train.rows[nn_idx]
    delta = [j for j in range(schema.m) if x[j] != x_nn[j]]
    if not delta:
        raise NoUnlikeNeighbor("nearest unlike neighbor is value-identical to the instance")

    fx0_value = region.original_value
    orig_class_idx = None
    if region.task != "regression":
        orig_class_idx = schema.target.classes.index(region.original_label)

    h = list(x)
    substituted: list[int] = []
    while delta:
        candidates = []
        for j in delta:
            cand = list(h)
            cand[j] = x_nn[j]
            candidates.append(tuple(cand))
        if cfg.max_queries is not None and queries + len(candidates) > cfg.max_queries:
            raise QueryBudgetExceeded(
                f"query budget {cfg.max_queries} hit before reaching the target region")
        preds = ctx.model.predict_batch(candidates)
        queries += len(candidates)

        if _have_scores(region.task, preds):
            if region.task == "regression":
                progress = [abs(p.value - fx0_value) for p in preds]
            else:
                progress = [1.0 - p.scores[orig_class_idx] for p in preds]
            if cfg.reward_mode == PROXIMITY:
                d_h = heom(x, tuple(h), schema, cfg.distance)
                rewards = []
                for cand, prog in zip(candidates, progress):
                    increment = heom(x, cand, schema, cfg.distance) - d_h
                    rewards.append(prog / increment if increment > 0 else float("inf"))
            else:
                rewards = progress
            winner = 0
            for i in range(1, len(rewards)):
                if rewards[i] > rewards[winner]:
                    winner = i
        else:
            entering = [i for i, p in enumerate(preds) if region.contains(p)]
            if entering:
                winner = entering[0]
            else:
                winner = 0
                best_d = heom(x, candidates[0], schema, cfg.distance)
                for i in range(1, len(candidates)):
                    d = heom(x, candidates[i], schema, cfg.distance)
                    if d < best_d:
                        winner, best_d = i, d

        h = list(candidates[winner])
        substituted.append(delta.pop(winner))
        if region.contains(preds[winner]):
            cf = tuple(h)
            changed = tuple(schema.features[j].name for j in sorted(substituted))
            return CounterfactualResult(
                original=tuple(x),
                counterfactual=cf,
                changed_features=changed,
                distance=heom(x, cf, schema, cfg.distance),
                query_count=queries,
                neighbor=x_nn,
            )

    raise NoUnlikeNeighbor("exhausted substitutions without entering the target region")


@dataclass(frozen=True)
class RegionSettings:
    """Regression band parameters; ignored for classification tasks."""

    lam_lo: float = 1.0
    lam_hi: float = 1.0
    side: str = SIDE_BOTH


def generate_batch(rows, ctx: SearchContext, settings: RegionSettings = RegionSettings(),
                   sigma: float | None = None, parallelism: int = 1,
                   predictions: list[Prediction] | None = None,
                   ) -> tuple[list[Prediction], list[CounterfactualResult | None]]:
    """Counterfactuals for many rows against one shared search context.

    Rows without a reachable counterfactual yield ``None`` instead of a
    result. Work is independent per row; with ``parallelism > 1`` rows are
    farmed out to a thread pool and merged back by row index, so the output
    is identical to the serial order.
    """
    spec = ctx.train.schema.target
    if predictions is None:
        predictions = ctx.model.predict_batch(list(rows))

    def one(i: int) -> CounterfactualResult | None:
        region = target_region(predictions[i], spec, settings.lam_lo, settings.lam_hi,
                               sigma, settings.side)
        try:
            return generate_counterfactual(rows[i], ctx.train, ctx.model, region, ctx.cfg, ctx)
        except NoUnlikeNeighbor:
            return None

    if parallelism <= 1 or len(rows) < 2:
        results = [one(i) for i in range(len(rows))]
    else:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(one, range(len(rows))))
    return predictions, results
