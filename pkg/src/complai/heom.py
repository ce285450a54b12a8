"""Heterogeneous Euclidean Overlap Measurement distance.

Per feature: categorical values compare 0/1 (overlap); numerical values
contribute |x - c| / eta(F), where eta is the configured spread statistic of
the training split. A feature whose training spread is 0 is treated like a
categorical (0 when equal, 1 otherwise): any difference on a constant-in-
training feature is maximally surprising, and it avoids dividing by zero.

Two aggregations across features:

* ``euclidean`` — sqrt(sum of squared per-feature distances); the metric used
  by counterfactual search and the fairness flip-test.
* ``mean_clamped`` — per-feature distances capped at 1 and averaged, which
  lands in [0, 1]; used only to put robustness on a percentage scale. It
  requires the range normalizer, since the other normalizers do not bound
  per-feature distances by the data spread.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SchemaError
from .tabular import CATEGORICAL, Dataset, FeatureSpec, Instance, NormStats, Schema

EUCLIDEAN = "euclidean"
MEAN_CLAMPED = "mean_clamped"


@dataclass(frozen=True)
class DistanceConfig:
    norm_stats: NormStats
    aggregation: str = EUCLIDEAN
    clamp_numeric: bool = False

    def __post_init__(self):
        if self.aggregation not in (EUCLIDEAN, MEAN_CLAMPED):
            raise SchemaError(f"unknown aggregation {self.aggregation!r}")
        if self.aggregation == MEAN_CLAMPED:
            if not self.clamp_numeric:
                raise SchemaError("mean_clamped aggregation requires clamp_numeric")
            if self.norm_stats.method != "range":
                raise SchemaError("mean_clamped aggregation requires the range normalizer")


def percentage_config(norm_stats_range: NormStats) -> DistanceConfig:
    """The [0, 1]-bounded configuration used for robustness percentages."""
    if norm_stats_range.method != "range":
        raise SchemaError("percentage scale needs range-normalized statistics")
    return DistanceConfig(norm_stats=norm_stats_range, aggregation=MEAN_CLAMPED, clamp_numeric=True)


def heom_feature(x_j, c_j, spec: FeatureSpec, cfg: DistanceConfig) -> float:
    """Distance contribution of a single feature."""
    if spec.kind == CATEGORICAL:
        return 0.0 if x_j == c_j else 1.0
    eta = cfg.norm_stats.normalizer(spec.name)
    if eta == 0.0:
        return 0.0 if x_j == c_j else 1.0
    d = abs(float(x_j) - float(c_j)) / eta
    if cfg.clamp_numeric:
        d = min(d, 1.0)
    return d


def heom(x: Instance, c: Instance, schema: Schema, cfg: DistanceConfig) -> float:
    """Aggregate HEOM distance between two instances."""
    per_feature = [heom_feature(xj, cj, spec, cfg) for xj, cj, spec in zip(x, c, schema.features)]
    if cfg.aggregation == EUCLIDEAN:
        return float(np.sqrt(sum(d * d for d in per_feature)))
    return float(sum(per_feature) / schema.m)


class EncodedFrame:
    """Columnar view of a row set for vectorized one-vs-many HEOM queries.

    Categorical columns are integer-coded; a query token outside the stored
    vocabulary is unequal to every row, matching the scalar semantics for
    unseen categories.
    """

    def __init__(self, schema: Schema, rows):
        self.schema = schema
        self.n = len(rows)
        self._num: dict[int, np.ndarray] = {}
        self._codes: dict[int, np.ndarray] = {}
        self._vocab: dict[int, dict] = {}
        for j, spec in enumerate(schema.features):
            if spec.kind == CATEGORICAL:
                vocab: dict = {}
                codes = np.empty(self.n, dtype=np.int64)
                for i, row in enumerate(rows):
                    codes[i] = vocab.setdefault(row[j], len(vocab))
                self._codes[j] = codes
                self._vocab[j] = vocab
            else:
                self._num[j] = np.fromiter((row[j] for row in rows), dtype=np.float64, count=self.n)

    @classmethod
    def from_dataset(cls, data: Dataset) -> "EncodedFrame":
        return cls(data.schema, data.rows)

    def distances_from(self, x: Instance, cfg: DistanceConfig, skip: frozenset[int] = frozenset()) -> np.ndarray:
        """HEOM distance from ``x`` to every stored row; features whose index
        is in ``skip`` are left out of the aggregation."""
        if self.n == 0:
            return np.zeros(0, dtype=np.float64)
        euclid = cfg.aggregation == EUCLIDEAN
        total = np.zeros(self.n, dtype=np.float64)
        used = 0
        for j, spec in enumerate(self.schema.features):
            if j in skip:
                continue
            used += 1
            if spec.kind == CATEGORICAL:
                code = self._vocab[j].get(x[j], -1)
                d = (self._codes[j] != code).astype(np.float64)
            else:
                eta = cfg.norm_stats.normalizer(spec.name)
                col = self._num[j]
                if eta == 0.0:
                    d = (col != float(x[j])).astype(np.float64)
                else:
                    d = np.abs(col - float(x[j])) / eta
                    if cfg.clamp_numeric:
                        np.minimum(d, 1.0, out=d)
            total += d * d if euclid else d
        if euclid:
            return np.sqrt(total)
        return total / max(used, 1)
