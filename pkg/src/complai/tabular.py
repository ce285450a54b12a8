"""Typed heterogeneous tabular data: schemas, CSV ingestion, normalization
statistics and slice filtering.

Datasets and schemas are immutable after construction and safe for concurrent
reads. An instance is a plain tuple aligned to the schema's feature order,
holding a category token (str) or a finite float per position.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

from .errors import (
    BadPredicate,
    EmptyDataset,
    MissingColumn,
    ParseError,
    SchemaError,
    SchemaViolation,
    UnknownClassLabel,
)

CATEGORICAL = "categorical"
NUMERICAL = "numerical"

TASKS = ("binary", "multiclass", "regression")

Value = Union[str, float]
Instance = tuple  # tuple[Value, ...], aligned to Schema.features


@dataclass(frozen=True)
class FeatureSpec:
    """One column of the feature space."""

    name: str
    kind: str
    allowed_values: tuple[str, ...] | None = None
    bounds: tuple[float, float] | None = None

    def __post_init__(self):
        if self.kind not in (CATEGORICAL, NUMERICAL):
            raise SchemaError(f"feature {self.name!r}: unknown kind {self.kind!r}")
        if self.allowed_values is not None and self.kind != CATEGORICAL:
            raise SchemaError(f"feature {self.name!r}: allowed_values only valid for categorical features")
        if self.bounds is not None:
            if self.kind != NUMERICAL:
                raise SchemaError(f"feature {self.name!r}: bounds only valid for numerical features")
            if self.bounds[0] > self.bounds[1]:
                raise SchemaError(f"feature {self.name!r}: bounds out of order")


@dataclass(frozen=True)
class TargetSpec:
    """Prediction target: name, task kind and class labels where relevant.

    ``favorable`` is an optional favorable outcome: a class label for
    classification or an inclusive ``(lo, hi)`` range for regression
    (either side may be ``-inf`` / ``inf``).
    """

    name: str
    task: str
    classes: tuple[str, ...] | None = None
    favorable: str | tuple[float, float] | None = None

    def __post_init__(self):
        if self.task not in TASKS:
            raise SchemaError(f"unknown task {self.task!r}")
        if self.task == "binary":
            if self.classes is None or len(self.classes) != 2:
                raise SchemaError("binary task requires exactly 2 classes")
        elif self.task == "multiclass":
            if self.classes is None or len(self.classes) < 3:
                raise SchemaError("multiclass task requires at least 3 classes")
        else:
            if self.classes is not None:
                raise SchemaError("regression task takes no classes")
        if self.classes is not None and len(set(self.classes)) != len(self.classes):
            raise SchemaError("duplicate class labels")

    @property
    def is_classification(self) -> bool:
        return self.task in ("binary", "multiclass")


@dataclass(frozen=True)
class Schema:
    """Ordered feature list plus target; feature order is the canonical
    CSV/wire order."""

    features: tuple[FeatureSpec, ...]
    target: TargetSpec
    protected: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.features) < 1:
            raise SchemaError("schema needs at least one feature")
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate feature names")
        if self.target.name in names:
            raise SchemaError("target name collides with a feature name")
        for p in self.protected:
            spec = self.find(p)
            if spec is None:
                raise SchemaError(f"protected attribute {p!r} is not a declared feature")
            if spec.kind != CATEGORICAL:
                raise SchemaError(f"protected attribute {p!r} must be categorical (discretize first)")

    @property
    def m(self) -> int:
        return len(self.features)

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    def find(self, name: str) -> FeatureSpec | None:
        for f in self.features:
            if f.name == name:
                return f
        return None

    def index(self, name: str) -> int:
        for i, f in enumerate(self.features):
            if f.name == name:
                return i
        raise SchemaError(f"unknown feature {name!r}")

    def validate_instance(self, values: Sequence[Value]) -> Instance:
        """Check one row against the schema and return it as a tuple."""
        if len(values) != self.m:
            raise SchemaViolation(f"expected {self.m} values, got {len(values)}")
        out = []
        for spec, v in zip(self.features, values):
            if spec.kind == CATEGORICAL:
                if not isinstance(v, str) or not v:
                    raise SchemaViolation(f"feature {spec.name!r}: expected a non-empty category token")
                if spec.allowed_values is not None and v not in spec.allowed_values:
                    raise SchemaViolation(f"feature {spec.name!r}: token {v!r} not in allowed values")
                out.append(v)
            else:
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise SchemaViolation(f"feature {spec.name!r}: expected a number")
                fv = float(v)
                if not math.isfinite(fv):
                    raise SchemaViolation(f"feature {spec.name!r}: value must be finite")
                out.append(fv)
        return tuple(out)

    def to_json(self) -> dict:
        features = []
        for f in self.features:
            doc: dict = {"name": f.name, "kind": f.kind}
            if f.allowed_values is not None:
                doc["values"] = list(f.allowed_values)
            if f.bounds is not None:
                doc["bounds"] = list(f.bounds)
            features.append(doc)
        target: dict = {"name": self.target.name, "task": self.target.task}
        if self.target.classes is not None:
            target["classes"] = list(self.target.classes)
        if self.target.favorable is not None:
            fav = self.target.favorable
            target["favorable"] = list(fav) if isinstance(fav, tuple) else fav
        return {"features": features, "target": target, "protected": list(self.protected)}

    @staticmethod
    def from_json(doc: dict) -> "Schema":
        try:
            features = tuple(
                FeatureSpec(
                    name=f["name"],
                    kind=f["kind"],
                    allowed_values=tuple(f["values"]) if "values" in f else None,
                    bounds=tuple(float(b) for b in f["bounds"]) if "bounds" in f else None,
                )
                for f in doc["features"]
            )
            t = doc["target"]
            favorable = t.get("favorable")
            if isinstance(favorable, (list, tuple)):
                lo = float("-inf") if favorable[0] is None else float(favorable[0])
                hi = float("inf") if favorable[1] is None else float(favorable[1])
                favorable = (lo, hi)
            target = TargetSpec(
                name=t["name"],
                task=t["task"],
                classes=tuple(t["classes"]) if "classes" in t else None,
                favorable=favorable,
            )
            return Schema(features=features, target=target, protected=tuple(doc.get("protected", ())))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad schema document: {exc}") from exc


def load_schema(path: str) -> Schema:
    with open(path, "r", encoding="utf-8") as fh:
        return Schema.from_json(json.load(fh))


@dataclass
class Dataset:
    """Immutable-by-convention rows + aligned labels."""

    schema: Schema
    rows: list  # list[Instance]
    labels: list  # list[str] or list[float]

    def __post_init__(self):
        if len(self.rows) != len(self.labels):
            raise SchemaError("rows and labels must align")

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> list:
        j = self.schema.index(name)
        return [row[j] for row in self.rows]


def _parse_cell(token: str, spec: FeatureSpec, row_no: int) -> Value:
    if spec.kind == CATEGORICAL:
        # allowed_values present = strict mode; otherwise unseen tokens are
        # fine (the overlap distance treats them as unequal to everything).
        if token == "" or (spec.allowed_values is not None and token not in spec.allowed_values):
            raise ParseError(row_no, spec.name, token)
        return token
    try:
        value = float(token)
    except ValueError:
        raise ParseError(row_no, spec.name, token) from None
    if not math.isfinite(value):
        raise ParseError(row_no, spec.name, token)
    return value


def _parse_label(token: str, target: TargetSpec, row_no: int):
    if target.is_classification:
        if token not in target.classes:
            raise UnknownClassLabel(row_no, token)
        return token
    try:
        value = float(token)
    except ValueError:
        raise ParseError(row_no, target.name, token) from None
    if not math.isfinite(value):
        raise ParseError(row_no, target.name, token)
    return value


def load_csv(path: str, schema: Schema) -> Dataset:
    """Ingest a CSV file. The header must name every schema feature and the
    target; column order in the file is irrelevant.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDataset(f"{path}: no header row") from None
        positions = {name: i for i, name in enumerate(header)}
        for f in schema.features:
            if f.name not in positions:
                raise MissingColumn(f.name)
        if schema.target.name not in positions:
            raise MissingColumn(schema.target.name)

        feat_pos = [positions[f.name] for f in schema.features]
        target_pos = positions[schema.target.name]

        rows, labels = [], []
        for row_no, record in enumerate(reader, start=1):
            if not record:
                continue
            if len(record) != len(header):
                raise SchemaError(f"{path}: row {row_no} has {len(record)} cells, header has {len(header)}")
            values = tuple(
                _parse_cell(record[pos], spec, row_no)
                for pos, spec in zip(feat_pos, schema.features)
            )
            rows.append(values)
            labels.append(_parse_label(record[target_pos], schema.target, row_no))
    return Dataset(schema=schema, rows=rows, labels=labels)


def _format_value(v: Value) -> str:
    return v if isinstance(v, str) else repr(float(v))


def save_csv(data: Dataset, path: str) -> None:
    """Write in the canonical dialect: comma-separated, header row, UTF-8,
    ``.`` decimal point. Floats use repr so a round trip is value-identical."""
    schema = data.schema
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(schema.feature_names) + [schema.target.name])
        for row, label in zip(data.rows, data.labels):
            writer.writerow([_format_value(v) for v in row] + [_format_value(label)])


# --- normalization statistics ------------------------------------------

NORM_METHODS = ("range", "std", "mad")


@dataclass(frozen=True)
class FeatureStats:
    range: float
    std: float
    mad: float


@dataclass(frozen=True)
class NormStats:
    """Per-numerical-feature spread statistics from the training split.

    std is the population standard deviation (divide by n) and mad the mean
    absolute deviation about the mean, so both match their brute-force
    definitions exactly. A degenerate feature (all training values equal)
    keeps statistic 0; the distance layer decides what that means.
    """

    method: str
    stats: dict = field(default_factory=dict)  # feature name -> FeatureStats

    def __post_init__(self):
        if self.method not in NORM_METHODS:
            raise SchemaError(f"unknown normalization method {self.method!r}")

    def normalizer(self, name: str) -> float:
        s = self.stats[name]
        return getattr(s, self.method)


def compute_norm_stats(train: Dataset, method: str = "range") -> NormStats:
    if len(train) == 0:
        raise EmptyDataset("cannot compute normalization statistics on an empty dataset")
    stats = {}
    for j, spec in enumerate(train.schema.features):
        if spec.kind != NUMERICAL:
            continue
        values = [row[j] for row in train.rows]
        n = len(values)
        mean = sum(values) / n
        rng = max(values) - min(values)
        var = sum((v - mean) ** 2 for v in values) / n
        mad = sum(abs(v - mean) for v in values) / n
        stats[spec.name] = FeatureStats(range=rng, std=math.sqrt(var), mad=mad)
    return NormStats(method=method, stats=stats)


# --- slice queries ------------------------------------------------------

SLICE_OPS = ("eq", "ne", "lt", "le", "gt", "ge", "in")
_ORDERING_OPS = ("lt", "le", "gt", "ge")


@dataclass(frozen=True)
class Predicate:
    feature: str
    op: str
    value: object  # scalar, or collection for "in"


@dataclass(frozen=True)
class SliceQuery:
    """Conjunction of per-feature predicates."""

    predicates: tuple[Predicate, ...] = ()

    @staticmethod
    def from_json(doc) -> "SliceQuery":
        preds = doc["predicates"] if isinstance(doc, dict) else doc
        out = []
        for p in preds:
            value = p["value"]
            if isinstance(value, list):
                value = tuple(value)
            out.append(Predicate(feature=p["feature"], op=p["op"], value=value))
        return SliceQuery(predicates=tuple(out))

    def to_json(self) -> dict:
        return {
            "predicates": [
                {"feature": p.feature, "op": p.op,
                 "value": list(p.value) if isinstance(p.value, tuple) else p.value}
                for p in self.predicates
            ]
        }


def _check_predicate(pred: Predicate, schema: Schema) -> FeatureSpec:
    spec = schema.find(pred.feature)
    if spec is None:
        raise BadPredicate(f"unknown feature {pred.feature!r}")
    if pred.op not in SLICE_OPS:
        raise BadPredicate(f"unknown op {pred.op!r}")
    if pred.op in _ORDERING_OPS and spec.kind != NUMERICAL:
        raise BadPredicate(f"ordering op {pred.op!r} not valid on categorical feature {pred.feature!r}")
    return spec


def _matches(value: Value, pred: Predicate) -> bool:
    ref = pred.value
    if pred.op == "eq":
        return value == ref
    if pred.op == "ne":
        return value != ref
    if pred.op == "in":
        return value in ref  # type: ignore[operator]
    if pred.op == "lt":
        return value < ref  # type: ignore[operator]
    if pred.op == "le":
        return value <= ref  # type: ignore[operator]
    if pred.op == "gt":
        return value > ref  # type: ignore[operator]
    return value >= ref  # type: ignore[operator]


def slice_indices(data: Dataset, query: SliceQuery) -> list[int]:
    """Row indices satisfying every predicate."""
    for pred in query.predicates:
        _check_predicate(pred, data.schema)
    cols = {pred.feature: data.schema.index(pred.feature) for pred in query.predicates}
    return [
        i for i, row in enumerate(data.rows)
        if all(_matches(row[cols[p.feature]], p) for p in query.predicates)
    ]


def slice_filter(data: Dataset, query: SliceQuery) -> Dataset:
    """Rows satisfying every predicate, labels kept aligned. An empty
    predicate list returns the dataset unchanged."""
    indices = slice_indices(data, query)
    return Dataset(
        schema=data.schema,
        rows=[data.rows[i] for i in indices],
        labels=[data.labels[i] for i in indices],
    )
