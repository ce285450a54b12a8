"""Uniform black-box prediction contract.

Three backends satisfy it:

* ``builtin`` — small reference models (softmax logistic, least-squares
  linear, k-NN) trained deterministically in-process, so audits are
  self-contained and repeatable.
* ``subprocess`` — newline-delimited JSON over stdin/stdout of a child
  process. Request: ``{"id": n, "instances": [[v1, ..., vm], ...]}`` with
  values in schema order (strings for categorical, numbers for numerical).
  Response: ``{"id": n, "predictions": [...], "scores": [[...], ...]?}``.
  Shutdown by closing stdin.
* ``http`` — ``POST <base>/predict`` with the same JSON body and response.

Predictions must be a pure function of the instance within one audit
session; scores produced by the engine are undefined for stochastic models.
"""

from __future__ import annotations

import json
import shlex
import subprocess
import threading
from dataclasses import dataclass

import numpy as np

from .errors import BridgeFailure, DegenerateData, IncompatibleTask, ShapeMismatch
from .tabular import CATEGORICAL, Dataset, Instance, Schema, TargetSpec

DEFAULT_BATCH_CAP = 1024


@dataclass(frozen=True)
class Prediction:
    """A classification label or a regression value, plus optional per-class
    scores aligned to the declared class order."""

    label: str | None = None
    value: float | None = None
    scores: tuple[float, ...] | None = None


def _argmax_label(scores, classes) -> str:
    return classes[int(np.argmax(scores))]


class Model:
    """Base prediction handle. Subclasses implement ``_predict``."""

    backend = "builtin"

    def __init__(self, target: TargetSpec):
        self.target = target
        self._queries = 0
        self._counter_lock = threading.Lock()

    @property
    def task(self) -> str:
        return self.target.task

    @property
    def query_count(self) -> int:
        return self._queries

    def predict_batch(self, batch: list[Instance]) -> list[Prediction]:
        """One prediction per instance, order preserved; increments the
        query counter by ``len(batch)``."""
        if not batch:
            return []
        preds = self._predict(list(batch))
        if len(preds) != len(batch):
            raise ShapeMismatch(len(batch), len(preds))
        with self._counter_lock:
            self._queries += len(batch)
        return preds

    def predict_one(self, instance: Instance) -> Prediction:
        return self.predict_batch([instance])[0]

    def _predict(self, batch: list[Instance]) -> list[Prediction]:
        raise NotImplementedError


# --- builtin reference models ------------------------------------------


class _Encoder:
    """One-hot categoricals + optionally standardized numericals.

    Category vocabularies are sorted so the encoding is independent of row
    order. Unseen tokens at predict time encode to an all-zero block.
    """

    def __init__(self, schema: Schema, rows, standardize: bool = True):
        self.schema = schema
        self.standardize = standardize
        self._vocab: dict[int, dict] = {}
        self._mean: dict[int, float] = {}
        self._scale: dict[int, float] = {}
        width = 0
        for j, spec in enumerate(schema.features):
            if spec.kind == CATEGORICAL:
                tokens = sorted({row[j] for row in rows})
                self._vocab[j] = {tok: width + i for i, tok in enumerate(tokens)}
                width += len(tokens)
            else:
                col = np.array([row[j] for row in rows], dtype=np.float64)
                self._mean[j] = float(col.mean()) if standardize else 0.0
                sd = float(col.std()) if standardize else 1.0
                self._scale[j] = sd if sd > 0 else 1.0
                width += 1
        self.width = width

    def transform(self, rows) -> np.ndarray:
        out = np.zeros((len(rows), self.width), dtype=np.float64)
        col = 0
        for j, spec in enumerate(self.schema.features):
            if spec.kind == CATEGORICAL:
                vocab = self._vocab[j]
                for i, row in enumerate(rows):
                    pos = vocab.get(row[j])
                    if pos is not None:
                        out[i, pos] = 1.0
                col += len(vocab)
            else:
                values = np.fromiter((row[j] for row in rows), dtype=np.float64, count=len(rows))
                out[:, col] = (values - self._mean[j]) / self._scale[j]
                col += 1
        return out


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


class LogisticModel(Model):
    """Multinomial logistic regression fit by full-batch gradient descent
    with a fixed iteration budget; binary is the 2-class special case, so
    there is a single code path."""

    def __init__(self, train: Dataset, hyper: dict | None = None):
        super().__init__(train.schema.target)
        hyper = hyper or {}
        if not self.target.is_classification:
            raise IncompatibleTask("logistic requires a classification task")
        present = set(train.labels)
        if len(present) < 2:
            raise DegenerateData("logistic training data contains a single class")
        self.classes = train.schema.target.classes
        self._encoder = _Encoder(train.schema, train.rows, standardize=True)
        X = np.hstack([self._encoder.transform(train.rows), np.ones((len(train), 1))])
        class_index = {c: k for k, c in enumerate(self.classes)}
        y = np.array([class_index[label] for label in train.labels])
        n, d = X.shape
        k = len(self.classes)
        onehot = np.zeros((n, k))
        onehot[np.arange(n), y] = 1.0

        lr = float(hyper.get("learning_rate", 0.5))
        iters = int(hyper.get("iterations", 500))
        l2 = float(hyper.get("l2", 1e-4))
        W = np.zeros((d, k))
        for _ in range(iters):
            grad = X.T @ (_softmax(X @ W) - onehot) / n + l2 * W
            W -= lr * grad
        self._W = W

    def _predict(self, batch):
        X = np.hstack([self._encoder.transform(batch), np.ones((len(batch), 1))])
        probs = _softmax(X @ self._W)
        return [
            Prediction(label=_argmax_label(p, self.classes), scores=tuple(float(v) for v in p))
            for p in probs
        ]


class LinearModel(Model):
    """Ordinary least squares on one-hot encoded features."""

    def __init__(self, train: Dataset, hyper: dict | None = None):
        super().__init__(train.schema.target)
        if self.target.task != "regression":
            raise IncompatibleTask("linear requires a regression task")
        self._encoder = _Encoder(train.schema, train.rows, standardize=False)
        X = np.hstack([self._encoder.transform(train.rows), np.ones((len(train), 1))])
        y = np.array(train.labels, dtype=np.float64)
        beta, *_ = np.linalg.lstsq(X, y, rcond=None)
        self.coef_ = beta[:-1]
        self.intercept_ = float(beta[-1])

    def _predict(self, batch):
        X = self._encoder.transform(batch)
        values = X @ self.coef_ + self.intercept_
        return [Prediction(value=float(v)) for v in values]


class KnnModel(Model):
    """Brute-force k-nearest-neighbor over the encoded training matrix.

    Classification emits vote shares as scores; regression predicts the
    neighbor mean. Distance ties resolve to the lowest training row index.
    """

    def __init__(self, train: Dataset, hyper: dict | None = None):
        super().__init__(train.schema.target)
        hyper = hyper or {}
        self.k = int(hyper.get("k", 5))
        if self.k < 1:
            raise IncompatibleTask("knn requires k >= 1")
        self.k = min(self.k, len(train))
        self._encoder = _Encoder(train.schema, train.rows, standardize=True)
        self._X = self._encoder.transform(train.rows)
        self.classes = train.schema.target.classes
        if self.target.is_classification:
            class_index = {c: i for i, c in enumerate(self.classes)}
            self._y = np.array([class_index[label] for label in train.labels])
        else:
            self._y = np.array(train.labels, dtype=np.float64)

    def _predict(self, batch):
        Q = self._encoder.transform(batch)
        preds = []
        for q in Q:
            d2 = ((self._X - q) ** 2).sum(axis=1)
            order = np.argsort(d2, kind="stable")[: self.k]
            if self.target.is_classification:
                votes = np.bincount(self._y[order], minlength=len(self.classes)).astype(np.float64)
                shares = votes / votes.sum()
                preds.append(Prediction(label=_argmax_label(shares, self.classes),
                                        scores=tuple(float(v) for v in shares)))
            else:
                preds.append(Prediction(value=float(self._y[order].mean())))
        return preds


_BUILTIN_KINDS = {"logistic": LogisticModel, "linear": LinearModel, "knn": KnnModel}


def train_builtin(kind: str, train: Dataset, hyper: dict | None = None) -> Model:
    """Fit one of the deterministic reference models."""
    if kind not in _BUILTIN_KINDS:
        raise IncompatibleTask(f"unknown builtin model kind {kind!r}")
    return _BUILTIN_KINDS[kind](train, hyper)


# --- wire bridges ------------------------------------------------------


def instances_to_wire(batch: list[Instance]) -> list[list]:
    return [list(row) for row in batch]


def _parse_wire_response(doc: dict, expected: int, target: TargetSpec, raw: str) -> list[Prediction]:
    if "predictions" not in doc:
        raise BridgeFailure("response missing 'predictions'", raw)
    outputs = doc["predictions"]
    if len(outputs) != expected:
        raise ShapeMismatch(expected, len(outputs))
    scores = doc.get("scores")
    if scores is not None and len(scores) != expected:
        raise ShapeMismatch(expected, len(scores))

    preds = []
    for i, out in enumerate(outputs):
        row_scores = None
        if scores is not None:
            row_scores = tuple(float(v) for v in scores[i])
            if len(row_scores) != len(target.classes or ()):
                raise BridgeFailure(
                    f"scores row {i} has {len(row_scores)} entries, expected {len(target.classes or ())}", raw)
            if not all(np.isfinite(row_scores)):
                raise BridgeFailure(f"scores row {i} contains a non-finite value", raw)
        if target.is_classification:
            label = str(out)
            if label not in target.classes:
                raise BridgeFailure(f"prediction {label!r} is not a declared class", raw)
            if row_scores is not None and label != _argmax_label(row_scores, target.classes):
                raise BridgeFailure(f"prediction {label!r} disagrees with argmax of scores", raw)
            preds.append(Prediction(label=label, scores=row_scores))
        else:
            try:
                value = float(out)
            except (TypeError, ValueError):
                raise BridgeFailure(f"non-numeric regression prediction {out!r}", raw) from None
            if not np.isfinite(value):
                raise BridgeFailure(f"non-finite regression prediction {out!r}", raw)
            preds.append(Prediction(value=value))
    return preds


class SubprocessModel(Model):
    """Drives an external model process over the JSON-lines protocol.

    Requests are serialized through a single request/response channel; the
    batch cap bounds individual payload sizes.
    """

    backend = "subprocess"

    def __init__(self, command: str, target: TargetSpec, batch_cap: int = DEFAULT_BATCH_CAP):
        super().__init__(target)
        self.batch_cap = batch_cap
        self._lock = threading.Lock()
        self._next_id = 0
        self._proc = subprocess.Popen(
            shlex.split(command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
        )

    def _roundtrip(self, chunk: list[Instance]) -> list[Prediction]:
        req_id = self._next_id
        self._next_id += 1
        request = json.dumps({"id": req_id, "instances": instances_to_wire(chunk)})
        proc = self._proc
        try:
            proc.stdin.write(request + "\n")
            proc.stdin.flush()
        except (BrokenPipeError, ValueError) as exc:
            raise BridgeFailure(f"model process not accepting input: {exc}") from exc
        line = proc.stdout.readline()
        if line == "":
            err = proc.stderr.read() if proc.poll() is not None else ""
            raise BridgeFailure(f"model process closed its output (exit={proc.poll()}) {err.strip()}")
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise BridgeFailure("malformed JSON from model process", line) from exc
        if doc.get("id") != req_id:
            raise BridgeFailure(f"response id {doc.get('id')!r} does not match request id {req_id}", line)
        return _parse_wire_response(doc, len(chunk), self.target, line)

    def _predict(self, batch):
        preds: list[Prediction] = []
        with self._lock:
            for start in range(0, len(batch), self.batch_cap):
                preds.extend(self._roundtrip(batch[start:start + self.batch_cap]))
        return preds

    def close(self):
        if self._proc.stdin and not self._proc.stdin.closed:
            self._proc.stdin.close()
        self._proc.wait(timeout=10)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class HttpModel(Model):
    """POSTs prediction batches to ``<base>/predict``."""

    backend = "http"

    def __init__(self, base_url: str, target: TargetSpec,
                 batch_cap: int = DEFAULT_BATCH_CAP, max_in_flight: int = 4,
                 timeout: float = 30.0):
        super().__init__(target)
        self.base_url = base_url.rstrip("/")
        self.batch_cap = batch_cap
        self.timeout = timeout
        self._gate = threading.Semaphore(max_in_flight)
        import requests

        self._session = requests.Session()

    def _roundtrip(self, chunk: list[Instance]) -> list[Prediction]:
        body = {"id": 0, "instances": instances_to_wire(chunk)}
        with self._gate:
            try:
                resp = self._session.post(f"{self.base_url}/predict", json=body, timeout=self.timeout)
            except Exception as exc:
                raise BridgeFailure(f"request to {self.base_url}/predict failed: {exc}") from exc
        if resp.status_code != 200:
            raise BridgeFailure(f"model endpoint returned HTTP {resp.status_code}", resp.text[:2000])
        try:
            doc = resp.json()
        except ValueError as exc:
            raise BridgeFailure("malformed JSON from model endpoint", resp.text[:2000]) from exc
        return _parse_wire_response(doc, len(chunk), self.target, resp.text[:2000])

    def _predict(self, batch):
        preds: list[Prediction] = []
        for start in range(0, len(batch), self.batch_cap):
            preds.extend(self._roundtrip(batch[start:start + self.batch_cap]))
        return preds


def resolve_model(selector: str, train: Dataset, hyper: dict | None = None,
                  batch_cap: int = DEFAULT_BATCH_CAP) -> Model:
    """Build a model from a CLI/config selector.

    ``builtin:<kind>`` trains a reference model on the training split;
    ``exec:<command>`` launches a subprocess bridge; ``http(s)://...`` talks
    to a served model.
    """
    if selector.startswith("builtin:"):
        return train_builtin(selector.split(":", 1)[1], train, hyper)
    if selector.startswith("exec:"):
        return SubprocessModel(selector.split(":", 1)[1], train.schema.target, batch_cap=batch_cap)
    if selector.startswith("http://") or selector.startswith("https://"):
        return HttpModel(selector, train.schema.target, batch_cap=batch_cap)
    raise IncompatibleTask(f"unrecognized model selector {selector!r}")
