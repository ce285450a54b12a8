import json
import sys
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer
from pathlib import Path

import numpy as np
import pytest

from complai import Dataset, HttpModel, SubprocessModel, resolve_model, train_builtin
from complai.errors import BridgeFailure, DegenerateData, IncompatibleTask, ShapeMismatch

from conftest import make_schema, random_dataset

CHILD = str(Path(__file__).parent / "bridges" / "child_model.py")


def child_cmd(mode: str) -> str:
    return f"{sys.executable} {CHILD} {mode}"


class TestBuiltinKnn:
    def test_k1_memorizes(self):
        schema = make_schema("nn", classes=("A", "B"))
        data = Dataset(schema=schema, rows=[(0.0, 0.0), (10.0, 10.0)], labels=["A", "B"])
        model = train_builtin("knn", data, {"k": 1})
        preds = model.predict_batch(data.rows)
        assert [p.label for p in preds] == ["A", "B"]

    def test_scores_align_with_label(self, rng):
        schema = make_schema("nnc", task="multiclass", classes=("a", "b", "c"))
        data = random_dataset(rng, schema, 40)
        model = train_builtin("knn", data, {"k": 3})
        for p in model.predict_batch(data.rows):
            assert p.label == schema.target.classes[int(np.argmax(p.scores))]
            assert len(p.scores) == 3

    def test_regression_mean_of_neighbors(self):
        schema = make_schema("n", task="regression")
        data = Dataset(schema=schema, rows=[(0.0,), (1.0,)], labels=[2.0, 4.0])
        model = train_builtin("knn", data, {"k": 2})
        assert model.predict_one((0.5,)).value == pytest.approx(3.0)


class TestBuiltinLogistic:
    def separable_blob(self, rng, n=60):
        schema = make_schema("nn")
        rows, labels = [], []
        for _ in range(n):
            if rng.random() < 0.5:
                rows.append((float(rng.normal(-3, 0.5)), float(rng.normal(-3, 0.5))))
                labels.append("no")
            else:
                rows.append((float(rng.normal(3, 0.5)), float(rng.normal(3, 0.5))))
                labels.append("yes")
        return Dataset(schema=schema, rows=rows, labels=labels)

    def test_separable_blob_accuracy(self, rng):
        data = self.separable_blob(rng)
        model = train_builtin("logistic", data)
        preds = model.predict_batch(data.rows)
        accuracy = sum(p.label == y for p, y in zip(preds, data.labels)) / len(data)
        assert accuracy >= 0.95

    def test_single_class_degenerate(self):
        schema = make_schema("n")
        data = Dataset(schema=schema, rows=[(0.0,), (1.0,)], labels=["no", "no"])
        with pytest.raises(DegenerateData):
            train_builtin("logistic", data)

    def test_multiclass_softmax_scores(self, rng):
        schema = make_schema("nn", task="multiclass", classes=("a", "b", "c"))
        data = random_dataset(rng, schema, 60)
        model = train_builtin("logistic", data)
        for p in model.predict_batch(data.rows[:10]):
            assert sum(p.scores) == pytest.approx(1.0)
            assert p.label == schema.target.classes[int(np.argmax(p.scores))]

    def test_rejects_regression(self, rng):
        data = random_dataset(rng, make_schema("n", task="regression"), 10)
        with pytest.raises(IncompatibleTask):
            train_builtin("logistic", data)


class TestBuiltinLinear:
    def test_exact_line_coefficients(self):
        schema = make_schema("n", task="regression")
        xs = [float(i) for i in range(10)]
        data = Dataset(schema=schema, rows=[(x,) for x in xs], labels=[2 * x + 1 for x in xs])
        model = train_builtin("linear", data)
        # Normal-equations oracle on the same design matrix.
        X = np.column_stack([xs, np.ones(len(xs))])
        beta = np.linalg.solve(X.T @ X, X.T @ np.array([2 * x + 1 for x in xs]))
        assert model.coef_[0] == pytest.approx(beta[0], abs=1e-6)
        assert model.intercept_ == pytest.approx(beta[1], abs=1e-6)
        assert abs(model.coef_[0] - 2.0) < 1e-6
        assert abs(model.intercept_ - 1.0) < 1e-6

    def test_rejects_classification(self, rng):
        data = random_dataset(rng, make_schema("n"), 10)
        with pytest.raises(IncompatibleTask):
            train_builtin("linear", data)


class TestModelContract:
    def test_batching_invariance(self, rng):
        schema = make_schema("nnc")
        data = random_dataset(rng, schema, 30)
        model = train_builtin("logistic", data)
        a, b = data.rows[:7], data.rows[7:20]
        joint = model.predict_batch(a + b)
        split = model.predict_batch(a) + model.predict_batch(b)
        assert joint == split

    def test_repeat_determinism(self, rng):
        data = random_dataset(rng, make_schema("nn"), 30)
        model = train_builtin("knn", data, {"k": 3})
        assert model.predict_batch(data.rows) == model.predict_batch(data.rows)

    def test_query_counter(self, rng):
        data = random_dataset(rng, make_schema("n"), 12)
        model = train_builtin("knn", data, {"k": 1})
        assert model.query_count == 0
        model.predict_batch(data.rows[:5])
        model.predict_batch(data.rows[:3])
        assert model.query_count == 8


class TestSubprocessBridge:
    def target(self):
        return make_schema("nc").target

    def test_constant_model(self):
        with SubprocessModel(child_cmd("constant"), self.target()) as model:
            preds = model.predict_batch([(1.0, "a"), (-5.0, "b"), (2.0, "a")])
        assert all(p.label == "yes" for p in preds)

    def test_scored_model_round_trip(self):
        with SubprocessModel(child_cmd("scored"), self.target()) as model:
            preds = model.predict_batch([(1.0, "a"), (-1.0, "a")])
        assert [p.label for p in preds] == ["yes", "no"]
        assert preds[0].scores == (0.2, 0.8)

    def test_regression_values(self):
        target = make_schema("nn", task="regression").target
        with SubprocessModel(child_cmd("sum"), target) as model:
            assert model.predict_one((2.0, 3.0)).value == pytest.approx(5.0)

    def test_shape_mismatch(self):
        with SubprocessModel(child_cmd("shape_mismatch"), self.target()) as model:
            with pytest.raises(ShapeMismatch):
                model.predict_batch([(1.0, "a"), (2.0, "b"), (3.0, "c"), (4.0, "d")])

    def test_malformed_response(self):
        with SubprocessModel(child_cmd("malformed"), self.target()) as model:
            with pytest.raises(BridgeFailure):
                model.predict_batch([(1.0, "a")])

    def test_dead_process(self):
        model = SubprocessModel(f"{sys.executable} -c pass", self.target())
        with pytest.raises(BridgeFailure):
            model.predict_batch([(1.0, "a")])

    def test_batch_cap_chunks_requests(self):
        with SubprocessModel(child_cmd("constant"), self.target(), batch_cap=2) as model:
            preds = model.predict_batch([(float(i), "a") for i in range(5)])
        assert len(preds) == 5


class _PredictHandler(BaseHTTPRequestHandler):
    def do_POST(self):
        assert self.path == "/predict"
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        preds = ["yes" if inst[0] >= 0 else "no" for inst in body["instances"]]
        payload = json.dumps({"id": body.get("id", 0), "predictions": preds}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


@pytest.fixture
def http_model_server():
    server = HTTPServer(("127.0.0.1", 0), _PredictHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()


class TestHttpBridge:
    def test_round_trip(self, http_model_server):
        model = HttpModel(http_model_server, make_schema("nc").target)
        preds = model.predict_batch([(1.0, "a"), (-1.0, "b")])
        assert [p.label for p in preds] == ["yes", "no"]

    def test_unreachable_endpoint(self):
        model = HttpModel("http://127.0.0.1:9", make_schema("nc").target, timeout=0.5)
        with pytest.raises(BridgeFailure):
            model.predict_batch([(1.0, "a")])


class TestResolveModel:
    def test_builtin_selector(self, rng):
        data = random_dataset(rng, make_schema("nn"), 20)
        model = resolve_model("builtin:logistic", data)
        assert model.backend == "builtin"

    def test_exec_selector(self, rng):
        data = random_dataset(rng, make_schema("nc"), 5)
        model = resolve_model(f"exec:{child_cmd('constant')}", data)
        assert model.backend == "subprocess"
        assert model.predict_one(data.rows[0]).label == "yes"
        model.close()

    def test_unknown_selector(self, rng):
        data = random_dataset(rng, make_schema("n"), 5)
        with pytest.raises(IncompatibleTask):
            resolve_model("magic:model", data)
