import numpy as np
import pytest

from complai import (
    Dataset,
    DistanceConfig,
    NiceConfig,
    Prediction,
    SearchContext,
    compute_norm_stats,
    generate_batch,
    generate_counterfactual,
    heom,
    nearest_unlike_neighbor,
    target_region,
    train_builtin,
)
from complai.errors import MissingTolerance, NoUnlikeNeighbor, QueryBudgetExceeded
from complai.nice import RegionSettings

from conftest import RuleModel, make_schema, random_dataset
from oracles import brute_force_best_hybrid


def nice_cfg(train, method="range", **kw):
    return NiceConfig(distance=DistanceConfig(norm_stats=compute_norm_stats(train, method)), **kw)


class TestTargetRegion:
    def test_regression_band_worked_example(self):
        spec = make_schema("n", task="regression").target
        region = target_region(Prediction(value=10000.0), spec, lam_lo=100.0, lam_hi=100.0, sigma=10.0)
        assert region.contains(Prediction(value=8999.9))
        assert region.contains(Prediction(value=11000.1))
        # Closed band: the boundary itself is not a counterfactual.
        assert not region.contains(Prediction(value=9000.0))
        assert not region.contains(Prediction(value=11000.0))
        assert not region.contains(Prediction(value=10000.0))

    def test_asymmetric_band(self):
        spec = make_schema("n", task="regression").target
        region = target_region(Prediction(value=100.0), spec, lam_lo=1.0, lam_hi=3.0, sigma=10.0)
        assert region.contains(Prediction(value=89.9))
        assert not region.contains(Prediction(value=120.0))
        assert region.contains(Prediction(value=130.1))

    def test_one_sided_regions(self):
        spec = make_schema("n", task="regression").target
        above = target_region(Prediction(value=0.0), spec, 1.0, 1.0, 1.0, side="above_only")
        assert above.contains(Prediction(value=1.5))
        assert not above.contains(Prediction(value=-1.5))
        below = target_region(Prediction(value=0.0), spec, 1.0, 1.0, 1.0, side="below_only")
        assert below.contains(Prediction(value=-1.5))
        assert not below.contains(Prediction(value=1.5))

    def test_binary_complement(self):
        spec = make_schema("n").target
        region = target_region(Prediction(label="yes"), spec)
        assert region.contains(Prediction(label="no"))
        assert not region.contains(Prediction(label="yes"))

    def test_multiclass_any_other_class(self):
        spec = make_schema("n", task="multiclass", classes=("c1", "c2", "c3", "c4", "c5")).target
        region = target_region(Prediction(label="c3"), spec)
        accepted = {c for c in spec.classes if region.contains(Prediction(label=c))}
        assert accepted == {"c1", "c2", "c4", "c5"}

    def test_regression_without_tolerance(self):
        spec = make_schema("n", task="regression").target
        with pytest.raises(MissingTolerance):
            target_region(Prediction(value=1.0), spec)


class TestNearestUnlikeNeighbor:
    def setup_method(self):
        self.schema = make_schema("nn")
        self.model = RuleModel(self.schema.target, lambda row: "yes" if row[0] >= 0 else "no")

    def test_argmin_of_two(self):
        train = Dataset(schema=self.schema,
                        rows=[(1.0, 0.0), (5.0, 0.0), (-1.0, 0.0)],
                        labels=["yes", "yes", "no"])
        cfg = nice_cfg(train)
        region = target_region(self.model.predict_one((-1.0, 0.0)), self.schema.target)
        nn = nearest_unlike_neighbor((-1.0, 0.0), train, self.model, region, cfg)
        assert nn == (1.0, 0.0)

    def test_constant_model_has_no_neighbor(self):
        train = Dataset(schema=self.schema, rows=[(1.0, 0.0), (2.0, 0.0)], labels=["yes", "no"])
        constant = RuleModel(self.schema.target, lambda row: "yes")
        cfg = nice_cfg(train)
        region = target_region(Prediction(label="yes"), self.schema.target)
        with pytest.raises(NoUnlikeNeighbor):
            nearest_unlike_neighbor((0.0, 0.0), train, constant, region, cfg)

    def test_mislabeled_candidate_excluded(self):
        # Closest in-region candidate is mispredicted on its true label, so
        # the correctness filter skips it and picks the further one.
        train = Dataset(schema=self.schema,
                        rows=[(1.0, 0.0), (5.0, 0.0)],
                        labels=["no", "yes"])
        cfg = nice_cfg(train)
        region = target_region(Prediction(label="no"), self.schema.target)
        x = (-0.5, 0.0)
        assert nearest_unlike_neighbor(x, train, self.model, region, cfg) == (5.0, 0.0)
        relaxed = nice_cfg(train, require_correct_neighbor=False)
        assert nearest_unlike_neighbor(x, train, self.model, region, relaxed) == (1.0, 0.0)

    def test_tie_breaks_to_lowest_row_index(self):
        train = Dataset(schema=self.schema,
                        rows=[(2.0, 1.0), (2.0, -1.0), (-1.0, 0.0)],
                        labels=["yes", "yes", "no"])
        cfg = nice_cfg(train)
        region = target_region(Prediction(label="no"), self.schema.target)
        assert nearest_unlike_neighbor((2.0, 0.0), train, self.model, region, cfg) == (2.0, 1.0)


def loan_fixture():
    schema = make_schema("nnc", classes=("rejected", "approved"))
    rows = [
        (40000.0, 7.0, "private"),
        (90000.0, 9.0, "business"),
        (30000.0, 5.0, "private"),
        (42000.0, 5.0, "government"),
        (33000.0, 8.0, "business"),
    ]
    model = RuleModel(schema.target,
                      lambda row: "approved" if row[0] >= 40000 and row[1] >= 7 else "rejected")
    labels = [model._fn(row) for row in rows]
    return schema, Dataset(schema=schema, rows=rows, labels=labels), model


class TestGenerateCounterfactual:
    def test_single_differing_feature(self):
        schema = make_schema("n")
        model = RuleModel(schema.target, lambda row: "yes" if row[0] >= 0 else "no")
        train = Dataset(schema=schema, rows=[(1.0,), (-1.0,)], labels=["yes", "no"])
        cfg = nice_cfg(train)
        region = target_region(Prediction(label="no"), schema.target)
        result = generate_counterfactual((-1.0,), train, model, region, cfg)
        assert result.counterfactual == (1.0,)
        assert result.changed_features == ("f0",)
        assert result.n_changed == 1

    def test_loan_fixture_two_changes(self):
        schema, train, model = loan_fixture()
        cfg = nice_cfg(train)
        x = (35000.0, 6.0, "private")
        region = target_region(model.predict_one(x), schema.target)
        result = generate_counterfactual(x, train, model, region, cfg)
        assert result.counterfactual == (40000.0, 7.0, "private")
        assert set(result.changed_features) == {"f0", "f1"}
        assert result.n_changed == 2
        assert result.counterfactual[2] == "private"
        assert model.predict_one(result.counterfactual).label == "approved"

    def test_counterfactual_values_come_from_endpoints(self, rng):
        schema = make_schema("nncc")
        train = random_dataset(rng, schema, 40)
        model = train_builtin("knn", train, {"k": 1})
        cfg = nice_cfg(train)
        ctx = SearchContext.build(train, model, cfg)
        for x in train.rows[:10]:
            region = target_region(model.predict_one(x), schema.target)
            result = generate_counterfactual(x, train, model, region, cfg, ctx)
            for j, v in enumerate(result.counterfactual):
                assert v == x[j] or v == result.neighbor[j]

    def test_dominance_and_validity(self, rng):
        schema = make_schema("nnc")
        train = random_dataset(rng, schema, 50)
        model = train_builtin("logistic", train)
        cfg = nice_cfg(train)
        ctx = SearchContext.build(train, model, cfg)
        checked = 0
        for x in train.rows[:20]:
            region = target_region(model.predict_one(x), schema.target)
            try:
                result = generate_counterfactual(x, train, model, region, cfg, ctx)
            except NoUnlikeNeighbor:
                continue
            checked += 1
            assert region.contains(model.predict_one(result.counterfactual))
            nn_dist = heom(x, result.neighbor, schema, cfg.distance)
            assert result.distance <= nn_dist + 1e-9
        assert checked >= 10

    def test_brute_force_oracle_small(self, rng):
        schema = make_schema("nncc")
        train = random_dataset(rng, schema, 30)
        model = train_builtin("knn", train, {"k": 3})
        cfg = nice_cfg(train)
        ctx = SearchContext.build(train, model, cfg)
        for x in train.rows[:8]:
            region = target_region(model.predict_one(x), schema.target)
            try:
                result = generate_counterfactual(x, train, model, region, cfg, ctx)
            except NoUnlikeNeighbor:
                continue
            best_d, best_h = brute_force_best_hybrid(x, result.neighbor, model, region,
                                                     schema, cfg.distance)
            assert best_h is not None
            assert result.distance >= best_d - 1e-9
            assert result.distance <= heom(x, result.neighbor, schema, cfg.distance) + 1e-9

    def test_query_budget(self):
        schema, train, model = loan_fixture()
        cfg = nice_cfg(train, max_queries=3)
        x = (35000.0, 6.0, "private")
        region = target_region(model.predict_one(x), schema.target)
        with pytest.raises(QueryBudgetExceeded):
            generate_counterfactual(x, train, model, region, cfg)

    def test_query_count_within_bound(self):
        schema, train, model = loan_fixture()
        cfg = nice_cfg(train)
        x = (35000.0, 6.0, "private")
        region = target_region(model.predict_one(x), schema.target)
        result = generate_counterfactual(x, train, model, region, cfg)
        delta = sum(1 for a, b in zip(x, result.neighbor) if a != b)
        assert result.query_count <= delta * (delta + 1) / 2 + len(train)

    def test_regression_counterfactual(self):
        schema = make_schema("nn", task="regression")
        model = RuleModel(schema.target, lambda row: 3.0 * row[0] + row[1])
        rows = [(float(i), float(i % 3)) for i in range(12)]
        train = Dataset(schema=schema, rows=rows, labels=[model._fn(r) for r in rows])
        cfg = nice_cfg(train)
        sigma = float(np.std([model._fn(r) for r in rows]))
        x = (5.0, 1.0)
        region = target_region(model.predict_one(x), schema.target, 0.5, 0.5, sigma)
        result = generate_counterfactual(x, train, model, region, cfg)
        assert region.contains(model.predict_one(result.counterfactual))

    def test_proximity_mode_valid(self, rng):
        schema = make_schema("nnn")
        train = random_dataset(rng, schema, 40)
        model = train_builtin("logistic", train)
        cfg = nice_cfg(train, reward_mode="proximity")
        ctx = SearchContext.build(train, model, cfg)
        done = 0
        for x in train.rows[:15]:
            region = target_region(model.predict_one(x), schema.target)
            try:
                result = generate_counterfactual(x, train, model, region, cfg, ctx)
            except NoUnlikeNeighbor:
                continue
            done += 1
            assert region.contains(model.predict_one(result.counterfactual))
        assert done >= 5


class TestGenerateBatch:
    def test_parallel_matches_serial(self, rng):
        schema = make_schema("nnc")
        train = random_dataset(rng, schema, 40)
        model = train_builtin("knn", train, {"k": 1})
        cfg = nice_cfg(train)
        ctx = SearchContext.build(train, model, cfg)
        _, serial = generate_batch(train.rows, ctx, RegionSettings(), parallelism=1)
        _, parallel = generate_batch(train.rows, ctx, RegionSettings(), parallelism=4)
        assert serial == parallel

    def test_skips_unreachable_rows(self, rng):
        schema = make_schema("nn")
        train = random_dataset(rng, schema, 10)
        constant = RuleModel(schema.target, lambda row: "yes")
        cfg = nice_cfg(train)
        ctx = SearchContext.build(train, constant, cfg)
        _, results = generate_batch(train.rows, ctx)
        assert all(r is None for r in results)
