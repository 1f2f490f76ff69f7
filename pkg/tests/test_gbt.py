"""Boosted-tree training and inference, checked against an independent
recursive tree walker and closed-form leaf math."""

import json
import math

import numpy as np
import pytest

from graphokit import gbt
from graphokit.errors import (DimensionMismatch, InvalidParams,
                              NoUsableFeature, SingleClass)
from graphokit.gbt import (PAPER_GRIDS, BoostedEnsemble, HyperParams, Tree,
                           fit, log_loss)


def walk(tree, row):
    """Oracle: per-row recursive descent over the flat node arrays."""
    node = 0
    while tree.feature[node] >= 0:
        v = row[tree.feature[node]]
        if math.isnan(v):
            left = tree.missing_left[node]
        else:
            left = v < tree.threshold[node]
        node = tree.left[node] if left else tree.right[node]
    return tree.value[node]


def oracle_margin(model, X):
    out = np.full(len(X), model.base_score_logit)
    for tree in model.trees:
        out += model.params.learning_rate * np.array(
            [walk(tree, row) for row in X])
    return out


def two_moons(n=200, seed=0):
    r = np.random.default_rng(seed)
    y = r.integers(0, 2, n)
    ang = np.pi * r.random(n)
    x1 = np.where(y == 1, 1 - np.cos(ang), np.cos(ang)) + r.normal(0, .1, n)
    x2 = np.where(y == 1, 0.5 - np.sin(ang), np.sin(ang)) + r.normal(0, .1, n)
    return np.column_stack((x1, x2)), y


class TestTree:
    def test_manual_tree_routing(self):
        t = Tree()
        root = t.add_split(0, 5.0, missing_left=True)
        lt = t.add_leaf(-1.0)
        rt = t.add_leaf(2.0)
        t.left[root], t.right[root] = lt, rt
        X = np.array([[1.0], [9.0], [np.nan], [5.0]])
        np.testing.assert_array_equal(t.predict(X), [-1.0, 2.0, -1.0, 2.0])

    def test_missing_direction_right(self):
        t = Tree()
        root = t.add_split(0, 5.0, missing_left=False)
        t.left[root], t.right[root] = t.add_leaf(-1.0), t.add_leaf(2.0)
        assert t.predict(np.array([[np.nan]]))[0] == 2.0

    def test_depth(self):
        t = Tree()
        t.add_leaf(0.0)
        assert t.depth == 0
        t2 = Tree()
        root = t2.add_split(0, 1.0, False)
        t2.left[root], t2.right[root] = t2.add_leaf(0.0), t2.add_leaf(1.0)
        assert t2.depth == 1


class TestParams:
    @pytest.mark.parametrize("bad", [
        dict(learning_rate=0.0), dict(gamma=-0.1), dict(max_depth=0),
        dict(subsample=0.0), dict(subsample=1.5), dict(colsample_bytree=0.0),
        dict(min_child_weight=-1.0), dict(n_estimators=0),
        dict(scale_pos_weight=0.0)])
    def test_invalid(self, bad):
        with pytest.raises(InvalidParams):
            HyperParams(**bad)

    def test_with_seed(self):
        p = HyperParams(seed=0).with_seed(7)
        assert p.seed == 7

    def test_grid_values_all_construct(self):
        for name, values in PAPER_GRIDS.items():
            for v in values:
                HyperParams(**{name: v})


class TestFitErrors:
    def test_single_class(self):
        with pytest.raises(SingleClass):
            fit(np.zeros((4, 2)), [1, 1, 1, 1], HyperParams())

    def test_no_usable_feature(self):
        with pytest.raises(NoUsableFeature):
            fit(np.full((4, 2), np.nan), [0, 1, 0, 1], HyperParams())

    def test_dimension_mismatch_at_predict(self):
        X, y = two_moons(40)
        model = fit(X, y, HyperParams(n_estimators=2))
        with pytest.raises(DimensionMismatch):
            model.predict_proba(np.zeros((3, 5)))


class TestTraining:
    def test_predictions_match_tree_walk_oracle(self):
        X, y = two_moons(200, seed=3)
        X = X.copy()
        X[::17, 0] = np.nan  # exercise learned missing directions
        model = fit(X, y, HyperParams(n_estimators=25, max_depth=4,
                                      subsample=0.8, colsample_bylevel=0.7,
                                      seed=11))
        np.testing.assert_allclose(model.predict_margin(X),
                                   oracle_margin(model, X),
                                   rtol=1e-12, atol=1e-12)

    def test_single_round_leaf_weight_closed_form(self):
        # one depth-1 tree on perfectly split data: leaf = -G/(H+lam)
        # with p=0.5 everywhere: g = 0.5 - y, h = 0.25
        X = np.array([[0.0], [1.0], [2.0], [3.0]])
        y = np.array([0, 0, 1, 1])
        model = fit(X, y, HyperParams(n_estimators=1, max_depth=1,
                                      learning_rate=1.0, lambda_l2=1.0,
                                      min_child_weight=0.0))
        tree = model.trees[0]
        assert tree.feature[0] == 0 and tree.threshold[0] == 1.5
        left = walk(tree, [0.0])
        right = walk(tree, [3.0])
        assert left == pytest.approx(-1.0 / 1.5)   # G=1, H=0.5
        assert right == pytest.approx(1.0 / 1.5)

    def test_separable_1d_perfect_accuracy(self):
        X = np.linspace(0, 1, 30).reshape(-1, 1)
        y = (X[:, 0] > 0.5).astype(int)
        model = fit(X, y, HyperParams(n_estimators=20, max_depth=1))
        assert np.array_equal(model.predict(X), y)

    def test_xor_clusters_need_depth_two(self):
        # four quadrant clusters with opposite-corner labels: depth-1
        # stumps cannot separate them, depth 2 can
        r = np.random.default_rng(0)
        centers = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
        X = np.repeat(centers, 25, axis=0) + r.normal(0, 0.05, (100, 2))
        y = np.repeat([0, 1, 1, 0], 25)
        deep = fit(X, y, HyperParams(n_estimators=50, max_depth=2,
                                     learning_rate=0.3))
        assert np.array_equal(deep.predict(X), y)
        shallow = fit(X, y, HyperParams(n_estimators=50, max_depth=1,
                                        learning_rate=0.3))
        assert not np.array_equal(shallow.predict(X), y)

    def test_training_loss_decreases(self):
        X, y = two_moons(150, seed=5)
        losses = []
        for rounds in (1, 5, 20, 60):
            model = fit(X, y, HyperParams(n_estimators=rounds))
            losses.append(log_loss(y, model.predict_proba(X)))
        assert losses == sorted(losses, reverse=True)

    def test_max_depth_respected(self):
        X, y = two_moons(120, seed=8)
        for depth in (1, 2, 4):
            model = fit(X, y, HyperParams(n_estimators=10, max_depth=depth))
            assert all(t.depth <= depth for t in model.trees)

    def test_probabilities_bounded(self):
        X, y = two_moons(100, seed=2)
        p = fit(X, y, HyperParams(n_estimators=30)).predict_proba(X)
        assert np.all((p > 0) & (p < 1))

    def test_scale_pos_weight_shifts_probabilities(self):
        X, y = two_moons(100, seed=6)
        lo = fit(X, y, HyperParams(n_estimators=10, max_depth=2))
        hi = fit(X, y, HyperParams(n_estimators=10, max_depth=2,
                                   scale_pos_weight=4.0))
        assert hi.predict_proba(X).mean() > lo.predict_proba(X).mean()

    def test_deterministic_and_serializable(self):
        X, y = two_moons(80, seed=9)
        params = HyperParams(n_estimators=12, subsample=0.7,
                             colsample_bytree=0.8, colsample_bylevel=0.8,
                             seed=4)
        a = fit(X, y, params).to_json()
        b = fit(X, y, params).to_json()
        assert a == b
        other = fit(X, y, params.with_seed(5)).to_json()
        assert a != other

    def test_default_feature_names(self):
        X, y = two_moons(40)
        model = fit(X, y, HyperParams(n_estimators=1))
        assert model.feature_names == ("f0", "f1")


class TestSerialization:
    def _model(self):
        X, y = two_moons(80, seed=1)
        X[::13, 1] = np.nan
        return fit(X, y, HyperParams(n_estimators=8, max_depth=3)), X

    def test_round_trip_predictions_identical(self):
        model, X = self._model()
        clone = BoostedEnsemble.from_json(model.to_json())
        np.testing.assert_array_equal(clone.predict_margin(X),
                                      model.predict_margin(X))

    def test_round_trip_bytes_identical(self):
        model, _ = self._model()
        text = model.to_json()
        assert BoostedEnsemble.from_json(text).to_json() == text

    def test_format_marker(self):
        model, _ = self._model()
        assert json.loads(model.to_json())["format"] == "graphokit-gbt-1"

    def test_empty_ensemble_predicts_half(self):
        empty = BoostedEnsemble(trees=[], params=HyperParams(),
                                feature_names=("a",))
        assert empty.predict_proba(np.array([[3.0]]))[0] == 0.5

    def test_single_leaf_sigmoid(self):
        t = Tree()
        t.add_leaf(2.0)
        model = BoostedEnsemble(trees=[t],
                                params=HyperParams(learning_rate=0.3),
                                feature_names=("a",))
        expect = 1.0 / (1.0 + math.exp(-0.6))
        assert model.predict_proba(np.array([[0.0]]))[0] == \
            pytest.approx(expect)

    def test_decision_threshold_used(self):
        t = Tree()
        t.add_leaf(1.0)
        model = BoostedEnsemble(trees=[t], params=HyperParams(
            learning_rate=1.0), feature_names=("a",),
            decision_threshold=0.9)
        assert model.predict(np.array([[0.0]]))[0] == 0


class TestLogLoss:
    def test_matches_manual_formula(self):
        y = np.array([0, 1, 1, 0])
        p = np.array([0.2, 0.7, 0.9, 0.4])
        expect = -np.mean([np.log(0.8), np.log(0.7),
                           np.log(0.9), np.log(0.6)])
        assert log_loss(y, p) == pytest.approx(expect)

    def test_clipping_keeps_finite(self):
        assert np.isfinite(log_loss([1], [0.0]))
