import json

import numpy as np
import pytest

from bioprecedence.corpus import CLASS_ORDER
from bioprecedence.features import FeatureVector
from bioprecedence.forest import ForestModel, train_forest
from bioprecedence.linear import LOGISTIC, L2, TrainConfig, predict, train_linear

NIL, E1, E2 = CLASS_ORDER


def _xor_data(copies=15):
    data = []
    for _ in range(copies):
        data += [
            FeatureVector((), NIL),
            FeatureVector((0, 1), NIL),
            FeatureVector((0,), E1),
            FeatureVector((1,), E1),
        ]
    return data


def test_single_class_data_gives_certain_leaves():
    data = [FeatureVector((i % 3,), E1) for i in range(12)]
    model = train_forest(data, n_trees=10, max_depth=3, seed=0)
    for fv in data:
        label, scores = predict(model, fv)
        assert label == E1
        assert scores[E1] == pytest.approx(1.0)


def test_forest_learns_xor_where_linear_cannot():
    data = _xor_data()
    forest = train_forest(data, n_trees=50, max_depth=4, seed=2)
    forest_acc = np.mean([predict(forest, fv)[0] == fv.label for fv in data])
    linear = train_linear(data, LOGISTIC, L2, TrainConfig(epochs=50, seed=0))
    linear_acc = np.mean([predict(linear, fv)[0] == fv.label for fv in data])
    assert forest_acc > 0.9
    assert linear_acc <= 0.75


def test_invalid_configuration_rejected():
    data = _xor_data(copies=1)
    with pytest.raises(ValueError):
        train_forest(data, n_trees=0)
    with pytest.raises(ValueError):
        train_forest(data, n_trees=5, max_depth=0)
    with pytest.raises(ValueError):
        train_forest([], n_trees=5)


def _walk_leaves(node):
    if "leaf" in node:
        yield node["leaf"]
    else:
        yield from _walk_leaves(node["present"])
        yield from _walk_leaves(node["absent"])


def test_leaf_distributions_sum_to_one():
    corpus_data = _xor_data(copies=5)
    model = train_forest(corpus_data, n_trees=20, max_depth=4, seed=3)
    for tree in model.trees:
        for leaf in _walk_leaves(tree):
            assert sum(leaf) == pytest.approx(1.0)
            assert all(p >= 0 for p in leaf)


def test_single_depthless_tree_predicts_its_leaf():
    model = ForestModel(trees=[{"leaf": [0.1, 0.7, 0.2]}], n_trees=1,
                        max_depth=1, feature_subsample=None, seed=0)
    label, scores = predict(model, FeatureVector(()))
    assert label == CLASS_ORDER[1]
    assert scores[CLASS_ORDER[1]] == pytest.approx(0.7)


def test_deterministic_given_seed():
    data = _xor_data(copies=4)
    a = train_forest(data, n_trees=12, max_depth=4, seed=5)
    b = train_forest(data, n_trees=12, max_depth=4, seed=5)
    c = train_forest(data, n_trees=12, max_depth=4, seed=6)
    assert a.to_json() == b.to_json()
    assert a.to_json() != c.to_json()


def test_serialization_round_trip():
    data = _xor_data(copies=3)
    model = train_forest(data, n_trees=8, max_depth=4, seed=1)
    reloaded = ForestModel.from_dict(json.loads(model.to_json()))
    for fv in data[:8]:
        assert predict(model, fv) == predict(reloaded, fv)
