import json

import numpy as np
import pytest

from bioprecedence.corpus import CLASS_ORDER
from bioprecedence.features import FeatureVector
from bioprecedence.linear import (
    HINGE,
    L1,
    L2,
    LOGISTIC,
    LinearModel,
    TrainConfig,
    logistic_objective_and_gradient,
    predict,
    train_linear,
)

NIL, E1, E2 = CLASS_ORDER


def _separable(copies=10):
    data = []
    for _ in range(copies):
        data += [FeatureVector((0,), E1), FeatureVector((1,), E2),
                 FeatureVector((2,), NIL)]
    return data


@pytest.mark.parametrize("loss", [LOGISTIC, HINGE])
@pytest.mark.parametrize("reg", [L1, L2])
def test_separable_data_reaches_full_accuracy(loss, reg):
    data = _separable()
    model = train_linear(data, loss, reg, TrainConfig(epochs=30, lambda_=1e-4, seed=1))
    assert all(predict(model, fv)[0] == fv.label for fv in data)


def test_huge_l1_lambda_zeroes_every_weight():
    model = train_linear(_separable(), LOGISTIC, L1,
                         TrainConfig(epochs=5, lambda_=1e6, seed=1))
    # the penalty never touches the bias, only the feature weights
    assert np.count_nonzero(model.weights) == 0


def test_duplicated_data_matches_half_epochs_without_shuffle():
    data = _separable(copies=4)
    base = train_linear(data, LOGISTIC, L2,
                        TrainConfig(epochs=10, lambda_=1e-3, seed=4, shuffle=False))
    doubled = train_linear(data + data, LOGISTIC, L2,
                           TrainConfig(epochs=5, lambda_=1e-3, seed=4, shuffle=False))
    probes = [FeatureVector((0,)), FeatureVector((1,)), FeatureVector((2,)),
              FeatureVector((0, 1))]
    for fv in probes:
        assert predict(base, fv)[0] == predict(doubled, fv)[0]
    assert np.array_equal(base.weights, doubled.weights)


def test_logistic_gradient_matches_finite_differences():
    rng = np.random.default_rng(0)
    xs = rng.normal(size=(30, 8))
    ys = np.where(rng.random(30) > 0.5, 1.0, -1.0)
    w = rng.normal(size=8)
    b = 0.3
    for reg in (L1, L2):
        _, grad_w, grad_b = logistic_objective_and_gradient(w, b, xs, ys, 1e-2, reg)
        eps = 1e-6
        for j in range(8):
            bumped = w.copy()
            bumped[j] += eps
            up, _, _ = logistic_objective_and_gradient(bumped, b, xs, ys, 1e-2, reg)
            bumped[j] -= 2 * eps
            down, _, _ = logistic_objective_and_gradient(bumped, b, xs, ys, 1e-2, reg)
            numeric = (up - down) / (2 * eps)
            rel = abs(numeric - grad_w[j]) / max(abs(numeric) + abs(grad_w[j]), 1e-8)
            assert rel < 1e-5
        up, _, _ = logistic_objective_and_gradient(w, b + eps, xs, ys, 1e-2, reg)
        down, _, _ = logistic_objective_and_gradient(w, b - eps, xs, ys, 1e-2, reg)
        assert abs((up - down) / (2 * eps) - grad_b) < 1e-7


def test_l2_objective_decreases_per_epoch():
    data = _separable(copies=3)
    xs = np.zeros((len(data), 3))
    for i, fv in enumerate(data):
        xs[i, list(fv.indices)] = 1.0
    lam = 1e-2
    previous = None
    for epochs in range(1, 9):
        model = train_linear(
            data, LOGISTIC, L2,
            TrainConfig(epochs=epochs, eta0=0.02, decay=0.0, lambda_=lam,
                        seed=0, shuffle=False),
        )
        # objective of the E1-vs-rest problem
        ys = np.array([1.0 if fv.label == E1 else -1.0 for fv in data])
        k = CLASS_ORDER.index(E1)
        obj, _, _ = logistic_objective_and_gradient(
            model.weights[k], float(model.bias[k]), xs, ys, lam, L2
        )
        if previous is not None:
            assert obj <= previous + 1e-12
        previous = obj


def test_argmax_invariant_under_positive_scaling():
    model = train_linear(_separable(), LOGISTIC, L2, TrainConfig(epochs=10, seed=2))
    scaled = LinearModel(weights=3.5 * model.weights, bias=3.5 * model.bias,
                         loss=model.loss, regularizer=model.regularizer,
                         lambda_=model.lambda_)
    for fv in (FeatureVector((0,)), FeatureVector((1,)), FeatureVector((0, 2))):
        assert predict(model, fv)[0] == predict(scaled, fv)[0]


def test_all_zero_model_predicts_nil_by_tie_break():
    model = LinearModel(weights=np.zeros((3, 4)), bias=np.zeros(3),
                        loss=LOGISTIC, regularizer=L2, lambda_=0.0)
    label, scores = predict(model, FeatureVector((1, 3)))
    assert label == NIL
    assert set(scores.values()) == {0.0}


def test_deterministic_serialization():
    a = train_linear(_separable(), LOGISTIC, L1, TrainConfig(epochs=12, seed=9))
    b = train_linear(_separable(), LOGISTIC, L1, TrainConfig(epochs=12, seed=9))
    assert a.to_json() == b.to_json()
    c = train_linear(_separable(), LOGISTIC, L1, TrainConfig(epochs=12, seed=10))
    assert c.to_json() != a.to_json()


def test_serialization_round_trip_preserves_predictions():
    model = train_linear(_separable(), HINGE, L1, TrainConfig(epochs=12, seed=3))
    reloaded = LinearModel.from_dict(json.loads(model.to_json()))
    for fv in (FeatureVector((0,)), FeatureVector((1, 2)), FeatureVector(())):
        assert predict(model, fv) == predict(reloaded, fv)


def test_dimension_mismatch_rejected():
    model = train_linear(_separable(), LOGISTIC, L2, TrainConfig(epochs=2, seed=0))
    with pytest.raises(ValueError, match="dimension"):
        predict(model, FeatureVector((99,)))


def test_empty_data_rejected():
    with pytest.raises(ValueError):
        train_linear([], LOGISTIC, L2)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_nan_update_aborts_with_diagnostics():
    # eta*lambda > 2 makes the L2 scale factor diverge geometrically
    with pytest.raises(FloatingPointError, match="non-finite"):
        train_linear(_separable(), LOGISTIC, L2,
                     TrainConfig(epochs=80, eta0=30.0, decay=0.0, lambda_=0.1,
                                 seed=0))


def test_invalid_configs_rejected():
    with pytest.raises(ValueError):
        TrainConfig(epochs=0)
    with pytest.raises(ValueError):
        TrainConfig(lambda_=-1.0)
    with pytest.raises(ValueError):
        train_linear(_separable(), "squared", L2)
    with pytest.raises(ValueError):
        train_linear(_separable(), LOGISTIC, "L3")


def test_class_weighting_runs_and_changes_model():
    data = _separable(copies=2) + [FeatureVector((2,), NIL)] * 20
    plain = train_linear(data, LOGISTIC, L2, TrainConfig(epochs=10, seed=1))
    weighted = train_linear(data, LOGISTIC, L2,
                            TrainConfig(epochs=10, seed=1, class_weighting=True))
    assert not np.array_equal(plain.weights, weighted.weights)
