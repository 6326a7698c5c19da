"""Sparse linear classifiers trained with stochastic subgradient descent.

Logistic and hinge losses, L1 or L2 regularization, one-vs-rest over the
three coarse classes. L1 uses the cumulative-penalty update so weights of
unused features stay exactly zero; L2 uses a scale-factor representation so
each update touches only the active coordinates. Training is deterministic
given the seed.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from bioprecedence.corpus import CLASS_ORDER, CoarseLabel
from bioprecedence.features import FeatureVector

LOGISTIC = "logistic"
HINGE = "hinge"
L1 = "L1"
L2 = "L2"

_MODEL_SCHEMA = "bioprecedence-model/1"


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    eta0: float = 0.1
    decay: float = 1e-3
    lambda_: float = 1e-4
    seed: int = 0
    shuffle: bool = True
    class_weighting: bool = False

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.lambda_ < 0:
            raise ValueError("lambda must be >= 0")


@dataclass
class LinearModel:
    weights: np.ndarray            # (n_classes, n_features)
    bias: np.ndarray               # (n_classes,)
    loss: str
    regularizer: str
    lambda_: float
    classes: tuple[CoarseLabel, ...] = CLASS_ORDER

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]

    def scores(self, fv: FeatureVector) -> dict[CoarseLabel, float]:
        if fv.indices and fv.indices[-1] >= self.n_features:
            raise ValueError(
                f"feature index {fv.indices[-1]} outside model dimension "
                f"{self.n_features}"
            )
        idx = list(fv.indices)
        return {
            c: float(self.weights[k, idx].sum() + self.bias[k])
            for k, c in enumerate(self.classes)
        }

    def to_json(self) -> str:
        per_class = []
        for k in range(len(self.classes)):
            nz = np.flatnonzero(self.weights[k])
            per_class.append([[int(i), float(self.weights[k, i])] for i in nz])
        return json.dumps({
            "schema": _MODEL_SCHEMA,
            "type": "linear",
            "loss": self.loss,
            "regularizer": self.regularizer,
            "lambda": self.lambda_,
            "n_features": self.n_features,
            "classes": [c.value for c in self.classes],
            "bias": [float(b) for b in self.bias],
            "weights": per_class,
        }, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "LinearModel":
        classes = tuple(CoarseLabel(v) for v in data["classes"])
        weights = np.zeros((len(classes), data["n_features"]))
        for k, entries in enumerate(data["weights"]):
            for col, val in entries:
                weights[k, col] = val
        return cls(
            weights=weights,
            bias=np.array(data["bias"], dtype=float),
            loss=data["loss"],
            regularizer=data["regularizer"],
            lambda_=data["lambda"],
            classes=classes,
        )


def predict(model, fv: FeatureVector) -> tuple[CoarseLabel, dict[CoarseLabel, float]]:
    """Argmax of the model's per-class scores.

    Ties go to the earliest class in the fixed order (NIL first), so an
    all-zero model predicts NIL.
    """
    scores = model.scores(fv)
    best = None
    for c in CLASS_ORDER:
        if c in scores and (best is None or scores[c] > scores[best]):
            best = c
    return best, scores


def _loss_gradient_scale(loss: str, margin: float) -> float:
    """d loss / d z for binary y in {-1,+1}, folded so the caller multiplies by y."""
    if loss == LOGISTIC:
        # L(m) = log(1 + exp(-m)); dL/dm = -sigmoid(-m)
        if margin > 0:
            return -math.exp(-margin) / (1.0 + math.exp(-margin))
        return -1.0 / (1.0 + math.exp(margin))
    if loss == HINGE:
        return -1.0 if margin < 1.0 else 0.0
    raise ValueError(f"unknown loss {loss!r}")


def logistic_objective_and_gradient(weights: np.ndarray, bias: float,
                                    xs: np.ndarray, ys: np.ndarray,
                                    lambda_: float = 0.0, regularizer: str = L2):
    """Dense logistic objective and analytic gradient, for verification.

    Mean loss over the examples plus the regularization term (bias excluded).
    """
    z = xs @ weights + bias
    m = ys * z
    # log(1 + exp(-m)) computed stably
    losses = np.where(m > 0, np.log1p(np.exp(-m)), -m + np.log1p(np.exp(m)))
    sig = np.where(m > 0, np.exp(-m) / (1 + np.exp(-m)), 1 / (1 + np.exp(m)))
    dz = -ys * sig / len(ys)
    grad_w = xs.T @ dz
    grad_b = float(dz.sum())
    obj = float(losses.mean())
    if regularizer == L2:
        obj += 0.5 * lambda_ * float(weights @ weights)
        grad_w = grad_w + lambda_ * weights
    elif regularizer == L1:
        obj += lambda_ * float(np.abs(weights).sum())
        grad_w = grad_w + lambda_ * np.sign(weights)
    return obj, grad_w, grad_b


def _train_one_vs_rest(data, positive: CoarseLabel, loss: str, regularizer: str,
                       config: TrainConfig, n_features: int,
                       rng: np.random.Generator) -> tuple[np.ndarray, float]:
    ys = np.array([1.0 if fv.label == positive else -1.0 for fv in data])
    actives = [np.array(fv.indices, dtype=int) for fv in data]
    weight_pos = weight_neg = 1.0
    if config.class_weighting:
        n_pos = float((ys > 0).sum())
        n_neg = float((ys < 0).sum())
        if n_pos and n_neg:
            weight_pos = len(ys) / (2.0 * n_pos)
            weight_neg = len(ys) / (2.0 * n_neg)

    v = np.zeros(n_features)
    scale = 1.0                     # effective weights = scale * v (L2 path)
    bias = 0.0
    u = 0.0                         # cumulative L1 penalty rate
    q = np.zeros(n_features)        # L1 penalty actually applied per coord
    t = 0
    order = np.arange(len(data))
    for _ in range(config.epochs):
        if config.shuffle:
            rng.shuffle(order)
        for i in order:
            idx = actives[i]
            eta = config.eta0 / (1.0 + t * config.decay)
            t += 1
            y = ys[i]
            margin = y * (scale * float(v[idx].sum()) + bias)
            if not math.isfinite(margin):
                raise FloatingPointError(
                    f"non-finite margin at update {t} (class {positive.value})"
                )
            g = _loss_gradient_scale(loss, margin) * y
            g *= weight_pos if y > 0 else weight_neg
            if regularizer == L2:
                if config.lambda_ > 0.0:
                    scale *= 1.0 - eta * config.lambda_
                    if scale < 1e-9:
                        v *= scale
                        scale = 1.0
                if g != 0.0:
                    v[idx] -= eta * g / scale
            else:                   # L1 with cumulative penalty
                u += eta * config.lambda_
                if g != 0.0:
                    v[idx] -= eta * g
                w = v[idx]
                z = w.copy()
                pos = w > 0
                neg = w < 0
                w[pos] = np.maximum(0.0, w[pos] - (u + q[idx][pos]))
                w[neg] = np.minimum(0.0, w[neg] + (u - q[idx][neg]))
                v[idx] = w
                q[idx] += w - z
            if g != 0.0:
                bias -= eta * g
    weights = scale * v if regularizer == L2 else v
    return weights, bias


def train_linear(data: list[FeatureVector], loss: str = LOGISTIC,
                 regularizer: str = L2, config: TrainConfig = TrainConfig(),
                 n_features: int | None = None) -> LinearModel:
    """One-vs-rest training over the three coarse classes."""
    if not data:
        raise ValueError("cannot train on empty data")
    if loss not in (LOGISTIC, HINGE):
        raise ValueError(f"unknown loss {loss!r}")
    if regularizer not in (L1, L2):
        raise ValueError(f"unknown regularizer {regularizer!r}")
    if n_features is None:
        n_features = 1 + max((max(fv.indices) for fv in data if fv.indices),
                             default=-1)
    seeds = np.random.SeedSequence(config.seed).spawn(len(CLASS_ORDER))
    weights = np.zeros((len(CLASS_ORDER), n_features))
    bias = np.zeros(len(CLASS_ORDER))
    for k, cls in enumerate(CLASS_ORDER):
        rng = np.random.default_rng(seeds[k])
        weights[k], bias[k] = _train_one_vs_rest(
            data, cls, loss, regularizer, config, n_features, rng
        )
    return LinearModel(weights=weights, bias=bias, loss=loss,
                       regularizer=regularizer, lambda_=config.lambda_)
