"""Random forest over binary presence features, split by Gini impurity.

Trees grow on bootstrap samples; each node draws a random subsample of the
features present in its examples. Splits test presence vs absence of one
feature. Zero-gain splits are allowed while the node is impure (presence
features often tie at the root), so parity-style interactions remain
learnable within the depth bound.
"""
from __future__ import annotations

import json
import math

import numpy as np

from bioprecedence.corpus import CLASS_ORDER, CoarseLabel
from bioprecedence.features import FeatureVector

_MODEL_SCHEMA = "bioprecedence-model/1"


class ForestModel:
    def __init__(self, trees: list[dict], n_trees: int, max_depth: int,
                 feature_subsample: float | None, seed: int,
                 classes: tuple[CoarseLabel, ...] = CLASS_ORDER):
        self.trees = trees
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.feature_subsample = feature_subsample
        self.seed = seed
        self.classes = classes

    def scores(self, fv: FeatureVector) -> dict[CoarseLabel, float]:
        present = set(fv.indices)
        total = np.zeros(len(self.classes))
        for tree in self.trees:
            total += _walk(tree, present)
        total /= len(self.trees)
        return {c: float(total[k]) for k, c in enumerate(self.classes)}

    def to_json(self) -> str:
        return json.dumps({
            "schema": _MODEL_SCHEMA,
            "type": "forest",
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "feature_subsample": self.feature_subsample,
            "seed": self.seed,
            "classes": [c.value for c in self.classes],
            "trees": self.trees,
        }, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "ForestModel":
        return cls(
            trees=data["trees"],
            n_trees=data["n_trees"],
            max_depth=data["max_depth"],
            feature_subsample=data["feature_subsample"],
            seed=data["seed"],
            classes=tuple(CoarseLabel(v) for v in data["classes"]),
        )


def _walk(node: dict, present: set[int]) -> np.ndarray:
    while "leaf" not in node:
        node = node["present"] if node["feature"] in present else node["absent"]
    return np.asarray(node["leaf"])


def _distribution(labels: np.ndarray, n_classes: int) -> list[float]:
    counts = np.bincount(labels, minlength=n_classes).astype(float)
    return list(counts / counts.sum())


def _gini(labels: np.ndarray, n_classes: int) -> float:
    counts = np.bincount(labels, minlength=n_classes)
    p = counts / len(labels)
    return float(1.0 - (p * p).sum())


def _grow(examples: list[frozenset[int]], labels: np.ndarray, depth: int,
          max_depth: int, feature_subsample: float | None, n_classes: int,
          rng: np.random.Generator) -> dict:
    if depth >= max_depth or len(set(labels.tolist())) <= 1:
        return {"leaf": _distribution(labels, n_classes)}
    pool = sorted(set().union(*examples)) if examples else []
    if not pool:
        return {"leaf": _distribution(labels, n_classes)}
    if feature_subsample is None:
        m = max(1, round(math.sqrt(len(pool))))
    else:
        m = max(1, round(len(pool) * feature_subsample))
    m = min(m, len(pool))
    candidates = sorted(rng.choice(np.array(pool), size=m, replace=False).tolist())

    parent_impurity = _gini(labels, n_classes)
    best = None
    for feat in candidates:
        mask = np.fromiter((feat in ex for ex in examples), bool, len(examples))
        n_yes = int(mask.sum())
        if n_yes == 0 or n_yes == len(examples):
            continue
        weighted = (
            n_yes * _gini(labels[mask], n_classes)
            + (len(examples) - n_yes) * _gini(labels[~mask], n_classes)
        ) / len(examples)
        gain = parent_impurity - weighted
        if gain >= -1e-12 and (best is None or gain > best[0] + 1e-12):
            best = (gain, feat, mask)
    if best is None:
        return {"leaf": _distribution(labels, n_classes)}
    _, feat, mask = best
    yes = [ex for ex, keep in zip(examples, mask) if keep]
    no = [ex for ex, keep in zip(examples, mask) if not keep]
    return {
        "feature": int(feat),
        "present": _grow(yes, labels[mask], depth + 1, max_depth,
                         feature_subsample, n_classes, rng),
        "absent": _grow(no, labels[~mask], depth + 1, max_depth,
                        feature_subsample, n_classes, rng),
    }


def train_forest(data: list[FeatureVector], n_trees: int = 100,
                 max_depth: int = 8, feature_subsample: float | None = None,
                 seed: int = 0) -> ForestModel:
    """Bootstrap-sampled Gini trees; deterministic given the seed."""
    if n_trees <= 0:
        raise ValueError("n_trees must be positive")
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    if not data:
        raise ValueError("cannot train on empty data")
    class_of = {c: k for k, c in enumerate(CLASS_ORDER)}
    labels = np.array([class_of[fv.label] for fv in data])
    examples = [frozenset(fv.indices) for fv in data]
    trees = []
    for tree_seed in np.random.SeedSequence(seed).spawn(n_trees):
        rng = np.random.default_rng(tree_seed)
        sample = rng.integers(0, len(data), len(data))
        trees.append(_grow(
            [examples[i] for i in sample], labels[sample], 0, max_depth,
            feature_subsample, len(CLASS_ORDER), rng,
        ))
    return ForestModel(trees=trees, n_trees=n_trees, max_depth=max_depth,
                       feature_subsample=feature_subsample, seed=seed)
