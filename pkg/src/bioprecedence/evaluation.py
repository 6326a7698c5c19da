"""Stratified cross-validation, micro metrics, and analysis reports.

All randomness flows from one top-level seed, folds can evaluate in
parallel worker processes, and reports serialize deterministically so a
repeated run produces byte-identical output.
"""
from __future__ import annotations

import concurrent.futures
import csv
import io
import itertools
import json
import warnings
from dataclasses import dataclass

import numpy as np

from bioprecedence.corpus import (
    CLASS_ORDER,
    CoarseLabel,
    CorpusError,
    POSITIVE_CLASSES,
    RelationLabel,
)
from bioprecedence.features import build_index, vectorize
from bioprecedence.forest import train_forest
from bioprecedence.linear import (
    HINGE,
    L1,
    L2,
    LOGISTIC,
    TrainConfig,
    predict,
    train_linear,
)
from bioprecedence.neural import BASIC, PITCHFORK, NetConfig, load_embeddings, train_net
from bioprecedence.pipeline import (
    DETERMINISTIC_SPECS,
    NeuralPredictor,
    SievePlan,
    PlanEntry,
    CONFIGURED,
    VectorPredictor,
    combine_precomputed,
    deterministic_predictor,
    net_input,
    rank_sieves,
)

_CLASS_INDEX = {c: k for k, c in enumerate(CLASS_ORDER)}

LINEAR_SPECS = {
    "lr_l1": (LOGISTIC, L1),
    "lr_l2": (LOGISTIC, L2),
    "svm_l1": (HINGE, L1),
    "svm_l2": (HINGE, L2),
}
NEURAL_SPECS = {
    "lstm": (BASIC, False),
    "lstm_p": (BASIC, True),
    "flstm": (PITCHFORK, False),
    "flstm_p": (PITCHFORK, True),
}
MODEL_SPECS = (
    DETERMINISTIC_SPECS + tuple(LINEAR_SPECS) + ("forest",) + tuple(NEURAL_SPECS)
)


# ---------------------------------------------------------------------------
# folds


@dataclass(frozen=True)
class FoldAssignment:
    k: int
    seed: int
    fold_of: tuple[int, ...]

    def fold_indices(self, fold: int) -> list[int]:
        return [i for i, f in enumerate(self.fold_of) if f == fold]

    def split(self, fold: int) -> tuple[list[int], list[int]]:
        """(train indices, test indices) for one fold."""
        train, test = [], []
        for i, f in enumerate(self.fold_of):
            (test if f == fold else train).append(i)
        return train, test


def _coarse_of(item) -> CoarseLabel:
    if isinstance(item, CoarseLabel):
        return item
    return item.coarse_label


def stratified_folds(dataset, k: int, seed: int = 0) -> FoldAssignment:
    """Deal each class round-robin into k folds after a seeded shuffle.

    Per-class counts across folds differ by at most one; classes with fewer
    than k members trigger a warning and spread best-effort.
    """
    n = len(dataset)
    if k < 2:
        raise ValueError("k must be >= 2")
    if k > n:
        raise ValueError(f"cannot make {k} folds from {n} examples")
    rng = np.random.default_rng([seed, 0x5F01D])
    groups: dict[CoarseLabel, list[int]] = {}
    for i, item in enumerate(dataset):
        groups.setdefault(_coarse_of(item), []).append(i)
    fold_of = [0] * n
    offset = 0
    for label in sorted(groups, key=lambda lab: lab.value):
        indices = np.array(groups[label])
        if len(indices) < k:
            warnings.warn(
                f"class {label.value!r} has {len(indices)} examples for {k} folds"
            )
        rng.shuffle(indices)
        for j, i in enumerate(indices):
            fold_of[int(i)] = (offset + j) % k
        offset += len(indices)
    return FoldAssignment(k=k, seed=seed, fold_of=tuple(fold_of))


# ---------------------------------------------------------------------------
# micro metrics


def _contributions(pred: CoarseLabel, gold: CoarseLabel,
                   positive_classes) -> tuple[int, int, int]:
    tp = fp = fn = 0
    if pred in positive_classes:
        if pred == gold:
            tp = 1
        else:
            fp = 1
            if gold in positive_classes:
                fn = 1
    elif gold in positive_classes:
        fn = 1
    return tp, fp, fn


def micro_prf(predictions, gold,
              positive_classes=POSITIVE_CLASSES) -> tuple[float, float, float]:
    """Precision/recall/F1 with counts pooled over the positive classes.

    A positive prediction in the wrong direction is both a false positive
    for its class and a false negative for the gold class. With no positive
    predictions, precision is 1 when there was nothing to find and 0
    otherwise (and symmetrically for recall).
    """
    predictions = list(predictions)
    gold = list(gold)
    if len(predictions) != len(gold):
        raise ValueError(
            f"prediction/gold misalignment: {len(predictions)} vs {len(gold)}"
        )
    tp = fp = fn = 0
    for pred, actual in zip(predictions, gold):
        dtp, dfp, dfn = _contributions(pred, actual, positive_classes)
        tp += dtp
        fp += dfp
        fn += dfn
    if tp + fp > 0:
        p = tp / (tp + fp)
    else:
        p = 1.0 if tp + fn == 0 else 0.0
    if tp + fn > 0:
        r = tp / (tp + fn)
    else:
        r = 1.0 if tp + fp == 0 else 0.0
    f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return p, r, f1


def confusion_counts(predictions, gold) -> dict[tuple[str, str], int]:
    counts: dict[tuple[str, str], int] = {}
    for pred, actual in zip(predictions, gold):
        key = (actual.value, pred.value)
        counts[key] = counts.get(key, 0) + 1
    return counts


# ---------------------------------------------------------------------------
# bootstrap significance


def _vector_f1(tp, fp, fn) -> np.ndarray:
    pos_pred = tp + fp
    pos_gold = tp + fn
    p = np.where(pos_pred > 0, tp / np.maximum(pos_pred, 1),
                 np.where(pos_gold == 0, 1.0, 0.0))
    r = np.where(pos_gold > 0, tp / np.maximum(pos_gold, 1),
                 np.where(pos_pred == 0, 1.0, 0.0))
    denom = p + r
    return np.where(denom > 0, 2 * p * r / np.maximum(denom, 1e-12), 0.0)


def bootstrap_compare(preds_a, preds_b, gold, iterations: int = 10000,
                      seed: int = 0) -> float:
    """Paired bootstrap over instances, one-sided.

    Returns the fraction of resamples where system b's micro F1 is at least
    system a's: small values support "a outperforms b".
    """
    if iterations <= 0:
        raise ValueError("iterations must be positive")
    preds_a, preds_b, gold = list(preds_a), list(preds_b), list(gold)
    if not (len(preds_a) == len(preds_b) == len(gold)):
        raise ValueError("prediction/gold sequences must be aligned")
    n = len(gold)
    contrib_a = np.array([_contributions(p, g, POSITIVE_CLASSES)
                          for p, g in zip(preds_a, gold)], dtype=float)
    contrib_b = np.array([_contributions(p, g, POSITIVE_CLASSES)
                          for p, g in zip(preds_b, gold)], dtype=float)
    rng = np.random.default_rng([seed, 0xB001])
    wins = 0
    chunk = max(1, min(iterations, 2_000_000 // max(n, 1)))
    done = 0
    while done < iterations:
        m = min(chunk, iterations - done)
        idx = rng.integers(0, n, size=(m, n))
        sums_a = contrib_a[idx].sum(axis=1)
        sums_b = contrib_b[idx].sum(axis=1)
        f1_a = _vector_f1(sums_a[:, 0], sums_a[:, 1], sums_a[:, 2])
        f1_b = _vector_f1(sums_b[:, 0], sums_b[:, 1], sums_b[:, 2])
        wins += int((f1_b >= f1_a).sum())
        done += m
    return wins / iterations


# ---------------------------------------------------------------------------
# overlap and distribution reports


@dataclass
class OverlapReport:
    sizes: dict[str, int]
    pairwise: list[dict]
    regions: dict[str, dict[str, int]]

    def to_json(self) -> str:
        return json.dumps({
            "sizes": self.sizes,
            "pairwise": self.pairwise,
            "regions": self.regions,
        }, sort_keys=True, indent=2)

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out)
        writer.writerow(["model_a", "model_b", "intersection", "only_a", "only_b"])
        for row in self.pairwise:
            writer.writerow([row["model_a"], row["model_b"],
                             row["intersection"], row["only_a"], row["only_b"]])
        return out.getvalue()


def overlap_report(tp_sets: dict[str, set], universe: set | None = None,
                   groups: list[list[str]] | None = None) -> OverlapReport:
    """Pairwise and k-way true-positive overlap, Venn-ready."""
    if universe is None:
        universe = set().union(*tp_sets.values()) if tp_sets else set()
    for model_id, ids in tp_sets.items():
        stray = ids - universe
        if stray:
            raise CorpusError(
                f"model {model_id!r} has ids outside the universe: {sorted(stray)[:3]}"
            )
    sizes = {m: len(ids) for m, ids in tp_sets.items()}
    pairwise = []
    for a, b in itertools.combinations(sorted(tp_sets), 2):
        inter = len(tp_sets[a] & tp_sets[b])
        pairwise.append({
            "model_a": a,
            "model_b": b,
            "intersection": inter,
            "only_a": len(tp_sets[a] - tp_sets[b]),
            "only_b": len(tp_sets[b] - tp_sets[a]),
        })
    if groups is None:
        groups = [sorted(tp_sets)] if len(tp_sets) > 1 else []
    regions: dict[str, dict[str, int]] = {}
    for group in groups:
        missing = [m for m in group if m not in tp_sets]
        if missing:
            raise CorpusError(f"unknown model ids in group: {missing}")
        group_regions = {}
        for r in range(1, len(group) + 1):
            for subset in itertools.combinations(sorted(group), r):
                inside = set(universe)
                for m in subset:
                    inside &= tp_sets[m]
                for m in group:
                    if m not in subset:
                        inside -= tp_sets[m]
                group_regions["&".join(subset)] = len(inside)
        regions["+".join(sorted(group))] = group_regions
    return OverlapReport(sizes=sizes, pairwise=pairwise, regions=regions)


def distribution_report(pairs) -> dict[str, dict[str, int]]:
    """Per-label counts split by sentence locality and coreference."""
    rows = {
        label.value: {"within_sentence": 0, "across_sentence": 0,
                      "involving_coref": 0, "total": 0}
        for label in RelationLabel
    }
    for pair in pairs:
        row = rows[pair.label.value]
        row["total"] += 1
        if pair.same_sentence:
            row["within_sentence"] += 1
        else:
            row["across_sentence"] += 1
        if pair.involves_coref:
            row["involving_coref"] += 1
    return rows


def distribution_csv(rows: dict[str, dict[str, int]]) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["label", "within_sentence", "across_sentence",
                     "involving_coref", "total"])
    for label in RelationLabel:
        row = rows[label.value]
        writer.writerow([label.value, row["within_sentence"],
                         row["across_sentence"], row["involving_coref"],
                         row["total"]])
    return out.getvalue()


# ---------------------------------------------------------------------------
# cross-validation


@dataclass(frozen=True)
class EvalOptions:
    lambda_grid: tuple[float, ...] = (1e-4, 1e-3, 1e-2, 1e-1, 1.0)
    linear_epochs: int = 50
    class_weighting: bool = False
    forest_trees: int = 100
    forest_depth: int = 8
    net_epochs: int = 100
    net_batch: int = 32
    net_hidden: int = 64
    net_embedding_dim: int = 200
    net_dropout: float = 0.5
    net_patience: int = 10
    net_max_tokens: int = 200
    order_mode: str = "nested"     # "nested" measures dev precision per fold
    embeddings_path: str | None = None


@dataclass
class ModelReport:
    model_id: str
    precision: float
    recall: float
    f1: float
    per_fold: list[dict]
    confusion: dict[tuple[str, str], int]
    true_positive_ids: list[str]

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "per_fold": self.per_fold,
            "confusion": {f"{g}|{p}": n for (g, p), n in sorted(self.confusion.items())},
            "true_positive_ids": self.true_positive_ids,
        }


@dataclass
class CvResult:
    k: int
    seed: int
    specs: list[str]
    options: EvalOptions
    models: dict[str, ModelReport]
    combined: ModelReport
    plans: list[dict]
    pair_ids: list[str]
    gold: list[str]
    predictions: dict[str, list[str]]

    def to_json(self) -> str:
        return json.dumps({
            "config": {
                "k": self.k,
                "seed": self.seed,
                "specs": self.specs,
                "options": {k: (list(v) if isinstance(v, tuple) else v)
                            for k, v in vars(self.options).items()},
                "metric": "micro P/R/F1 pooled over both precedes directions",
            },
            "models": {m: r.to_dict() for m, r in sorted(self.models.items())},
            "combined": self.combined.to_dict(),
            "plans": self.plans,
            "pair_ids": self.pair_ids,
            "gold": self.gold,
            "predictions": self.predictions,
        }, sort_keys=True, indent=2)

    def to_text(self) -> str:
        lines = [f"{'model':<14} {'p':>7} {'r':>7} {'f1':>7}"]
        for spec in self.specs:
            r = self.models[spec]
            lines.append(
                f"{spec:<14} {r.precision:>7.4f} {r.recall:>7.4f} {r.f1:>7.4f}"
            )
        c = self.combined
        lines.append(f"{'combined':<14} {c.precision:>7.4f} {c.recall:>7.4f} {c.f1:>7.4f}")
        return "\n".join(lines) + "\n"


def _spec_seed(seed: int, fold: int, position: int) -> int:
    return int(np.random.SeedSequence([seed, fold, position]).generate_state(1)[0])


def _train_linear_spec(spec, fit_fvs, dev_fvs, gold_dev, index, options, seed):
    loss, reg = LINEAR_SPECS[spec]
    best = None
    for lam in options.lambda_grid:
        config = TrainConfig(epochs=options.linear_epochs, lambda_=lam, seed=seed,
                             class_weighting=options.class_weighting)
        model = train_linear(fit_fvs, loss, reg, config, n_features=len(index))
        preds = [predict(model, fv)[0] for fv in dev_fvs]
        _, _, f1 = micro_prf(preds, gold_dev)
        if best is None or f1 > best[0]:
            best = (f1, model)
    return best[1]


def _train_neural_spec(spec, fit_pairs, dev_pairs, docs, options, seed):
    architecture, pretrained = NEURAL_SPECS[spec]
    embeddings = None
    dim = options.net_embedding_dim
    if pretrained:
        if options.embeddings_path is None:
            raise ValueError(f"model {spec!r} needs an embeddings file")
        embeddings = load_embeddings(options.embeddings_path)
        dim = embeddings.dim
    config = NetConfig(
        architecture=architecture,
        pretrained=pretrained,
        embedding_dim=dim,
        hidden_size=options.net_hidden,
        dropout=options.net_dropout,
        max_epochs=options.net_epochs,
        batch_size=options.net_batch,
        patience=options.net_patience,
        max_tokens=options.net_max_tokens,
        seed=seed,
    )
    def examples(pairs):
        return [
            (net_input(p, docs[p.doc_id], architecture),
             _CLASS_INDEX[p.coarse_label])
            for p in pairs
        ]
    net, _ = train_net(examples(fit_pairs), examples(dev_pairs), config,
                       embeddings)
    return net


def _fit_fold_models(specs, train_pairs, docs, fold, seed, options):
    """Inner dev split plus one trained predictor per spec."""
    inner_k = max(2, min(5, len(train_pairs) // 2))
    inner = stratified_folds(train_pairs, inner_k, seed=_spec_seed(seed, fold, 999))
    dev_local, fit_local = [], []
    for i, pair in enumerate(train_pairs):
        (dev_local if inner.fold_of[i] == 0 else fit_local).append(pair)
    index = build_index(fit_local, docs)
    fit_fvs = [vectorize(p, docs, index) for p in fit_local]
    dev_fvs = [vectorize(p, docs, index) for p in dev_local]
    gold_dev = [p.coarse_label for p in dev_local]

    predictors = {}
    for position, spec in enumerate(specs):
        spec_seed = _spec_seed(seed, fold, position)
        if spec in DETERMINISTIC_SPECS:
            predictors[spec] = deterministic_predictor(spec)
        elif spec in LINEAR_SPECS:
            model = _train_linear_spec(spec, fit_fvs, dev_fvs, gold_dev, index,
                                       options, spec_seed)
            predictors[spec] = VectorPredictor(spec, model, index)
        elif spec == "forest":
            model = train_forest(fit_fvs, n_trees=options.forest_trees,
                                 max_depth=options.forest_depth,
                                 seed=spec_seed)
            predictors[spec] = VectorPredictor(spec, model, index)
        elif spec in NEURAL_SPECS:
            net = _train_neural_spec(spec, fit_local, dev_local, docs, options,
                                     spec_seed)
            predictors[spec] = NeuralPredictor(spec, net)
        else:
            raise ValueError(f"unknown model spec {spec!r}")
    return predictors, dev_local, gold_dev


def train_predictor(spec: str, dataset, docs, options: EvalOptions = EvalOptions(),
                    seed: int = 0):
    """Train one model on a full dataset, with an internal validation split."""
    dataset = [p for p in dataset if not p.discarded]
    predictors, _, _ = _fit_fold_models([spec], dataset, docs, 0, seed, options)
    return predictors[spec]


def _evaluate_fold(args) -> dict:
    (fold, dataset, docs, specs, assignment, seed, options) = args
    train_idx, test_idx = assignment.split(fold)
    train_pairs = [dataset[i] for i in train_idx]
    test_pairs = [dataset[i] for i in test_idx]
    predictors, dev_local, gold_dev = _fit_fold_models(
        specs, train_pairs, docs, fold, seed, options
    )
    dev_preds = {
        spec: [predictors[spec].predict_pair(p, docs[p.doc_id]) for p in dev_local]
        for spec in specs
    }
    test_preds = {
        spec: [predictors[spec].predict_pair(p, docs[p.doc_id]) for p in test_pairs]
        for spec in specs
    }
    if options.order_mode == "nested":
        plan = rank_sieves(specs, dev_preds, gold_dev, prior_order=specs)
    else:
        plan = SievePlan(entries=tuple(
            PlanEntry(spec, 0.0, CONFIGURED) for spec in specs
        ))
    combined = combine_precomputed(plan, test_preds)
    return {
        "fold": fold,
        "pair_ids": [p.pair_id for p in test_pairs],
        "gold": [p.coarse_label for p in test_pairs],
        "test_preds": test_preds,
        "combined": combined,
        "plan": json.loads(plan.to_json()),
    }


def _pool_report(model_id, fold_results, key) -> ModelReport:
    preds, gold, ids = [], [], []
    per_fold = []
    for res in fold_results:
        fold_preds = res[key] if key == "combined" else res["test_preds"][model_id]
        p, r, f1 = micro_prf(fold_preds, res["gold"])
        per_fold.append({"fold": res["fold"], "precision": p, "recall": r,
                         "f1": f1, "n_test": len(fold_preds)})
        preds.extend(fold_preds)
        gold.extend(res["gold"])
        ids.extend(res["pair_ids"])
    p, r, f1 = micro_prf(preds, gold)
    tp_ids = sorted(
        pid for pid, pred, actual in zip(ids, preds, gold)
        if pred in POSITIVE_CLASSES and pred == actual
    )
    return ModelReport(
        model_id=model_id, precision=p, recall=r, f1=f1, per_fold=per_fold,
        confusion=confusion_counts(preds, gold), true_positive_ids=tp_ids,
    )


def run_cv(dataset, docs, specs, k: int = 10, seed: int = 0,
           options: EvalOptions = EvalOptions(), jobs: int = 1) -> CvResult:
    """Cross-validated evaluation of every spec plus the sieve combination.

    Per fold: the feature vocabulary and all statistical models are fit on
    the training split only, with an inner class-balanced fold held out for
    validation (early stopping, the regularization grid, and sieve
    ranking). Test predictions are pooled across folds before computing the
    micro metrics.
    """
    dataset = [p for p in dataset if not p.discarded]
    if not dataset:
        raise ValueError("no usable pairs to evaluate")
    specs = list(specs)
    assignment = stratified_folds(dataset, k, seed)
    payloads = [
        (fold, dataset, docs, specs, assignment, seed, options)
        for fold in range(k)
    ]
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_evaluate_fold, payloads))
    else:
        results = [_evaluate_fold(p) for p in payloads]
    results.sort(key=lambda r: r["fold"])
    models = {spec: _pool_report(spec, results, spec) for spec in specs}
    combined = _pool_report("combined", results, "combined")
    predictions = {
        spec: [lab.value for r in results for lab in r["test_preds"][spec]]
        for spec in specs
    }
    predictions["combined"] = [
        lab.value for r in results for lab in r["combined"]
    ]
    return CvResult(
        k=k, seed=seed, specs=specs, options=options, models=models,
        combined=combined, plans=[r["plan"] for r in results],
        pair_ids=[pid for r in results for pid in r["pair_ids"]],
        gold=[lab.value for r in results for lab in r["gold"]],
        predictions=predictions,
    )
