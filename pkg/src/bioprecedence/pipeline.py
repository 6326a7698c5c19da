"""Precision-ordered sieve combination.

Models are applied in descending order of measured precision; the first
positive (non-NIL) prediction is final and later sieves can only fill in
pairs still labeled NIL. Models that made no positive prediction on the
ranking data cannot be ordered by precision and fall back to a configured
prior order after the measured ones.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from bioprecedence.candidates import encompassing_span
from bioprecedence.corpus import CoarseLabel, Document, POSITIVE_CLASSES
from bioprecedence.features import FeatureIndex, vectorize
from bioprecedence.linear import LinearModel, predict
from bioprecedence.forest import ForestModel
from bioprecedence.neural import BASIC, net_from_json
from bioprecedence.sieves import classify_inter, classify_intra, classify_reichenbach

DEV_FOLDS = "dev_folds"
CONFIGURED = "configured"


@dataclass(frozen=True)
class PlanEntry:
    model_id: str
    precision: float
    source: str                    # DEV_FOLDS or CONFIGURED


@dataclass(frozen=True)
class SievePlan:
    entries: tuple[PlanEntry, ...]

    def __post_init__(self):
        ids = [e.model_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ValueError("plan model ids must be unique")
        precisions = [e.precision for e in self.entries]
        if any(b > a for a, b in zip(precisions, precisions[1:])):
            raise ValueError("plan must be ordered by non-increasing precision")

    def model_ids(self) -> list[str]:
        return [e.model_id for e in self.entries]

    def to_json(self) -> str:
        return json.dumps([
            {"model_id": e.model_id, "precision": e.precision, "source": e.source}
            for e in self.entries
        ], indent=2)

    @classmethod
    def from_json(cls, text: str) -> "SievePlan":
        entries = tuple(
            PlanEntry(model_id=item["model_id"], precision=item["precision"],
                      source=item["source"])
            for item in json.loads(text)
        )
        return cls(entries=entries)


def _pooled_precision(predictions, gold) -> tuple[float, int]:
    """Micro precision over the positive classes, plus the positive count."""
    tp = fp = 0
    for pred, actual in zip(predictions, gold):
        if pred in POSITIVE_CLASSES:
            if pred == actual:
                tp += 1
            else:
                fp += 1
    positives = tp + fp
    return (tp / positives if positives else 0.0), positives


def rank_sieves(model_ids, dev_predictions: dict, gold,
                prior_order=None) -> SievePlan:
    """Order models by micro precision measured on development data.

    ``dev_predictions`` maps model id to a label sequence aligned with
    ``gold``. Models that predicted no positives keep a configured position
    (``prior_order``, defaulting to the listed order) after the measured
    ones; ties in measured precision break by model id.
    """
    gold = list(gold)
    measured = []
    unmeasured = []
    for model_id in model_ids:
        preds = list(dev_predictions[model_id])
        if len(preds) != len(gold):
            raise ValueError(
                f"model {model_id!r}: {len(preds)} predictions for {len(gold)} gold labels"
            )
        precision, positives = _pooled_precision(preds, gold)
        if positives:
            measured.append(PlanEntry(model_id, precision, DEV_FOLDS))
        else:
            unmeasured.append(PlanEntry(model_id, 0.0, CONFIGURED))
    measured.sort(key=lambda e: (-e.precision, e.model_id))
    if prior_order is not None:
        position = {mid: i for i, mid in enumerate(prior_order)}
        unmeasured.sort(key=lambda e: position.get(e.model_id, len(position)))
    return SievePlan(entries=tuple(measured + unmeasured))


def consensus_plan(plans: list[SievePlan], prior_order=None) -> SievePlan:
    """One ordering from per-fold plans: mean measured precision per model.

    Models never measured in any fold keep the configured prior order after
    the measured ones.
    """
    measured_values: dict[str, list[float]] = {}
    all_ids: list[str] = []
    for plan in plans:
        for entry in plan.entries:
            if entry.model_id not in all_ids:
                all_ids.append(entry.model_id)
            if entry.source == DEV_FOLDS:
                measured_values.setdefault(entry.model_id, []).append(entry.precision)
    measured = [
        PlanEntry(mid, sum(vals) / len(vals), DEV_FOLDS)
        for mid, vals in measured_values.items()
    ]
    measured.sort(key=lambda e: (-e.precision, e.model_id))
    rest = [PlanEntry(mid, 0.0, CONFIGURED) for mid in all_ids
            if mid not in measured_values]
    if prior_order is not None:
        position = {mid: i for i, mid in enumerate(prior_order)}
        rest.sort(key=lambda e: position.get(e.model_id, len(position)))
    return SievePlan(entries=tuple(measured + rest))


def combine_precomputed(plan: SievePlan, preds_by_model: dict) -> list[CoarseLabel]:
    """Replay the sieve over aligned per-model prediction lists."""
    ids = plan.model_ids()
    lengths = {len(preds_by_model[m]) for m in ids}
    if len(lengths) > 1:
        raise ValueError("per-model prediction lists must be aligned")
    n = lengths.pop() if lengths else 0
    combined = []
    for i in range(n):
        label = CoarseLabel.NIL
        for model_id in ids:
            cand = preds_by_model[model_id][i]
            if cand is not None and cand != CoarseLabel.NIL:
                label = cand
                break
        combined.append(label)
    return combined


def combine(plan: SievePlan, predictors: dict, pair, doc: Document) -> CoarseLabel:
    """First positive prediction along the plan; NIL when every sieve abstains."""
    for model_id in plan.model_ids():
        label = predictors[model_id].predict_pair(pair, doc)
        if label is not None and label != CoarseLabel.NIL:
            return label
    return CoarseLabel.NIL


# ---------------------------------------------------------------------------
# predictors: one calling convention over all model families


class RulePredictor:
    """Wraps one of the deterministic sieves; abstentions become NIL."""

    def __init__(self, model_id: str, classify):
        self.model_id = model_id
        self._classify = classify

    def predict_pair(self, pair, doc: Document) -> CoarseLabel:
        label = self._classify(pair, doc)
        return label if label is not None else CoarseLabel.NIL


class VectorPredictor:
    """A trained linear or forest model plus the vocabulary it was fit on."""

    def __init__(self, model_id: str, model, index: FeatureIndex):
        self.model_id = model_id
        self.model = model
        self.index = index

    def predict_pair(self, pair, doc: Document) -> CoarseLabel:
        fv = vectorize(pair, {doc.id: doc}, self.index)
        label, _ = predict(self.model, fv)
        return label


class NeuralPredictor:
    def __init__(self, model_id: str, net):
        self.model_id = model_id
        self.net = net

    def predict_pair(self, pair, doc: Document) -> CoarseLabel:
        example = net_input(pair, doc, self.net.config.architecture)
        label, _ = predict(self.net, example)
        return label


def net_input(pair, doc: Document, architecture: str):
    """Token inputs for a pair: the encompassing span, or all three spans."""
    span = encompassing_span(pair.e1, pair.e2, doc)
    span_tokens = span.token_texts(doc)
    if architecture == BASIC:
        return span_tokens
    e1_tokens = [t.text for t in
                 doc.sentences[pair.e1.sentence].tokens[slice(*pair.e1.full_span)]]
    e2_tokens = [t.text for t in
                 doc.sentences[pair.e2.sentence].tokens[slice(*pair.e2.full_span)]]
    return (e1_tokens, span_tokens, e2_tokens)


def deterministic_predictor(model_id: str) -> RulePredictor:
    classifiers = {
        "intra": classify_intra,
        "inter": classify_inter,
        "reichenbach": classify_reichenbach,
    }
    if model_id not in classifiers:
        raise ValueError(f"unknown deterministic model {model_id!r}")
    return RulePredictor(model_id, classifiers[model_id])


DETERMINISTIC_SPECS = ("intra", "inter", "reichenbach")


# ---------------------------------------------------------------------------
# saved-model files (CLI train/predict)


def predictor_to_json(predictor) -> str:
    if isinstance(predictor, RulePredictor):
        payload = {"kind": "rule", "model_id": predictor.model_id}
    elif isinstance(predictor, VectorPredictor):
        payload = {
            "kind": "vector",
            "model_id": predictor.model_id,
            "model": json.loads(predictor.model.to_json()),
            "feature_index": dict(predictor.index.items()),
        }
    elif isinstance(predictor, NeuralPredictor):
        payload = {
            "kind": "neural",
            "model_id": predictor.model_id,
            "model": json.loads(predictor.net.to_json()),
        }
    else:
        raise TypeError(f"cannot serialize predictor {predictor!r}")
    return json.dumps(payload, sort_keys=True)


def predictor_from_json(text: str):
    data = json.loads(text)
    kind = data.get("kind")
    if kind == "rule":
        return deterministic_predictor(data["model_id"])
    if kind == "vector":
        model_data = data["model"]
        if model_data["type"] == "linear":
            model = LinearModel.from_dict(model_data)
        elif model_data["type"] == "forest":
            model = ForestModel.from_dict(model_data)
        else:
            raise ValueError(f"unknown model type {model_data['type']!r}")
        index = FeatureIndex.from_mapping(data["feature_index"])
        return VectorPredictor(data["model_id"], model, index)
    if kind == "neural":
        return NeuralPredictor(data["model_id"],
                               net_from_json(json.dumps(data["model"])))
    raise ValueError(f"unknown predictor kind {kind!r}")
