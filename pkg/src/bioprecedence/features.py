"""Sparse binary features for event pairs.

Four families: per-event features (taxonomy, trigger, replaced n-grams,
trigger-to-argument paths), surface context between the events, syntactic
paths, and coreference signals. Every feature string carries a namespace
prefix and generation order is deterministic, so a (pairs, documents)
input always produces the same vocabulary.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

from bioprecedence.candidates import _participants_match
from bioprecedence.corpus import CoarseLabel, Document, EventMention, Sentence
from bioprecedence.syntax import SynPath, path_to_root, render_path, shortest_path

log = logging.getLogger(__name__)

#: Longest replaced-token window used for the per-event n-grams; extraction
#: spans beyond this are trimmed around the trigger.
NGRAM_WINDOW = 20

FeatureSet = list[str]


# ---------------------------------------------------------------------------
# helpers


def _ngrams(tokens: list[str], lo: int = 1, hi: int = 3):
    for n in range(lo, hi + 1):
        for i in range(len(tokens) - n + 1):
            yield " ".join(tokens[i:i + n])


def _shared_arguments(e1: EventMention, e2: EventMention) -> frozenset:
    shared = set()
    for a in e1.arguments:
        for b in e2.arguments:
            if _participants_match(a, b):
                shared.add(a)
                shared.add(b)
    return frozenset(shared)


def _replaced_sequence(event: EventMention, sentence: Sentence,
                       replacement) -> list[str]:
    """Full-span tokens with argument spans collapsed to replacement tokens,
    trimmed to a window around the trigger."""
    fs, fe = event.full_span
    inside = sorted(
        (a for a in event.arguments if fs <= a.span[0] and a.span[1] <= fe),
        key=lambda a: a.span,
    )
    chosen = []
    cursor = fs
    for a in inside:
        if a.span[0] >= cursor:
            chosen.append(a)
            cursor = a.span[1]
    seq: list[str] = []
    trigger_pos = 0
    i = fs
    ai = 0
    while i < fe:
        if ai < len(chosen) and chosen[ai].span[0] == i:
            if chosen[ai].span[0] <= event.trigger[0] < chosen[ai].span[1]:
                trigger_pos = len(seq)
            seq.append(replacement(chosen[ai]))
            i = chosen[ai].span[1]
            ai += 1
        else:
            if i == event.trigger[0]:
                trigger_pos = len(seq)
            seq.append(sentence.tokens[i].text)
            i += 1
    if len(seq) > NGRAM_WINDOW:
        start = min(max(trigger_pos - NGRAM_WINDOW // 2, 0), len(seq) - NGRAM_WINDOW)
        seq = seq[start:start + NGRAM_WINDOW]
    return seq


def _min_path(sentence: Sentence, from_span: tuple[int, int],
              to_span: tuple[int, int]) -> SynPath | None:
    """Shortest path between any token of the two spans."""
    best = None
    for a in range(*from_span):
        for b in range(*to_span):
            path = shortest_path(sentence.graph, a, b, len(sentence.tokens))
            if path is None:
                continue
            key = (len(path), tuple(s.key() for s in path.steps))
            if best is None or key < best[0]:
                best = (key, path)
    return best[1] if best else None


# ---------------------------------------------------------------------------
# feature families


def event_features(event: EventMention, doc: Document, prefix: str,
                   shared: frozenset = frozenset()) -> FeatureSet:
    """Features of one event in isolation, under a namespace prefix."""
    sentence = doc.sentences[event.sentence]
    feats = [f"{prefix}:label={lab}" for lab in event.labels]
    trigger_text = sentence.text_of(event.trigger)
    feats.append(f"{prefix}:trigger={trigger_text}")
    feats.append(f"{prefix}:trigger+label={trigger_text}+{event.most_specific_label}")

    entity_seq = _replaced_sequence(
        event, sentence,
        lambda a: "SHARED" if a in shared else (a.label.upper() or "ENTITY"),
    )
    feats.extend(f"{prefix}:eng={g}" for g in _ngrams(entity_seq))
    role_seq = _replaced_sequence(event, sentence, lambda a: a.role.upper())
    feats.extend(f"{prefix}:rng={g}" for g in _ngrams(role_seq))

    for arg in event.arguments:
        path = _min_path(sentence, event.trigger, arg.span)
        if path is None:
            continue
        feats.append(f"{prefix}:argpath={render_path(path, 'unlexicalized')}")
        feats.append(f"{prefix}:argpath_lem={render_path(path, 'lemmas', sentence)}")
        feats.append(
            f"{prefix}:argpath_role="
            f"{render_path(path, 'endpoints_roles', endpoint=arg.role.upper())}"
        )
        feats.append(
            f"{prefix}:argpath_lab="
            f"{render_path(path, 'endpoints_labels', endpoint=arg.label.upper() or 'ENTITY')}"
        )
    return feats


def surface_features(pair, doc: Document) -> FeatureSet:
    """1-3-grams of the tokens strictly between the two event spans."""
    first, second = pair.e1, pair.e2
    if first.text_position() > second.text_position():
        first, second = second, first
    words: list[str] = []
    if first.sentence == second.sentence:
        toks = doc.sentences[first.sentence].tokens
        words = [t.text for t in toks[first.full_span[1]:second.full_span[0]]]
    else:
        words = [t.text for t in
                 doc.sentences[first.sentence].tokens[first.full_span[1]:]]
        for s in range(first.sentence + 1, second.sentence):
            words.append("<S>")
            words.extend(t.text for t in doc.sentences[s].tokens)
        words.append("<S>")
        words.extend(t.text for t in
                     doc.sentences[second.sentence].tokens[:second.full_span[0]])
    return [f"between:{g}" for g in _ngrams(words)]


def cross_sentence_path_feature(pair, doc: Document) -> str | None:
    """Root-to-trigger paths of the two events joined with ``+``."""
    sides = []
    for event in (pair.e1, pair.e2):
        sentence = doc.sentences[event.sentence]
        best = None
        for idx in range(*event.trigger):
            try:
                path = path_to_root(sentence.graph, idx)
            except Exception:
                continue
            key = (len(path), tuple(s.key() for s in path.steps))
            if best is None or key < best[0]:
                best = (key, path)
        if best is None:
            return None
        rendered = render_path(best[1], "unlexicalized")
        sides.append(f"root {rendered}" if rendered else "root")
    return " + ".join(sides)


def syntax_features(pair, doc: Document) -> FeatureSet:
    feats: FeatureSet = []
    if pair.e1.sentence != pair.e2.sentence:
        cross = cross_sentence_path_feature(pair, doc)
        if cross is not None:
            feats.append(f"path:cross={cross}")
        return feats
    sentence = doc.sentences[pair.e1.sentence]
    t2t = _min_path(sentence, pair.e1.trigger, pair.e2.trigger)
    if t2t is not None:
        feats.append(f"path:t2t={render_path(t2t, 'unlexicalized')}")
        feats.append(f"path:t2t_lem={render_path(t2t, 'lemmas', sentence)}")
        feats.append(f"path:dist={len(t2t)}")
    span_path = _min_path(sentence, pair.e1.full_span, pair.e2.full_span)
    if span_path is not None:
        feats.append(f"path:short={render_path(span_path, 'unlexicalized')}")
        feats.append(f"path:short_lem={render_path(span_path, 'lemmas', sentence)}")
        feats.append(f"path:sdist={len(span_path)}")
    return feats


def coref_features(pair, doc: Document) -> FeatureSet:
    feats: FeatureSet = []
    for name, event in (("e1", pair.e1), ("e2", pair.e2)):
        if event.is_anaphor:
            feats.append(f"coref:{name}:is_anaphor")
            feats.extend(event_features(event, doc, prefix="coref-anaphor"))
        for arg in event.arguments:
            if arg.resolved_via_coref:
                feats.append(f"coref:{arg.role.upper()}:resolved")
    return feats


def pair_features(pair, doc: Document) -> FeatureSet:
    """All feature families for one pair, in a fixed deterministic order."""
    shared = _shared_arguments(pair.e1, pair.e2)
    feats = event_features(pair.e1, doc, "event1", shared)
    feats += event_features(pair.e2, doc, "event2", shared)
    feats += surface_features(pair, doc)
    feats += syntax_features(pair, doc)
    feats += coref_features(pair, doc)
    return feats


# ---------------------------------------------------------------------------
# vocabulary and vectors


class FrozenIndexError(RuntimeError):
    pass


class FeatureIndex:
    """Dense feature-string -> column mapping with a freeze switch."""

    def __init__(self):
        self._columns: dict[str, int] = {}
        self.frozen = False

    def __len__(self) -> int:
        return len(self._columns)

    def __contains__(self, feature: str) -> bool:
        return feature in self._columns

    def add(self, feature: str) -> int:
        if self.frozen:
            raise FrozenIndexError("cannot add features to a frozen index")
        if feature not in self._columns:
            self._columns[feature] = len(self._columns)
        return self._columns[feature]

    def column(self, feature: str) -> int | None:
        return self._columns.get(feature)

    def freeze(self) -> "FeatureIndex":
        self.frozen = True
        return self

    def items(self):
        return self._columns.items()

    def to_text(self) -> str:
        lines = [f"{feat}\t{col}" for feat, col in sorted(self._columns.items())]
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(cls, text: str) -> "FeatureIndex":
        index = cls()
        entries = []
        for line in text.splitlines():
            if not line.strip():
                continue
            feat, _, col = line.rpartition("\t")
            entries.append((int(col), feat))
        entries.sort()
        for col, feat in entries:
            if col != len(index._columns):
                raise ValueError("feature index columns must be dense from 0")
            index._columns[feat] = col
        return index.freeze()

    @classmethod
    def from_mapping(cls, mapping: dict[str, int]) -> "FeatureIndex":
        index = cls()
        for feat, col in sorted(mapping.items(), key=lambda kv: kv[1]):
            if col != len(index._columns):
                raise ValueError("feature index columns must be dense from 0")
            index._columns[feat] = col
        return index.freeze()


@dataclass(frozen=True)
class FeatureVector:
    """Deduplicated binary vector: strictly increasing column indices."""

    indices: tuple[int, ...]
    label: CoarseLabel | None = None

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise ValueError("feature vector indices must be strictly increasing")


def build_index(pairs, docs: dict[str, Document]) -> FeatureIndex:
    """Vocabulary over the training pairs only; returned frozen."""
    index = FeatureIndex()
    for pair in pairs:
        for feat in pair_features(pair, docs[pair.doc_id]):
            index.add(feat)
    index.freeze()
    log.info("feature index built: %d features over %d pairs", len(index),
             len(list(pairs)))
    return index


def vectorize(pair, docs: dict[str, Document], index: FeatureIndex) -> FeatureVector:
    """Project a pair onto a frozen vocabulary; unseen features are dropped."""
    if not index.frozen:
        raise FrozenIndexError(
            "vectorize needs a frozen index; freeze it after building on "
            "training data"
        )
    cols = set()
    for feat in pair_features(pair, docs[pair.doc_id]):
        col = index.column(feat)
        if col is not None:
            cols.add(col)
    label = pair.coarse_label if hasattr(pair, "coarse_label") else None
    return FeatureVector(indices=tuple(sorted(cols)), label=label)
