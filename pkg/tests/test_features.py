import pytest

from bioprecedence.candidates import EventPair
from bioprecedence.corpus import Argument, Document, EventMention
from bioprecedence.features import (
    FeatureIndex,
    FeatureVector,
    FrozenIndexError,
    build_index,
    coref_features,
    cross_sentence_path_feature,
    event_features,
    pair_features,
    surface_features,
    syntax_features,
    vectorize,
)
from bioprecedence.synth import _sent, synthetic_labeled_corpus


def _doc(rows_per_sentence, doc_id="d"):
    return Document(id=doc_id, sentences=tuple(
        _sent(i, rows) for i, rows in enumerate(rows_per_sentence)
    ))


def _chain_rows(words):
    rows = [(words[0], "NN", 0, "root")]
    rows += [(w, "NN", i + 1, "dep") for i, w in enumerate(words[1:])]
    return rows


def _pair(e1, e2):
    return EventPair(pair_id=f"{e1.id}:{e2.id}", doc_id=e1.doc_id, e1=e1, e2=e2)


# ---------------------------------------------------------------------------
# event features


def test_entity_replacement_ngram():
    doc = _doc([_chain_rows(["the", "ABC", "protein", "dimerizes"])])
    event = EventMention(
        id="e", doc_id="d", sentence=0, trigger=(3, 4), full_span=(0, 4),
        labels=("Binding",),
        arguments=(Argument(role="theme", span=(1, 2), label="Protein",
                            text="ABC"),),
    )
    feats = event_features(event, doc, "event1")
    assert "event1:eng=the PROTEIN" in feats
    assert "event1:eng=the PROTEIN protein" in feats
    assert "event1:rng=the THEME" in feats


def test_role_replacement_collapses_argument_spans():
    words = ["A", "inhibits", "the", "phosphorylation", "of", "B"]
    doc = _doc([_chain_rows(words)])
    event = EventMention(
        id="e", doc_id="d", sentence=0, trigger=(1, 2), full_span=(0, 6),
        labels=("Negative_regulation",),
        arguments=(
            Argument(role="controller", span=(0, 1), label="Protein", text="A"),
            Argument(role="controlled", span=(3, 6), label="", text="phosphorylation of B"),
        ),
    )
    feats = event_features(event, doc, "event1")
    assert "event1:rng=CONTROLLER inhibits" in feats
    assert "event1:rng=inhibits the CONTROLLED" in feats


def test_shared_participant_replaced_with_shared_marker():
    doc = _doc([_chain_rows(["A", "binds", "B", "then", "B", "degrades", "C"])])
    e1 = EventMention(
        id="x", doc_id="d", sentence=0, trigger=(1, 2), full_span=(0, 3),
        labels=("Binding",),
        arguments=(Argument(role="theme", span=(0, 1), label="Protein", text="A"),
                   Argument(role="theme", span=(2, 3), label="Protein", text="B")),
    )
    e2 = EventMention(
        id="y", doc_id="d", sentence=0, trigger=(5, 6), full_span=(4, 7),
        labels=("Degradation",),
        arguments=(Argument(role="theme", span=(4, 5), label="Protein", text="B"),
                   Argument(role="theme", span=(6, 7), label="Protein", text="C")),
    )
    feats = pair_features(_pair(e1, e2), doc)
    assert "event1:eng=PROTEIN binds SHARED" in feats
    assert "event2:eng=SHARED degrades PROTEIN" in feats


def test_event_without_arguments_still_produces_core_features():
    doc = _doc([_chain_rows(["binding", "occurs"])])
    event = EventMention(id="e", doc_id="d", sentence=0, trigger=(0, 1),
                         full_span=(0, 2), labels=("Binding", "SimpleEvent"))
    feats = event_features(event, doc, "event1")
    assert "event1:label=Binding" in feats
    assert "event1:label=SimpleEvent" in feats
    assert "event1:trigger=binding" in feats
    assert "event1:trigger+label=binding+Binding" in feats
    assert not [f for f in feats if ":rng=" in f and "THEME" in f]


def test_every_feature_is_namespaced():
    corpus, pairs = synthetic_labeled_corpus(n_docs=3, seed=6)
    for pair in pairs[:10]:
        for feat in pair_features(pair, corpus.documents[pair.doc_id]):
            assert ":" in feat, feat


def test_generation_is_order_stable():
    corpus, pairs = synthetic_labeled_corpus(n_docs=2, seed=6)
    for pair in pairs:
        doc = corpus.documents[pair.doc_id]
        assert pair_features(pair, doc) == pair_features(pair, doc)


# ---------------------------------------------------------------------------
# surface features


def test_no_interceding_tokens_means_no_surface_features():
    doc = _doc([_chain_rows(["A", "binds", "B", "C", "degrades", "D"])])
    e1 = EventMention(id="x", doc_id="d", sentence=0, trigger=(1, 2),
                      full_span=(0, 3), labels=("Binding",))
    e2 = EventMention(id="y", doc_id="d", sentence=0, trigger=(4, 5),
                      full_span=(3, 6), labels=("Degradation",))
    assert surface_features(_pair(e1, e2), doc) == []


def test_interceding_ngrams_exact_inventory():
    words = ["X", "is", "followed", "by", "Y"]
    doc = _doc([_chain_rows(words)])
    e1 = EventMention(id="x", doc_id="d", sentence=0, trigger=(0, 1),
                      full_span=(0, 1), labels=("A",))
    e2 = EventMention(id="y", doc_id="d", sentence=0, trigger=(4, 5),
                      full_span=(4, 5), labels=("B",))
    feats = surface_features(_pair(e1, e2), doc)
    assert sorted(feats) == sorted([
        "between:is", "between:followed", "between:by",
        "between:is followed", "between:followed by",
        "between:is followed by",
    ])


def test_cross_sentence_surface_marker(curated):
    pair = _pair(curated.mentions["ds-p1"], curated.mentions["ds-a2"])
    feats = surface_features(pair, curated.documents["downstream01"])
    assert any("<S>" in f for f in feats)


# ---------------------------------------------------------------------------
# syntax features


def test_cross_sentence_path_feature_exact_string(curated):
    pair = _pair(curated.mentions["cs-b1"], curated.mentions["cs-b2"])
    doc = curated.documents["crosssent01"]
    joined = cross_sentence_path_feature(pair, doc)
    assert joined == "root >nsubj + root >prep_to >prep_such_as >rcmod"
    assert f"path:cross={joined}" in syntax_features(pair, doc)


def test_intra_sentence_distance_feature():
    # chain: a -r1-> b -r2-> c -r3-> d gives a 3-edge trigger path
    rows = [("a", "NN", 0, "root"), ("b", "NN", 1, "r1"), ("c", "NN", 2, "r2"),
            ("d", "NN", 3, "r3")]
    doc = _doc([rows])
    e1 = EventMention(id="x", doc_id="d", sentence=0, trigger=(0, 1),
                      full_span=(0, 1), labels=("A",))
    e2 = EventMention(id="y", doc_id="d", sentence=0, trigger=(3, 4),
                      full_span=(3, 4), labels=("B",))
    feats = syntax_features(_pair(e1, e2), doc)
    assert "path:dist=3" in feats
    assert "path:t2t=>r1 >r2 >r3" in feats


def test_disconnected_trigger_produces_no_path_features():
    rows = [("a", "NN", 0, "root"), ("b", "NN", 1, "r1"),
            ("c", "NN", 0, "root"), ("d", "NN", 3, "r3")]
    doc = Document(id="d", sentences=(_sent(0, rows[:2] + [
        ("c", "NN", 0, "root"), ("d", "NN", 3, "r3")]),))
    e1 = EventMention(id="x", doc_id="d", sentence=0, trigger=(1, 2),
                      full_span=(1, 2), labels=("A",))
    e2 = EventMention(id="y", doc_id="d", sentence=0, trigger=(3, 4),
                      full_span=(3, 4), labels=("B",))
    feats = syntax_features(_pair(e1, e2), doc)
    assert feats == []


def test_swapping_events_swaps_namespaces_and_reverses_paths(curated):
    e1, e2 = curated.mentions["hi-b1"], curated.mentions["hi-p2"]
    doc = curated.documents["histone01"]
    forward = pair_features(_pair(e1, e2), doc)
    backward = pair_features(_pair(e2, e1), doc)

    def grab(feats, prefix):
        return sorted(f[len(prefix):] for f in feats if f.startswith(prefix))

    assert grab(forward, "event1:") == grab(backward, "event2:")
    assert grab(forward, "event2:") == grab(backward, "event1:")
    fwd_t2t = next(f for f in forward if f.startswith("path:t2t="))
    bwd_t2t = next(f for f in backward if f.startswith("path:t2t="))
    fwd_steps = fwd_t2t.removeprefix("path:t2t=").split(" ")
    bwd_steps = bwd_t2t.removeprefix("path:t2t=").split(" ")
    flip = {">": "<", "<": ">"}
    assert bwd_steps == [flip[s[0]] + s[1:] for s in reversed(fwd_steps)]


# ---------------------------------------------------------------------------
# coreference features


def test_non_anaphoric_pair_has_no_coref_features(curated):
    pair = _pair(curated.mentions["fb-u1"], curated.mentions["fb-p2"])
    assert coref_features(pair, curated.documents["followedby01"]) == []


def test_anaphoric_event_reemits_features_with_coref_prefix():
    corpus, pairs = synthetic_labeled_corpus(n_docs=20, seed=3)
    anaphoric = [p for p in pairs if p.e1.is_anaphor]
    assert anaphoric, "expected at least one anaphoric pair in the fixture"
    pair = anaphoric[0]
    feats = coref_features(pair, corpus.documents[pair.doc_id])
    assert "coref:e1:is_anaphor" in feats
    assert any(f.startswith("coref-anaphor:trigger=") for f in feats)


def test_resolved_argument_feature():
    doc = _doc([_chain_rows(["The", "mutant", "binds", "B"])])
    event = EventMention(
        id="e", doc_id="d", sentence=0, trigger=(2, 3), full_span=(0, 4),
        labels=("Binding",),
        arguments=(Argument(role="theme", span=(0, 2), label="Protein",
                            text="The mutant", resolved_via_coref=True),),
    )
    pair = _pair(event, EventMention(id="f", doc_id="d", sentence=0,
                                     trigger=(3, 4), full_span=(3, 4),
                                     labels=("Other",)))
    feats = coref_features(pair, doc)
    assert "coref:THEME:resolved" in feats


# ---------------------------------------------------------------------------
# index and vectors


def test_empty_pair_list_gives_empty_index():
    index = build_index([], {})
    assert len(index) == 0 and index.frozen


def test_shared_feature_gets_single_column():
    corpus, pairs = synthetic_labeled_corpus(n_docs=2, seed=5)
    index = build_index(pairs, corpus.documents)
    seen = {}
    for pair in pairs:
        for feat in pair_features(pair, corpus.documents[pair.doc_id]):
            col = index.column(feat)
            assert col is not None
            assert seen.setdefault(feat, col) == col


def test_frozen_index_rejects_additions():
    index = build_index([], {})
    with pytest.raises(FrozenIndexError):
        index.add("between:x")


def test_vectorize_requires_frozen_index():
    corpus, pairs = synthetic_labeled_corpus(n_docs=1, seed=5)
    with pytest.raises(FrozenIndexError):
        vectorize(pairs[0], corpus.documents, FeatureIndex())


def test_vectorize_drops_unseen_features_and_keeps_label():
    corpus, pairs = synthetic_labeled_corpus(n_docs=4, seed=5)
    train, test = pairs[: len(pairs) // 2], pairs[len(pairs) // 2:]
    index = build_index(train, corpus.documents)
    for pair in test:
        fv = vectorize(pair, corpus.documents, index)
        assert all(0 <= c < len(index) for c in fv.indices)
        assert list(fv.indices) == sorted(set(fv.indices))
        assert fv.label == pair.coarse_label


def test_fold_hygiene_no_test_only_features_in_index():
    corpus, pairs = synthetic_labeled_corpus(n_docs=4, seed=8)
    train, test = pairs[: len(pairs) // 2], pairs[len(pairs) // 2:]
    index = build_index(train, corpus.documents)
    train_feats = set()
    for pair in train:
        train_feats.update(pair_features(pair, corpus.documents[pair.doc_id]))
    test_only = set()
    for pair in test:
        test_only.update(
            f for f in pair_features(pair, corpus.documents[pair.doc_id])
            if f not in train_feats
        )
    assert test_only
    assert all(index.column(f) is None for f in test_only)


def test_feature_vector_rejects_unsorted_indices():
    with pytest.raises(ValueError):
        FeatureVector(indices=(3, 1))


def test_index_text_round_trip():
    corpus, pairs = synthetic_labeled_corpus(n_docs=2, seed=7)
    index = build_index(pairs, corpus.documents)
    reloaded = FeatureIndex.from_text(index.to_text())
    assert dict(reloaded.items()) == dict(index.items())
    assert reloaded.frozen
