"""Seeded synthetic corpora for tests, demos, and end-to-end runs.

Documents are built from a handful of hand-parsed sentence templates, so
dependency trees are valid and the deterministic sieves, feature
extraction, and tense detection all have something real to work on. The
candidate-generation corpus additionally records which planted pairs are
valid and which violate exactly one inclusion constraint.
"""
from __future__ import annotations

import numpy as np

from bioprecedence.corpus import (
    AnnotatedPair,
    Argument,
    DependencyGraph,
    Document,
    EventMention,
    RelationLabel,
    Sentence,
    Token,
)
from bioprecedence.ingest import Corpus

ROOT = 0

_EVENT_NOUNS = [
    ("phosphorylation", "Phosphorylation"),
    ("ubiquitination", "Ubiquitination"),
    ("binding", "Binding"),
    ("translocation", "Translocation"),
    ("acetylation", "Acetylation"),
    ("methylation", "Methylation"),
    ("hydrolysis", "Hydrolysis"),
]

_EVENT_VERBS = [
    ("phosphorylated", "Phosphorylation"),
    ("ubiquitinated", "Ubiquitination"),
    ("acetylated", "Acetylation"),
    ("methylated", "Methylation"),
]


def _sent(index: int, rows: list[tuple[str, str, int, str]]) -> Sentence:
    """rows: (text, pos, head 1-based or 0 for root, relation)."""
    tokens = tuple(
        Token(index=i, text=text, lemma=text.lower(), pos=pos)
        for i, (text, pos, _, _) in enumerate(rows)
    )
    edges = set()
    roots = set()
    for i, (_, _, head, rel) in enumerate(rows):
        if head == ROOT:
            roots.add(i)
        else:
            edges.add((head - 1, i, rel))
    return Sentence(index=index, tokens=tokens,
                    graph=DependencyGraph(frozenset(edges), frozenset(roots)))


def _mention(doc: Document, mid: str, sent: int, trigger, span, label: str,
             args, is_anaphor: bool = False, antecedent=None) -> EventMention:
    sentence = doc.sentences[sent]
    built = tuple(
        Argument(role=role, span=aspan, label=alabel,
                 text=sentence.text_of(aspan))
        for role, aspan, alabel in args
    )
    return EventMention(
        id=mid, doc_id=doc.id, sentence=sent, trigger=trigger, full_span=span,
        labels=(label,), arguments=built, is_anaphor=is_anaphor,
        antecedent=antecedent,
    )


# ---------------------------------------------------------------------------
# sentence templates
#
# Each builder returns (rows, e1_spec, e2_spec); a spec is
# (trigger, span, event_label, args) with token indices local to the
# sentence. Builders below cover one two-event sentence each.


def _nominal_pair_rows(noun1: str, p1: str, noun2: str, p2: str,
                       mid: tuple[str, ...]):
    """[The noun1 of p1] <mid> [the noun2 of p2] ."""
    rows = [
        ("The", "DT", 2, "det"),
        (noun1, "NN", 0, "placeholder"),   # head patched per mid variant
        ("of", "IN", 4, "case"),
        (p1, "NN", 2, "prep_of"),
    ]
    n = len(rows)                          # 4 tokens so far
    if mid == ("is", "followed", "by"):
        verb = n + 2                       # 1-based index of "followed"
        rows[1] = (noun1, "NN", verb, "nsubjpass")
        rows += [
            ("is", "VBZ", verb, "auxpass"),
            ("followed", "VBN", ROOT, "root"),
            ("by", "IN", verb + 3, "case"),
        ]
        obj_head = verb                    # agent attaches to the verb
        obj_rel = "agent"
    elif mid == ("follows",):
        verb = n + 1
        rows[1] = (noun1, "NN", verb, "nsubj")
        rows += [("follows", "VBZ", ROOT, "root")]
        obj_head = verb
        obj_rel = "dobj"
    else:                                  # (... adverbs ..., finite verb)
        verb = n + len(mid)
        rows[1] = (noun1, "NN", verb, "nsubj")
        for word in mid[:-1]:
            rows.append((word, "RB", verb, "advmod"))
        rows.append((mid[-1], "VBZ", ROOT, "root"))
        obj_head = verb
        obj_rel = "dobj"
    start2 = len(rows)
    rows += [
        ("the", "DT", start2 + 2, "det"),
        (noun2, "NN", obj_head, obj_rel),
        ("of", "IN", start2 + 4, "case"),
        (p2, "NN", start2 + 2, "prep_of"),
        (".", ".", verb, "punct"),
    ]
    e1 = ((1, 2), (0, 4), [("theme", (3, 4), "Protein")])
    e2 = ((start2 + 1, start2 + 2), (start2, start2 + 4),
          [("theme", (start2 + 3, start2 + 4), "Protein")])
    return rows, e1, e2


def _passive_rows(p1: str, verb: str, p2: str, aux: tuple[str, ...] = ("is",)):
    """[p1 <aux> verb-ed by p2] ."""
    verb_pos = 1 + len(aux) + 1            # 1-based
    rows = [(p1, "NN", verb_pos, "nsubjpass")]
    rels = {"is": "auxpass", "was": "auxpass", "had": "aux", "has": "aux",
            "been": "auxpass", "will": "aux", "be": "auxpass"}
    for word in aux:
        rows.append((word, "VBZ" if word in ("is", "has") else
                     ("VBD" if word in ("was", "had") else
                      ("MD" if word == "will" else "VBN")), verb_pos,
                     rels[word]))
    rows.append((verb, "VBN", ROOT, "root"))
    rows += [
        ("by", "IN", verb_pos + 2, "case"),
        (p2, "NN", verb_pos, "agent"),
        (".", ".", verb_pos, "punct"),
    ]
    event = ((verb_pos - 1, verb_pos), (0, verb_pos + 2),
             [("theme", (0, 1), "Protein"), ("cause", (verb_pos + 1, verb_pos + 2), "Protein")])
    return rows, event


def _binds_rows(p1: str, p2: str, lead: tuple[str, ...] = ()):
    """[<lead> ,] [p1 binds p2] . Lead words attach to the verb."""
    offset = len(lead) + (1 if lead else 0)
    verb = offset + 2                      # 1-based
    rows = []
    if lead:
        head_noun = len(lead)              # last lead token carries the phrase
        for i, word in enumerate(lead):
            if i == len(lead) - 1:
                rows.append((word, "NN", verb, "prep_as"))
            else:
                rows.append((word, "IN" if i == 0 else "DT", head_noun, "dep"))
        rows.append((",", ",", verb, "punct"))
    rows += [
        (p1, "NN", verb, "nsubj"),
        ("binds", "VBZ", ROOT, "root"),
        (p2, "NN", verb, "dobj"),
        (".", ".", verb, "punct"),
    ]
    event = ((offset + 1, offset + 2), (offset, offset + 3),
             [("theme", (offset, offset + 1), "Protein"),
              ("theme", (offset + 2, offset + 3), "Protein")])
    return rows, event


def _anaphor_rows(noun2: str, p2: str):
    """[This interaction] eventually alters [the noun2 of p2] ."""
    rows = [
        ("This", "DT", 2, "det"),
        ("interaction", "NN", 4, "nsubj"),
        ("eventually", "RB", 4, "advmod"),
        ("alters", "VBZ", ROOT, "root"),
        ("the", "DT", 6, "det"),
        (noun2, "NN", 4, "dobj"),
        ("of", "IN", 8, "case"),
        (p2, "NN", 6, "prep_of"),
        (".", ".", 4, "punct"),
    ]
    e1 = ((1, 2), (0, 2), [])
    e2 = ((5, 6), (4, 8), [("theme", (7, 8), "Protein")])
    return rows, e1, e2


def _regulation_rows(p1: str):
    """[The binding of p1] promotes [the phosphorylation of p1] ."""
    rows, e1, e2 = _nominal_pair_rows("binding", p1, "phosphorylation", p1,
                                      ("promotes",))
    rows[4] = ("promotes", "VBZ", ROOT, "root")
    reg = ((4, 5), (0, 9), [("controller", (0, 4), ""), ("controlled", (5, 9), "")])
    return rows, e1, e2, reg


def _filler_rows():
    rows = [
        ("The", "DT", 2, "det"),
        ("results", "NNS", 3, "nsubjpass"),
        ("were", "VBD", 3, "auxpass"),
        ("reproducible", "JJ", ROOT, "root"),
        (".", ".", 4, "punct"),
    ]
    return rows


# ---------------------------------------------------------------------------
# labeled corpus


def synthetic_labeled_corpus(n_docs: int = 20, seed: int = 0,
                             pairs_per_doc: int = 6):
    """A corpus of annotated pairs with cue-bearing and neutral contexts.

    Labels are balanced roughly 1:1:2 over the two precedes directions and
    NIL; some contexts carry sieve cues, others carry lexical markers only
    statistical models can pick up, and a few involve anaphors.
    """
    rng = np.random.default_rng([seed, 0xC0135])
    corpus = Corpus()
    pairs = []
    protein_counter = 0

    def next_protein():
        nonlocal protein_counter
        protein_counter += 1
        return f"PRO{protein_counter:03d}"

    for d in range(n_docs):
        doc_id = f"synth{d:03d}"
        sentences = []
        mention_specs = []      # (mid, sent, trigger, span, label, args, anaphor, antecedent)
        pair_specs = []         # (e1_mid, e2_mid, RelationLabel, coref)
        mid_counter = 0

        def next_mid():
            nonlocal mid_counter
            mid_counter += 1
            return f"{doc_id}-m{mid_counter}"

        for _ in range(pairs_per_doc):
            kind = rng.choice(
                ["cue_followed", "cue_follows", "marker_fwd", "marker_rev",
                 "plain_nil", "inter_cue", "inter_nil", "perfective", "anaphor"],
                p=[0.14, 0.12, 0.12, 0.12, 0.2, 0.1, 0.08, 0.06, 0.06],
            )
            p_shared = next_protein()
            n1, lab1 = _EVENT_NOUNS[rng.integers(0, len(_EVENT_NOUNS))]
            n2, lab2 = _EVENT_NOUNS[rng.integers(0, len(_EVENT_NOUNS))]
            while n2 == n1:
                n2, lab2 = _EVENT_NOUNS[rng.integers(0, len(_EVENT_NOUNS))]
            if kind in ("cue_followed", "cue_follows", "marker_fwd",
                        "marker_rev", "plain_nil"):
                mid = {
                    "cue_followed": ("is", "followed", "by"),
                    "cue_follows": ("follows",),
                    "marker_fwd": ("promptly", "alters"),
                    "marker_rev": ("originally", "alters"),
                    "plain_nil": ("alters",),
                }[kind]
                label = {
                    "cue_followed": RelationLabel.E1_PRECEDES_E2,
                    "cue_follows": RelationLabel.E2_PRECEDES_E1,
                    "marker_fwd": RelationLabel.E1_PRECEDES_E2,
                    "marker_rev": RelationLabel.E2_PRECEDES_E1,
                    "plain_nil": RelationLabel.NONE,
                }[kind]
                rows, e1, e2 = _nominal_pair_rows(n1, p_shared, n2, p_shared, mid)
                sent = len(sentences)
                sentences.append(rows)
                m1, m2 = next_mid(), next_mid()
                mention_specs.append((m1, sent, *e1, lab1))
                mention_specs.append((m2, sent, *e2, lab2))
                pair_specs.append((m1, m2, label, False))
            elif kind in ("inter_cue", "inter_nil", "perfective"):
                verb, vlab = _EVENT_VERBS[rng.integers(0, len(_EVENT_VERBS))]
                p_other = next_protein()
                aux = ("had", "been") if kind == "perfective" else ("is",)
                rows1, ev1 = _passive_rows(p_shared, verb, p_other, aux)
                lead = ("As", "a", "downstream", "effect") if kind == "inter_cue" else ()
                if kind == "inter_nil":
                    lead = ("Notably",)
                rows2, ev2 = _binds_rows(p_shared, next_protein(), lead)
                sent1 = len(sentences)
                sentences.append(rows1)
                sentences.append(rows2)
                m1, m2 = next_mid(), next_mid()
                mention_specs.append((m1, sent1, *ev1, vlab))
                mention_specs.append((m2, sent1 + 1, *ev2, "Binding"))
                label = (RelationLabel.NONE if kind == "inter_nil"
                         else RelationLabel.E1_PRECEDES_E2)
                pair_specs.append((m1, m2, label, False))
            else:                           # anaphor referring to the prior event
                verb, vlab = _EVENT_VERBS[rng.integers(0, len(_EVENT_VERBS))]
                rows1, ev1 = _passive_rows(p_shared, verb, next_protein())
                rows2, ana1, ana2 = _anaphor_rows(n2, p_shared)
                sent1 = len(sentences)
                sentences.append(rows1)
                sentences.append(rows2)
                m0, m1, m2 = next_mid(), next_mid(), next_mid()
                mention_specs.append((m0, sent1, *ev1, vlab))
                mention_specs.append((m1, sent1 + 1, ana1[0], ana1[1], ana1[2],
                                      vlab, True, (sent1, (0, ev1[1][1]))))
                mention_specs.append((m2, sent1 + 1, *ana2, lab2))
                pair_specs.append((m1, m2, RelationLabel.E1_PRECEDES_E2, True))
        doc = Document(
            id=doc_id,
            sentences=tuple(_sent(i, rows) for i, rows in enumerate(sentences)),
        )
        corpus.documents[doc_id] = doc
        for spec in mention_specs:
            if len(spec) == 8:
                mid, sent, trigger, span, args, label, anaphor, antecedent = spec
                mention = _mention(doc, mid, sent, trigger, span, label, args,
                                   is_anaphor=anaphor, antecedent=antecedent)
            else:
                mid, sent, trigger, span, args, label = spec
                mention = _mention(doc, mid, sent, trigger, span, label, args)
            corpus.mentions[mention.id] = mention
        for i, (m1, m2, label, coref) in enumerate(pair_specs):
            pairs.append(AnnotatedPair(
                pair_id=f"{doc_id}-p{i}",
                doc_id=doc_id,
                e1=corpus.mentions[m1],
                e2=corpus.mentions[m2],
                label=label,
                involves_coref=coref,
            ))
    return corpus, pairs


# ---------------------------------------------------------------------------
# candidate-generation corpus with planted outcomes


def synthetic_candidate_corpus(n_docs: int = 20, seed: int = 0):
    """Documents whose mention pairs have known candidate-filter outcomes.

    Returns (corpus, planted) where planted maps outcome -> set of
    (e1_id, e2_id) pairs: "valid" pairs satisfy every constraint, the rest
    violate exactly the named one. Plants use disjoint proteins so they do
    not interact.
    """
    rng = np.random.default_rng([seed, 0xCA9D])
    corpus = Corpus()
    planted = {"valid": set(), "same_type": set(), "distance": set(),
               "no_shared": set(), "regulation": set()}
    protein_counter = 0

    def next_protein():
        nonlocal protein_counter
        protein_counter += 1
        return f"GEN{protein_counter:03d}"

    for d in range(n_docs):
        doc_id = f"cand{d:03d}"
        sentences = []
        mention_specs = []
        mid_counter = 0

        def next_mid():
            nonlocal mid_counter
            mid_counter += 1
            return f"{doc_id}-m{mid_counter}"

        plants = ["valid_intra", "valid_inter", "same_type", "distance",
                  "no_shared", "regulation"]
        rng.shuffle(plants)
        for plant in plants:
            if plant == "valid_intra":
                p = next_protein()
                n1, l1 = _EVENT_NOUNS[int(rng.integers(0, 3))]
                n2, l2 = _EVENT_NOUNS[int(rng.integers(3, 6))]
                rows, e1, e2 = _nominal_pair_rows(n1, p, n2, p, ("alters",))
                sent = len(sentences)
                sentences.append(rows)
                m1, m2 = next_mid(), next_mid()
                mention_specs.append((m1, sent, *e1, l1))
                mention_specs.append((m2, sent, *e2, l2))
                planted["valid"].add((m1, m2))
            elif plant == "valid_inter":
                p = next_protein()
                verb, vlab = _EVENT_VERBS[int(rng.integers(0, len(_EVENT_VERBS)))]
                rows1, ev1 = _passive_rows(p, verb, next_protein())
                rows2, ev2 = _binds_rows(p, next_protein())
                sent = len(sentences)
                sentences.append(rows1)
                sentences.append(rows2)
                m1, m2 = next_mid(), next_mid()
                mention_specs.append((m1, sent, *ev1, vlab))
                mention_specs.append((m2, sent + 1, *ev2, "Binding"))
                planted["valid"].add((m1, m2))
            elif plant == "same_type":
                p = next_protein()
                rows, e1, e2 = _nominal_pair_rows("phosphorylation", p,
                                                  "phosphorylation", p,
                                                  ("alters",))
                sent = len(sentences)
                sentences.append(rows)
                m1, m2 = next_mid(), next_mid()
                mention_specs.append((m1, sent, *e1, "Phosphorylation"))
                mention_specs.append((m2, sent, *e2, "Phosphorylation"))
                planted["same_type"].add((m1, m2))
            elif plant == "distance":
                p = next_protein()
                verb, vlab = _EVENT_VERBS[int(rng.integers(0, len(_EVENT_VERBS)))]
                rows1, ev1 = _passive_rows(p, verb, next_protein())
                rows2, ev2 = _binds_rows(p, next_protein())
                sent = len(sentences)
                sentences.append(rows1)
                sentences.append(_filler_rows())
                sentences.append(rows2)
                m1, m2 = next_mid(), next_mid()
                mention_specs.append((m1, sent, *ev1, vlab))
                mention_specs.append((m2, sent + 2, *ev2, "Binding"))
                planted["distance"].add((m1, m2))
            elif plant == "no_shared":
                n1, l1 = _EVENT_NOUNS[int(rng.integers(0, 3))]
                n2, l2 = _EVENT_NOUNS[int(rng.integers(3, 6))]
                rows, e1, e2 = _nominal_pair_rows(n1, next_protein(), n2,
                                                  next_protein(), ("alters",))
                sent = len(sentences)
                sentences.append(rows)
                m1, m2 = next_mid(), next_mid()
                mention_specs.append((m1, sent, *e1, l1))
                mention_specs.append((m2, sent, *e2, l2))
                planted["no_shared"].add((m1, m2))
            else:                           # regulation
                p = next_protein()
                rows, e1, e2, reg = _regulation_rows(p)
                sent = len(sentences)
                sentences.append(rows)
                m1, m2, m3 = next_mid(), next_mid(), next_mid()
                mention_specs.append((m1, sent, *e1, "Binding"))
                mention_specs.append((m2, sent, *e2, "Phosphorylation"))
                mention_specs.append((m3, sent, *reg, "Positive_regulation"))
                planted["regulation"].add((m1, m2))
        doc = Document(
            id=doc_id,
            sentences=tuple(_sent(i, rows) for i, rows in enumerate(sentences)),
        )
        corpus.documents[doc_id] = doc
        for mid, sent, trigger, span, args, label in mention_specs:
            mention = _mention(doc, mid, sent, trigger, span, label, args)
            corpus.mentions[mention.id] = mention
    return corpus, planted
