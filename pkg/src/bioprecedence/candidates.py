"""Candidate event-pair generation under the corpus inclusion constraints.

A pair of extracted events enters the corpus only if all enabled checks
pass: the events share a participant, sit within a configurable sentence
distance, differ in their most specific type, and are not already related
as co-arguments of one extracted Regulation event.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from bioprecedence.corpus import CorpusError, Document, EventMention
from bioprecedence.ingest import UNLABELED


@dataclass(frozen=True)
class CandidateConfig:
    max_sentence_distance: int = 1
    require_shared_participant: bool = True
    forbid_same_type: bool = True
    forbid_nested_regulation: bool = True

    def __post_init__(self):
        if self.max_sentence_distance < 0:
            raise ValueError("max_sentence_distance must be >= 0")


@dataclass(frozen=True)
class EventPair:
    """An ordered candidate pair; e1 appears first in the text."""

    pair_id: str
    doc_id: str
    e1: EventMention
    e2: EventMention

    @property
    def involves_coref(self) -> bool:
        return any(
            m.is_anaphor or any(a.resolved_via_coref for a in m.arguments)
            for m in (self.e1, self.e2)
        )

    @property
    def same_sentence(self) -> bool:
        return self.e1.sentence == self.e2.sentence


def _participants_match(a, b) -> bool:
    # Grounded ids decide when both sides carry one; otherwise fall back to
    # the case-insensitive surface string of the entity span.
    if a.grounding and b.grounding:
        return a.grounding == b.grounding
    return bool(a.text) and a.text.lower() == b.text.lower()


def shares_participant(e1: EventMention, e2: EventMention) -> bool:
    return any(
        _participants_match(a, b) for a in e1.arguments for b in e2.arguments
    )


def sentence_distance(e1: EventMention, e2: EventMention) -> int:
    if e1.doc_id != e2.doc_id:
        raise CorpusError(
            f"cross-document pair: {e1.doc_id!r} vs {e2.doc_id!r}"
        )
    return abs(e1.sentence - e2.sentence)


def _is_regulation(mention: EventMention) -> bool:
    return any("regulation" in lab.lower() for lab in mention.labels)


def _argument_of(regulation: EventMention, event: EventMention) -> bool:
    """True when one of the regulation's argument spans covers the event's trigger."""
    if regulation.sentence != event.sentence:
        return False
    ts, te = event.trigger
    return any(a.span[0] <= ts and te <= a.span[1] for a in regulation.arguments)


def nested_in_regulation(e1: EventMention, e2: EventMention,
                         mentions: list[EventMention]) -> bool:
    """Both events appear as arguments of one extracted Regulation mention."""
    for m in mentions:
        if m.id in (e1.id, e2.id) or not _is_regulation(m):
            continue
        if _argument_of(m, e1) and _argument_of(m, e2):
            return True
    return False


def generate_candidates(doc: Document, mentions: list[EventMention],
                        config: CandidateConfig = CandidateConfig()) -> list[EventPair]:
    """All mention pairs in ``doc`` passing the enabled constraints.

    Output is deterministic: pairs are ordered by document position of e1,
    then of e2, with e1 always the textually first mention.
    """
    in_doc = [m for m in mentions if m.doc_id == doc.id]
    in_doc.sort(key=lambda m: (m.text_position(), m.id))
    pairs = []
    for i, first in enumerate(in_doc):
        for second in in_doc[i + 1:]:
            if sentence_distance(first, second) > config.max_sentence_distance:
                continue
            if config.require_shared_participant and not shares_participant(first, second):
                continue
            if (config.forbid_same_type
                    and first.most_specific_label == second.most_specific_label):
                continue
            if (config.forbid_nested_regulation
                    and nested_in_regulation(first, second, in_doc)):
                continue
            pairs.append(EventPair(
                pair_id=f"{doc.id}:{first.id}:{second.id}",
                doc_id=doc.id,
                e1=first,
                e2=second,
            ))
    return pairs


# ---------------------------------------------------------------------------
# encompassing spans


@dataclass(frozen=True)
class EncompassingSpan:
    """Whole sentences covering a pair, extended to coreference antecedents."""

    first_sentence: int
    last_sentence: int
    sentence_spans: tuple[tuple[int, int, int], ...]  # (sentence, start, end)

    def token_texts(self, doc: Document) -> list[str]:
        out = []
        for sent_index, start, end in self.sentence_spans:
            out.extend(t.text for t in doc.sentences[sent_index].tokens[start:end])
        return out


def encompassing_span(e1: EventMention, e2: EventMention, doc: Document) -> EncompassingSpan:
    """Minimal whole-sentence span covering both mentions.

    If either mention resolves an anaphor whose antecedent lies outside the
    range, the range widens to include the antecedent's sentence.
    """
    first = min(e1.sentence, e2.sentence)
    last = max(e1.sentence, e2.sentence)
    for m in (e1, e2):
        if m.antecedent is not None:
            first = min(first, m.antecedent[0])
            last = max(last, m.antecedent[0])
    spans = tuple(
        (s, 0, len(doc.sentences[s].tokens)) for s in range(first, last + 1)
    )
    return EncompassingSpan(first_sentence=first, last_sentence=last,
                            sentence_spans=spans)


def pairs_to_candidate_json(pairs: list[EventPair]) -> str:
    """Candidate pairs in the annotation JSON schema, awaiting labels."""
    items = [
        {
            "pair_id": p.pair_id,
            "doc_id": p.doc_id,
            "e1_id": p.e1.id,
            "e2_id": p.e2.id,
            "label": UNLABELED,
            "coref": p.involves_coref,
            "discarded": False,
            "note": "",
        }
        for p in pairs
    ]
    return json.dumps(items, indent=2)
