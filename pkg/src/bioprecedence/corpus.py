"""Domain types for documents, event mentions, and pair annotations.

Everything here is immutable after construction, so instances can be shared
freely across threads and worker processes.
"""
from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass


class CorpusError(ValueError):
    """Input data violates a corpus contract (bad span, unknown id, ...)."""


# ---------------------------------------------------------------------------
# documents


@dataclass(frozen=True)
class Token:
    index: int          # 0-based position within the sentence
    text: str
    lemma: str
    pos: str            # Penn-Treebank tag

    def __post_init__(self):
        if self.index < 0:
            raise CorpusError(f"token index must be >= 0, got {self.index}")
        if not self.text:
            raise CorpusError("token text must be nonempty")


@dataclass(frozen=True)
class DependencyGraph:
    """Labeled directed dependency edges over one sentence.

    Edges run governor -> dependent; ``roots`` are the token indices with no
    governor (HEAD=0 in column format). Relation labels are opaque strings,
    so collapsed Stanford relations (prep_to, rcmod) and UD labels both work.
    """

    edges: frozenset[tuple[int, int, str]]
    roots: frozenset[int]

    def dependents_of(self, index: int) -> list[tuple[int, str]]:
        return sorted((d, rel) for g, d, rel in self.edges if g == index)

    def governors_of(self, index: int) -> list[tuple[int, str]]:
        return sorted((g, rel) for g, d, rel in self.edges if d == index)

    def head_of(self, index: int) -> tuple[int, str] | None:
        """First governor by (index, relation); None for roots."""
        govs = self.governors_of(index)
        return govs[0] if govs else None


@dataclass(frozen=True)
class Sentence:
    index: int
    tokens: tuple[Token, ...]
    graph: DependencyGraph

    def __post_init__(self):
        n = len(self.tokens)
        for i, tok in enumerate(self.tokens):
            if tok.index != i:
                raise CorpusError(
                    f"sentence {self.index}: token indices must be contiguous "
                    f"from 0 (position {i} holds index {tok.index})"
                )
        for g, d, rel in self.graph.edges:
            if not (0 <= g < n and 0 <= d < n):
                raise CorpusError(
                    f"sentence {self.index}: edge ({g}, {d}, {rel}) out of bounds"
                )
        for r in self.graph.roots:
            if not 0 <= r < n:
                raise CorpusError(f"sentence {self.index}: root {r} out of bounds")
        if n and not self.graph.roots:
            raise CorpusError(f"sentence {self.index}: non-empty sentence needs a root")

    def text_of(self, span: tuple[int, int]) -> str:
        return " ".join(t.text for t in self.tokens[span[0]:span[1]])


@dataclass(frozen=True)
class Document:
    id: str
    sentences: tuple[Sentence, ...]

    def __post_init__(self):
        if not self.id:
            raise CorpusError("document id must be nonempty")
        for i, sent in enumerate(self.sentences):
            if sent.index != i:
                raise CorpusError(
                    f"document {self.id}: sentence indices must be contiguous"
                )


# ---------------------------------------------------------------------------
# event mentions

#: Argument roles accepted by the mention loader.
KNOWN_ROLES = frozenset(
    {"theme", "cause", "controller", "controlled", "site", "destination", "source"}
)


@dataclass(frozen=True)
class Argument:
    role: str
    span: tuple[int, int]          # token span in the mention's sentence
    label: str                     # entity label, e.g. Protein
    resolved_via_coref: bool = False
    text: str = ""                 # surface form, filled in by the loader
    grounding: str | None = None   # grounded entity id, when the extractor has one


@dataclass(frozen=True)
class EventMention:
    id: str
    doc_id: str
    sentence: int
    trigger: tuple[int, int]       # token span, end exclusive
    full_span: tuple[int, int]
    labels: tuple[str, ...]        # taxonomic labels, most specific first
    arguments: tuple[Argument, ...] = ()
    is_anaphor: bool = False
    antecedent: tuple[int, tuple[int, int]] | None = None  # (sentence, span)

    def __post_init__(self):
        if not self.labels:
            raise CorpusError(f"mention {self.id}: labels must be nonempty")
        ts, te = self.trigger
        fs, fe = self.full_span
        if not (ts < te and fs < fe):
            raise CorpusError(f"mention {self.id}: spans must be nonempty")
        if not (fs <= ts and te <= fe):
            raise CorpusError(
                f"mention {self.id}: trigger {self.trigger} outside span {self.full_span}"
            )

    @property
    def most_specific_label(self) -> str:
        return self.labels[0]

    def text_position(self) -> tuple[int, int]:
        """Sort key for document order: sentence, then trigger start."""
        return (self.sentence, self.trigger[0])


# ---------------------------------------------------------------------------
# relation labels


class RelationLabel(enum.Enum):
    """The seven inter-event relation labels annotators may assign."""

    E1_PRECEDES_E2 = "E1 precedes E2"
    E2_PRECEDES_E1 = "E2 precedes E1"
    EQUIVALENT = "Equivalent"
    E1_SPECIFIES_E2 = "E1 specifies E2"
    E2_SPECIFIES_E1 = "E2 specifies E1"
    OTHER = "Other"
    NONE = "None"

    @classmethod
    def from_text(cls, text: str) -> "RelationLabel":
        try:
            return _RELATION_BY_TEXT[text]
        except KeyError:
            raise CorpusError(f"unknown relation label {text!r}") from None

    def mirrored(self) -> "RelationLabel":
        """The label after swapping E1 and E2."""
        return _MIRROR[self]


_RELATION_BY_TEXT = {lab.value: lab for lab in RelationLabel}

_MIRROR = {
    RelationLabel.E1_PRECEDES_E2: RelationLabel.E2_PRECEDES_E1,
    RelationLabel.E2_PRECEDES_E1: RelationLabel.E1_PRECEDES_E2,
    RelationLabel.E1_SPECIFIES_E2: RelationLabel.E2_SPECIFIES_E1,
    RelationLabel.E2_SPECIFIES_E1: RelationLabel.E1_SPECIFIES_E2,
    RelationLabel.EQUIVALENT: RelationLabel.EQUIVALENT,
    RelationLabel.OTHER: RelationLabel.OTHER,
    RelationLabel.NONE: RelationLabel.NONE,
}


class CoarseLabel(enum.Enum):
    """Three-way reduction used by the precedence models."""

    NIL = "Nil"
    E1_PRECEDES_E2 = "E1 precedes E2"
    E2_PRECEDES_E1 = "E2 precedes E1"

    def mirrored(self) -> "CoarseLabel":
        if self is CoarseLabel.E1_PRECEDES_E2:
            return CoarseLabel.E2_PRECEDES_E1
        if self is CoarseLabel.E2_PRECEDES_E1:
            return CoarseLabel.E1_PRECEDES_E2
        return CoarseLabel.NIL


#: Fixed class order used to break prediction ties (all-zero scores -> NIL).
CLASS_ORDER = (
    CoarseLabel.NIL,
    CoarseLabel.E1_PRECEDES_E2,
    CoarseLabel.E2_PRECEDES_E1,
)

#: The two positive classes for micro metrics.
POSITIVE_CLASSES = frozenset(
    {CoarseLabel.E1_PRECEDES_E2, CoarseLabel.E2_PRECEDES_E1}
)


def reduce_label(label: RelationLabel) -> CoarseLabel:
    """Collapse the seven-way annotation to the three model classes."""
    if label is RelationLabel.E1_PRECEDES_E2:
        return CoarseLabel.E1_PRECEDES_E2
    if label is RelationLabel.E2_PRECEDES_E1:
        return CoarseLabel.E2_PRECEDES_E1
    return CoarseLabel.NIL


# ---------------------------------------------------------------------------
# annotated pairs


@dataclass(frozen=True)
class AnnotatedPair:
    pair_id: str
    doc_id: str
    e1: EventMention
    e2: EventMention
    label: RelationLabel
    involves_coref: bool = False
    discarded: bool = False
    note: str = ""

    def __post_init__(self):
        if self.e1.text_position() > self.e2.text_position():
            raise CorpusError(
                f"pair {self.pair_id}: e1 must precede e2 in the text"
            )
        if self.e1.doc_id != self.doc_id or self.e2.doc_id != self.doc_id:
            raise CorpusError(f"pair {self.pair_id}: mentions from another document")

    @property
    def coarse_label(self) -> CoarseLabel:
        return reduce_label(self.label)

    @property
    def same_sentence(self) -> bool:
        return self.e1.sentence == self.e2.sentence


# ---------------------------------------------------------------------------
# inter-annotator agreement


def cohens_kappa(labels_a, labels_b) -> float:
    """Cohen's kappa between two aligned label sequences.

    Chance agreement comes from the two annotators' marginal label
    frequencies. Labels may be any hashable values, so the same function
    serves the seven-way and the collapsed three-way protocols.
    """
    a = list(labels_a)
    b = list(labels_b)
    if len(a) != len(b):
        raise CorpusError(f"label sequences differ in length: {len(a)} vs {len(b)}")
    if not a:
        raise CorpusError("cannot compute kappa on empty sequences")
    n = len(a)
    observed = sum(1 for x, y in zip(a, b) if x == y) / n
    freq_a = Counter(a)
    freq_b = Counter(b)
    expected = sum(
        (freq_a[lab] / n) * (freq_b[lab] / n) for lab in freq_a.keys() | freq_b.keys()
    )
    if expected == 1.0:
        # Both annotators constant on the same label; observed is 1 too.
        return 1.0
    return (observed - expected) / (1.0 - expected)
