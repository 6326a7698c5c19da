"""Readers and writers for the three input formats.

* parsed documents: 10-column CoNLL-U-style text, one ``# doc_id = <id>``
  comment per document, blank lines between sentences
* event mentions: a JSON array produced by an external event extractor
* pair annotations: a JSON array shared with the browser annotation tool
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from bioprecedence.corpus import (
    AnnotatedPair,
    Argument,
    CorpusError,
    DependencyGraph,
    Document,
    EventMention,
    KNOWN_ROLES,
    RelationLabel,
    Sentence,
    Token,
)

#: Label value used by candidate files that the annotation tool has not
#: labeled yet; such items are skipped when loading annotations.
UNLABELED = "unlabeled"


class ParseError(CorpusError):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


# ---------------------------------------------------------------------------
# CoNLL-U-style documents

_N_COLUMNS = 10


def parse_documents(text: str, implicit_id: str | None = None) -> list[Document]:
    """Parse column-formatted text into documents.

    Columns: ID, FORM, LEMMA, UPOS, XPOS, FEATS, HEAD, DEPREL, DEPS, MISC.
    Only FORM, LEMMA, XPOS, HEAD, and DEPREL are used; XPOS carries the
    Penn-Treebank tag. HEAD is 1-based with 0 marking a root. Token rows
    before any ``# doc_id`` comment need ``implicit_id`` to name their
    document, otherwise they are an error.
    """
    docs: list[Document] = []
    doc_id: str | None = None
    sentences: list[Sentence] = []
    rows: list[tuple[int, list[str]]] = []   # (line number, columns)

    def flush_sentence():
        nonlocal rows
        if rows:
            sentences.append(_build_sentence(len(sentences), rows))
            rows = []

    def flush_document():
        nonlocal sentences, doc_id
        flush_sentence()
        if doc_id is None and sentences:
            if implicit_id is None:
                raise ParseError("token rows before any '# doc_id = ...' comment")
            doc_id = implicit_id
        if doc_id is not None:
            docs.append(Document(id=doc_id, sentences=tuple(sentences)))
        sentences = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            flush_sentence()
            continue
        if line.startswith("#"):
            comment = line.lstrip("#").strip()
            if comment.startswith("doc_id"):
                _, _, value = comment.partition("=")
                new_id = value.strip()
                if not new_id:
                    raise ParseError("empty doc_id", lineno)
                flush_document()
                doc_id = new_id
            continue
        cols = line.split("\t")
        if len(cols) != _N_COLUMNS:
            raise ParseError(
                f"expected {_N_COLUMNS} tab-separated columns, got {len(cols)}", lineno
            )
        rows.append((lineno, cols))
    flush_document()
    return docs


def parse_document(text: str, default_id: str = "document") -> Document:
    """Parse text containing one document; a doc_id comment is optional."""
    docs = parse_documents(text, implicit_id=default_id)
    if not docs:
        return Document(id=default_id, sentences=())
    if len(docs) > 1:
        raise ParseError(f"expected exactly one document, found {len(docs)}")
    return docs[0]


def _build_sentence(index: int, rows: list[tuple[int, list[str]]]) -> Sentence:
    tokens = []
    edges = set()
    roots = set()
    n = len(rows)
    for position, (lineno, cols) in enumerate(rows):
        tok_id, form, lemma, _, xpos, _, head, deprel = cols[:8]
        try:
            tok_index = int(tok_id)
        except ValueError:
            raise ParseError(f"non-integer token id {tok_id!r}", lineno) from None
        if tok_index != position + 1:
            raise ParseError(
                f"token ids must count from 1; expected {position + 1}, got {tok_index}",
                lineno,
            )
        if not form:
            raise ParseError("empty FORM column", lineno)
        try:
            head_index = int(head)
        except ValueError:
            raise ParseError(f"non-integer HEAD {head!r}", lineno) from None
        if head_index == 0:
            roots.add(position)
        else:
            if not 1 <= head_index <= n:
                raise ParseError(
                    f"HEAD {head_index} dangles outside the sentence (1..{n})", lineno
                )
            edges.add((head_index - 1, position, deprel))
        tokens.append(Token(index=position, text=form, lemma=lemma or form, pos=xpos))
    return Sentence(
        index=index,
        tokens=tuple(tokens),
        graph=DependencyGraph(edges=frozenset(edges), roots=frozenset(roots)),
    )


# ---------------------------------------------------------------------------
# corpus container


@dataclass
class Corpus:
    """Validated documents plus the event mentions extracted from them."""

    documents: dict[str, Document] = field(default_factory=dict)
    mentions: dict[str, EventMention] = field(default_factory=dict)

    def document_of(self, mention: EventMention) -> Document:
        return self.documents[mention.doc_id]

    def mentions_in(self, doc_id: str) -> list[EventMention]:
        found = [m for m in self.mentions.values() if m.doc_id == doc_id]
        found.sort(key=lambda m: (m.text_position(), m.id))
        return found


# ---------------------------------------------------------------------------
# event mention JSON


def load_event_mentions(json_text: str, documents: dict[str, Document],
                        known_roles: frozenset[str] = KNOWN_ROLES) -> list[EventMention]:
    """Load extractor output and validate every mention against its document."""
    try:
        items = json.loads(json_text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid mention JSON: {exc}") from None
    if not isinstance(items, list):
        raise ParseError("mention JSON must be an array")
    mentions = []
    for item in items:
        mentions.append(_load_mention(item, documents, known_roles))
    return mentions


def _require(item: dict, key: str, context: str):
    if key not in item:
        raise ParseError(f"{context}: missing field {key!r}")
    return item[key]


def _span(value, context: str) -> tuple[int, int]:
    if (not isinstance(value, (list, tuple)) or len(value) != 2
            or not all(isinstance(v, int) for v in value)):
        raise ParseError(f"{context}: span must be a [start, end] pair of ints")
    return (value[0], value[1])


def _check_span(span: tuple[int, int], sentence: Sentence, context: str):
    s, e = span
    if not (0 <= s < e <= len(sentence.tokens)):
        raise ParseError(
            f"{context}: span {span} out of bounds for sentence "
            f"{sentence.index} ({len(sentence.tokens)} tokens)"
        )


def _load_mention(item: dict, documents: dict[str, Document],
                  known_roles: frozenset[str]) -> EventMention:
    mid = _require(item, "id", "mention")
    ctx = f"mention {mid!r}"
    doc_id = _require(item, "doc_id", ctx)
    if doc_id not in documents:
        raise ParseError(f"{ctx}: unknown doc_id {doc_id!r}")
    doc = documents[doc_id]
    sent_index = _require(item, "sentence", ctx)
    if not isinstance(sent_index, int) or not 0 <= sent_index < len(doc.sentences):
        raise ParseError(f"{ctx}: sentence index {sent_index} out of bounds")
    sentence = doc.sentences[sent_index]
    trigger = _span(_require(item, "trigger", ctx), ctx)
    full_span = _span(_require(item, "span", ctx), ctx)
    _check_span(trigger, sentence, ctx)
    _check_span(full_span, sentence, ctx)
    labels = _require(item, "labels", ctx)
    if not isinstance(labels, list) or not labels:
        raise ParseError(f"{ctx}: labels must be a nonempty array")

    args = []
    for arg in item.get("args", []):
        role = _require(arg, "role", ctx)
        if role not in known_roles:
            raise ParseError(f"{ctx}: unknown role {role!r}")
        arg_span = _span(_require(arg, "span", ctx), ctx)
        _check_span(arg_span, sentence, ctx)
        args.append(Argument(
            role=role,
            span=arg_span,
            label=arg.get("label", ""),
            resolved_via_coref=bool(arg.get("resolved", False)),
            text=sentence.text_of(arg_span),
            grounding=arg.get("grounding"),
        ))

    antecedent = None
    ant = item.get("antecedent")
    if ant is not None:
        ant_sent = _require(ant, "sentence", ctx)
        if not isinstance(ant_sent, int) or not 0 <= ant_sent < len(doc.sentences):
            raise ParseError(f"{ctx}: antecedent sentence {ant_sent} out of bounds")
        ant_span = _span(_require(ant, "span", ctx), ctx)
        _check_span(ant_span, doc.sentences[ant_sent], ctx)
        antecedent = (ant_sent, ant_span)

    return EventMention(
        id=mid,
        doc_id=doc_id,
        sentence=sent_index,
        trigger=trigger,
        full_span=full_span,
        labels=tuple(labels),
        arguments=tuple(args),
        is_anaphor=bool(item.get("is_anaphor", False)),
        antecedent=antecedent,
    )


# ---------------------------------------------------------------------------
# annotation JSON


def load_annotations(json_text: str, mentions: dict[str, EventMention],
                     include_unlabeled: bool = False) -> list[AnnotatedPair]:
    """Load pair annotations, resolving mention references.

    Pairs are normalized so e1 is the mention that appears first in the text;
    when the input lists them the other way round, the direction-bearing
    labels (precedes, specifies) are mirrored to keep the meaning intact.
    Items labeled "unlabeled" (candidate files the annotation tool has not
    finished) are skipped unless ``include_unlabeled`` maps them to NONE.
    """
    try:
        items = json.loads(json_text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid annotation JSON: {exc}") from None
    if not isinstance(items, list):
        raise ParseError("annotation JSON must be an array")
    pairs = []
    for item in items:
        pair_id = _require(item, "pair_id", "annotation")
        ctx = f"pair {pair_id!r}"
        label_text = _require(item, "label", ctx)
        if label_text == UNLABELED:
            if not include_unlabeled:
                continue
            label = RelationLabel.NONE
        else:
            label = RelationLabel.from_text(label_text)
        e1_id = _require(item, "e1_id", ctx)
        e2_id = _require(item, "e2_id", ctx)
        for ref in (e1_id, e2_id):
            if ref not in mentions:
                raise ParseError(f"{ctx}: unresolvable mention reference {ref!r}")
        e1, e2 = mentions[e1_id], mentions[e2_id]
        if (e1.text_position(), e1.id) > (e2.text_position(), e2.id):
            e1, e2 = e2, e1
            label = label.mirrored()
        pairs.append(AnnotatedPair(
            pair_id=pair_id,
            doc_id=_require(item, "doc_id", ctx),
            e1=e1,
            e2=e2,
            label=label,
            involves_coref=bool(item.get("coref", False)),
            discarded=bool(item.get("discarded", False)),
            note=item.get("note", ""),
        ))
    return pairs


def export_annotations(pairs: list[AnnotatedPair]) -> str:
    """Serialize pairs back to the annotation JSON schema."""
    items = [
        {
            "pair_id": p.pair_id,
            "doc_id": p.doc_id,
            "e1_id": p.e1.id,
            "e2_id": p.e2.id,
            "label": p.label.value,
            "coref": p.involves_coref,
            "discarded": p.discarded,
            "note": p.note,
        }
        for p in pairs
    ]
    return json.dumps(items, indent=2)


def usable_pairs(pairs: list[AnnotatedPair]) -> list[AnnotatedPair]:
    """Drop pairs marked as extraction errors; they never reach the models."""
    return [p for p in pairs if not p.discarded]


# ---------------------------------------------------------------------------
# corpus bundle (the `ingest` output format)

_BUNDLE_FORMAT = "bioprecedence-corpus/1"


def corpus_to_json(corpus: Corpus) -> str:
    docs = []
    for doc in sorted(corpus.documents.values(), key=lambda d: d.id):
        docs.append({
            "id": doc.id,
            "sentences": [
                {
                    "tokens": [
                        {"text": t.text, "lemma": t.lemma, "pos": t.pos}
                        for t in sent.tokens
                    ],
                    "edges": sorted([g, d, rel] for g, d, rel in sent.graph.edges),
                    "roots": sorted(sent.graph.roots),
                }
                for sent in doc.sentences
            ],
        })
    ments = []
    for m in sorted(corpus.mentions.values(), key=lambda m: m.id):
        ments.append({
            "id": m.id,
            "doc_id": m.doc_id,
            "sentence": m.sentence,
            "trigger": list(m.trigger),
            "span": list(m.full_span),
            "labels": list(m.labels),
            "args": [
                {
                    "role": a.role,
                    "span": list(a.span),
                    "label": a.label,
                    "resolved": a.resolved_via_coref,
                    **({"grounding": a.grounding} if a.grounding else {}),
                }
                for a in m.arguments
            ],
            "is_anaphor": m.is_anaphor,
            "antecedent": (
                {"sentence": m.antecedent[0], "span": list(m.antecedent[1])}
                if m.antecedent
                else None
            ),
        })
    return json.dumps(
        {"format": _BUNDLE_FORMAT, "documents": docs, "mentions": ments}, indent=2
    )


def corpus_from_json(json_text: str) -> Corpus:
    try:
        data = json.loads(json_text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid corpus bundle: {exc}") from None
    if data.get("format") != _BUNDLE_FORMAT:
        raise ParseError(f"unsupported corpus bundle format {data.get('format')!r}")
    documents = {}
    for d in data["documents"]:
        sentences = []
        for i, s in enumerate(d["sentences"]):
            tokens = tuple(
                Token(index=j, text=t["text"], lemma=t["lemma"], pos=t["pos"])
                for j, t in enumerate(s["tokens"])
            )
            graph = DependencyGraph(
                edges=frozenset((g, dep, rel) for g, dep, rel in s["edges"]),
                roots=frozenset(s["roots"]),
            )
            sentences.append(Sentence(index=i, tokens=tokens, graph=graph))
        documents[d["id"]] = Document(id=d["id"], sentences=tuple(sentences))
    mentions_json = json.dumps(data["mentions"])
    corpus = Corpus(documents=documents)
    for m in load_event_mentions(mentions_json, documents):
        corpus.mentions[m.id] = m
    return corpus
