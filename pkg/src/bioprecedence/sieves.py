"""The three rule-based precedence models.

* intra-sentence: cue patterns over surface tokens, optionally anchored to
  the trigger-to-trigger dependency path
* inter-sentence: sentence-initial cue phrases on the second sentence
* tense/aspect ordering: verbal morphology mapped through a configurable
  table of informative tense-aspect combinations

All three abstain (return None) rather than guess.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from bioprecedence.corpus import CoarseLabel, CorpusError, Document, Sentence
from bioprecedence.syntax import shortest_path

# ---------------------------------------------------------------------------
# rule files

INTRA = "intra"
INTER = "inter"
E1_FIRST = "e1_first"
E2_FIRST = "e2_first"

_NEGATORS = {"not", "n't", "never"}
_CLAUSE_BREAKS = {",", ";", ":", "--", "-"}


@dataclass(frozen=True)
class _Element:
    kind: str                      # "e1" | "e2" | "wild" | "token"
    regex: re.Pattern | None = None
    on_path: bool = False          # token must sit on/next to the trigger path

    def matches_word(self, word: str) -> bool:
        return self.kind == "token" and self.regex.fullmatch(word) is not None


@dataclass(frozen=True)
class PrecedenceRule:
    id: str
    scope: str                     # INTRA or INTER
    direction: str                 # E1_FIRST or E2_FIRST
    pattern: str
    elements: tuple[_Element, ...]

    @property
    def label(self) -> CoarseLabel:
        return (CoarseLabel.E1_PRECEDES_E2 if self.direction == E1_FIRST
                else CoarseLabel.E2_PRECEDES_E1)

    def can_match_negator(self) -> bool:
        return any(
            el.kind == "token" and any(el.matches_word(w) for w in _NEGATORS)
            for el in self.elements
        )


def _compile_pattern(pattern: str) -> tuple[_Element, ...]:
    elements = []
    for raw in pattern.split():
        if raw == "E1":
            elements.append(_Element(kind="e1"))
        elif raw == "E2":
            elements.append(_Element(kind="e2"))
        elif raw == ".*":
            elements.append(_Element(kind="wild"))
        else:
            on_path = raw.startswith("~")
            body = raw[1:] if on_path else raw
            try:
                regex = re.compile(body, re.IGNORECASE)
            except re.error as exc:
                raise CorpusError(f"bad token regex {body!r}: {exc}") from None
            elements.append(_Element(kind="token", regex=regex, on_path=on_path))
    if not elements:
        raise CorpusError("empty rule pattern")
    return tuple(elements)


def load_rules(text: str) -> list[PrecedenceRule]:
    """Parse a rule file: one ``id TAB scope TAB direction TAB pattern`` per line."""
    rules = []
    seen = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.rstrip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise CorpusError(f"rule line {lineno}: expected 4 tab-separated fields")
        rule_id, scope, direction, pattern = parts
        if rule_id in seen:
            raise CorpusError(f"rule line {lineno}: duplicate rule id {rule_id!r}")
        seen.add(rule_id)
        if scope not in (INTRA, INTER):
            raise CorpusError(f"rule line {lineno}: unknown scope {scope!r}")
        if direction not in (E1_FIRST, E2_FIRST):
            raise CorpusError(f"rule line {lineno}: unknown direction {direction!r}")
        rules.append(PrecedenceRule(
            id=rule_id, scope=scope, direction=direction,
            pattern=pattern, elements=_compile_pattern(pattern),
        ))
    return rules


@lru_cache(maxsize=1)
def default_rules() -> tuple[PrecedenceRule, ...]:
    text = resources.files("bioprecedence").joinpath("data/default_rules.tsv").read_text()
    return tuple(load_rules(text))


# ---------------------------------------------------------------------------
# pattern matching


def _match_elements(elements, words, ei, ti, e1_span, e2_span, path_ok, hits) -> bool:
    """Backtracking match; fills ``hits`` with literal token positions."""
    if ei == len(elements):
        return True
    el = elements[ei]
    if el.kind == "wild":
        for j in range(ti, len(words) + 1):
            if _match_elements(elements, words, ei + 1, j, e1_span, e2_span,
                               path_ok, hits):
                return True
        return False
    if el.kind in ("e1", "e2"):
        span = e1_span if el.kind == "e1" else e2_span
        if span is not None and ti == span[0]:
            return _match_elements(elements, words, ei + 1, span[1], e1_span,
                                   e2_span, path_ok, hits)
        return False
    if ti < len(words) and el.regex.fullmatch(words[ti]):
        if el.on_path and (path_ok is None or ti not in path_ok):
            return False
        hits.append(ti)
        if _match_elements(elements, words, ei + 1, ti + 1, e1_span, e2_span,
                           path_ok, hits):
            return True
        hits.pop()
    return False


def _match_rule(rule: PrecedenceRule, words: list[str], e1_span, e2_span,
                path_ok, anchored: bool) -> list[int] | None:
    starts = [0] if anchored else range(len(words) + 1)
    for start in starts:
        hits: list[int] = []
        if _match_elements(rule.elements, words, 0, start, e1_span, e2_span,
                           path_ok, hits):
            return hits
    return None


def _negated(rule: PrecedenceRule, words: list[str], hits: list[int]) -> bool:
    # A cue right after "not" abstains, unless the rule matches "not" itself.
    if not hits or rule.can_match_negator():
        return False
    first = min(hits)
    return first > 0 and words[first - 1].lower() in _NEGATORS


def _path_neighborhood(sentence: Sentence, e1_trigger, e2_trigger) -> set[int] | None:
    """Tokens on the trigger-to-trigger dependency path, plus their graph neighbors."""
    best = None
    for a in range(*e1_trigger):
        for b in range(*e2_trigger):
            path = shortest_path(sentence.graph, a, b, len(sentence.tokens))
            if path is not None and (best is None or len(path) < len(best)):
                best = path
    if best is None:
        return None
    core = set(best.tokens())
    near = set(core)
    for idx in core:
        near.update(d for d, _ in sentence.graph.dependents_of(idx))
        near.update(g for g, _ in sentence.graph.governors_of(idx))
    return near


# ---------------------------------------------------------------------------
# the two cue sieves


def classify_intra(pair, doc: Document, rules=None) -> CoarseLabel | None:
    """First matching intra-sentence cue rule, or None."""
    if pair.e1.sentence != pair.e2.sentence:
        return None
    if rules is None:
        rules = default_rules()
    sentence = doc.sentences[pair.e1.sentence]
    words = [t.text for t in sentence.tokens]
    path_ok = None
    if any(el.on_path for rule in rules for el in rule.elements):
        path_ok = _path_neighborhood(sentence, pair.e1.trigger, pair.e2.trigger)
    for rule in rules:
        if rule.scope != INTRA:
            continue
        hits = _match_rule(rule, words, pair.e1.trigger, pair.e2.trigger,
                           path_ok, anchored=False)
        if hits is not None and not _negated(rule, words, hits):
            return rule.label
    return None


def _first_clause_end(words: list[str]) -> int:
    for i, w in enumerate(words):
        if w in _CLAUSE_BREAKS:
            return i
    return len(words)


def classify_inter(pair, doc: Document, rules=None) -> CoarseLabel | None:
    """Sentence-initial cue on E2's sentence, for pairs in adjacent sentences.

    Patterns starting with ``.*`` are searched anywhere within the first
    clause (for cues like "then"); all others must match at the start of
    the sentence.
    """
    if pair.e2.sentence - pair.e1.sentence != 1:
        return None
    if rules is None:
        rules = default_rules()
    sentence = doc.sentences[pair.e2.sentence]
    words = [t.text for t in sentence.tokens]
    for rule in rules:
        if rule.scope != INTER:
            continue
        if rule.elements[0].kind == "wild":
            window = words[:_first_clause_end(words)]
            hits = _match_rule(rule, window, None, None, None, anchored=False)
        else:
            hits = _match_rule(rule, words, None, None, None, anchored=True)
        if hits is not None and not _negated(rule, words, hits):
            return rule.label
    return None


# ---------------------------------------------------------------------------
# tense and aspect

PAST, PRESENT, FUTURE, UNKNOWN = "past", "present", "future", "unknown"
SIMPLE, PERFECTIVE, PROGRESSIVE = "simple", "perfective", "progressive"


@dataclass(frozen=True)
class TenseAspect:
    tense: str
    aspect: str

    @property
    def known(self) -> bool:
        return self.tense != UNKNOWN and self.aspect != UNKNOWN


TA_UNKNOWN = TenseAspect(UNKNOWN, UNKNOWN)

_VERB_TAGS = {"VB", "VBD", "VBG", "VBN", "VBP", "VBZ", "MD"}
_AUX_RELATIONS = {"aux", "auxpass", "aux:pass"}
_BE_PRESENT = {"is", "are", "am", "'s", "'re", "'m"}
_BE_PAST = {"was", "were"}
_HAVE_PRESENT = {"has", "have", "'ve"}
_MODALS = {"may", "might", "can", "could", "must", "shall", "should", "would"}


def _aux_words(sentence: Sentence, verb_index: int) -> list[str]:
    words = []
    for dep, rel in sentence.graph.dependents_of(verb_index):
        if rel in _AUX_RELATIONS:
            words.append(sentence.tokens[dep].text.lower())
    return words


def _resolve_verb(sentence: Sentence, verb_index: int) -> TenseAspect | None:
    """Tense/aspect of one verb token, or None when it is not finite here."""
    pos = sentence.tokens[verb_index].pos
    aux = _aux_words(sentence, verb_index)
    has_will = "will" in aux or "wo" in aux or "'ll" in aux
    # Passive "been"/"being"/"be" never carries the aspect by itself.
    if pos == "VBN":
        if has_will and (_HAVE_PRESENT | {"had"}) & set(aux):
            return TenseAspect(FUTURE, PERFECTIVE)
        if _HAVE_PRESENT & set(aux):
            return TenseAspect(PRESENT, PERFECTIVE)
        if "had" in aux:
            return TenseAspect(PAST, PERFECTIVE)
        if has_will:
            return TenseAspect(FUTURE, SIMPLE)
        if _BE_PRESENT & set(aux):
            return TenseAspect(PRESENT, SIMPLE)
        if _BE_PAST & set(aux):
            return TenseAspect(PAST, SIMPLE)
        return None
    if pos == "VBG":
        be_like = set(aux) & (_BE_PRESENT | _BE_PAST | _HAVE_PRESENT
                              | {"had", "be", "been"})
        if not be_like:
            return None
        if has_will:
            return TenseAspect(FUTURE, PROGRESSIVE)
        if set(aux) & (_BE_PAST | {"had"}):
            return TenseAspect(PAST, PROGRESSIVE)
        return TenseAspect(PRESENT, PROGRESSIVE)
    if pos == "VBD":
        return TenseAspect(PAST, SIMPLE)
    if pos in ("VBZ", "VBP"):
        return TenseAspect(PRESENT, SIMPLE)
    if pos == "VB":
        if has_will:
            return TenseAspect(FUTURE, SIMPLE)
        if "did" in aux:
            return TenseAspect(PAST, SIMPLE)
        if {"do", "does"} & set(aux) or _MODALS & set(aux):
            return TenseAspect(PRESENT, SIMPLE)
        return None               # bare infinitive; look further up the tree
    return None


def detect_tense_aspect(event, sentence: Sentence) -> TenseAspect:
    """Tense/aspect of the finite verb governing the event trigger.

    The trigger token is tried first; when it is nominal or a bare
    non-finite form, the walk continues through its governors toward the
    root until some verb resolves. Events with no such verb get unknowns.
    """
    start = event.trigger[0]
    for idx in range(*event.trigger):
        if sentence.tokens[idx].pos in _VERB_TAGS:
            start = idx
            break
    visited = set()
    current: int | None = start
    while current is not None and current not in visited:
        visited.add(current)
        if sentence.tokens[current].pos in _VERB_TAGS:
            resolved = _resolve_verb(sentence, current)
            if resolved is not None:
                return resolved
        head = sentence.graph.head_of(current)
        current = head[0] if head else None
    return TA_UNKNOWN


# ---------------------------------------------------------------------------
# tense-aspect ordering

_TENSE_RANK = {PAST: 0, PRESENT: 1, FUTURE: 2}

#: Unordered tense-aspect combinations that license a precedence decision.
#: Combinations with equal tense and aspect are never informative.
_INFORMATIVE: frozenset[frozenset[TenseAspect]] = frozenset(
    frozenset(combo)
    for combo in [
        (TenseAspect(PAST, SIMPLE), TenseAspect(PAST, PERFECTIVE)),
        (TenseAspect(PAST, SIMPLE), TenseAspect(FUTURE, SIMPLE)),
        (TenseAspect(PAST, SIMPLE), TenseAspect(FUTURE, PERFECTIVE)),
        (TenseAspect(PAST, PERFECTIVE), TenseAspect(PRESENT, SIMPLE)),
        (TenseAspect(PAST, PERFECTIVE), TenseAspect(PRESENT, PERFECTIVE)),
        (TenseAspect(PAST, PERFECTIVE), TenseAspect(FUTURE, SIMPLE)),
        (TenseAspect(PAST, PERFECTIVE), TenseAspect(FUTURE, PERFECTIVE)),
        (TenseAspect(PRESENT, SIMPLE), TenseAspect(PRESENT, PERFECTIVE)),
        (TenseAspect(PRESENT, SIMPLE), TenseAspect(FUTURE, SIMPLE)),
        (TenseAspect(PRESENT, PERFECTIVE), TenseAspect(FUTURE, SIMPLE)),
        (TenseAspect(PRESENT, PERFECTIVE), TenseAspect(FUTURE, PERFECTIVE)),
        (TenseAspect(FUTURE, SIMPLE), TenseAspect(FUTURE, PERFECTIVE)),
    ]
)


def _earlier(ta1: TenseAspect, ta2: TenseAspect) -> bool:
    """True when ta1's event happens before ta2's.

    Earlier tense comes first; at equal tense the perfective form describes
    the already-completed event and precedes the simple form.
    """
    if ta1.tense != ta2.tense:
        return _TENSE_RANK[ta1.tense] < _TENSE_RANK[ta2.tense]
    return ta1.aspect == PERFECTIVE and ta2.aspect == SIMPLE


def default_reichenbach_mapping() -> dict[tuple[TenseAspect, TenseAspect], CoarseLabel]:
    """Direction table over the informative tense-aspect combinations."""
    mapping = {}
    for combo in _INFORMATIVE:
        ta1, ta2 = sorted(combo, key=lambda ta: (_TENSE_RANK[ta.tense], ta.aspect))
        first = CoarseLabel.E1_PRECEDES_E2 if _earlier(ta1, ta2) else CoarseLabel.E2_PRECEDES_E1
        mapping[(ta1, ta2)] = first
        mapping[(ta2, ta1)] = first.mirrored()
    return mapping


_DEFAULT_MAPPING = None


def classify_reichenbach(pair, doc: Document, mapping=None) -> CoarseLabel | None:
    """Order the pair by verbal tense and aspect, when informative."""
    global _DEFAULT_MAPPING
    if mapping is None:
        if _DEFAULT_MAPPING is None:
            _DEFAULT_MAPPING = default_reichenbach_mapping()
        mapping = _DEFAULT_MAPPING
    ta1 = detect_tense_aspect(pair.e1, doc.sentences[pair.e1.sentence])
    ta2 = detect_tense_aspect(pair.e2, doc.sentences[pair.e2.sentence])
    if not (ta1.known and ta2.known) or ta1 == ta2:
        return None
    return mapping.get((ta1, ta2))
