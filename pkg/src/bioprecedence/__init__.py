"""Causal precedence classification for biomedical event pairs.

The package covers the full pipeline: ingesting parsed documents and event
mentions, generating candidate pairs, rule-based and trained precedence
models, a precision-ordered sieve combinator, and a cross-validated
evaluation harness.
"""

from bioprecedence.corpus import (
    AnnotatedPair,
    Argument,
    CoarseLabel,
    CorpusError,
    DependencyGraph,
    Document,
    EventMention,
    RelationLabel,
    Sentence,
    Token,
    cohens_kappa,
    reduce_label,
)

__version__ = "0.1.0"

__all__ = [
    "AnnotatedPair",
    "Argument",
    "CoarseLabel",
    "CorpusError",
    "DependencyGraph",
    "Document",
    "EventMention",
    "RelationLabel",
    "Sentence",
    "Token",
    "cohens_kappa",
    "reduce_label",
    "__version__",
]
