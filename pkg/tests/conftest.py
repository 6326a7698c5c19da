from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=50, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def curated():
    """The hand-parsed example corpus used across sieve and feature tests."""
    from bioprecedence.ingest import Corpus, load_event_mentions, parse_documents

    docs = {
        d.id: d
        for d in parse_documents((FIXTURES / "curated_cases.conllu").read_text())
    }
    corpus = Corpus(documents=docs)
    for m in load_event_mentions(
        (FIXTURES / "curated_mentions.json").read_text(), docs
    ):
        corpus.mentions[m.id] = m
    return corpus


@pytest.fixture(scope="session")
def make_pair(curated):
    from bioprecedence.candidates import EventPair

    def _make(a: str, b: str) -> EventPair:
        e1, e2 = curated.mentions[a], curated.mentions[b]
        return EventPair(pair_id=f"{a}:{b}", doc_id=e1.doc_id, e1=e1, e2=e2)

    return _make
