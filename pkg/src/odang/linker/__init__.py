"""Entity linking of mentioned users to external knowledge-graph identities."""
from odang.linker.clients import (
    Candidate,
    ExchangeLog,
    FixtureFactsClient,
    FixtureHandleClient,
    FixtureSearchClient,
    LinkClients,
    PlatformUser,
)
from odang.linker.pipeline import (
    LinkConfig,
    LinkDecision,
    LinkReport,
    Mention,
    MentionMode,
    Position,
    audit_exact_matches,
    audit_facts,
    disambiguate,
    extract_mentions,
    fetch_person_facts,
    link_corpus,
    resolve,
    search_candidates,
)

__all__ = [
    "Candidate",
    "ExchangeLog",
    "FixtureFactsClient",
    "FixtureHandleClient",
    "FixtureSearchClient",
    "LinkClients",
    "LinkConfig",
    "LinkDecision",
    "LinkReport",
    "Mention",
    "MentionMode",
    "PlatformUser",
    "Position",
    "audit_exact_matches",
    "audit_facts",
    "disambiguate",
    "extract_mentions",
    "fetch_person_facts",
    "link_corpus",
    "resolve",
    "search_candidates",
]
