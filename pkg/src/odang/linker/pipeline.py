"""Mention extraction, candidate search, exact-match disambiguation and enrichment."""
from __future__ import annotations

import enum
import logging
import re
import unicodedata
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

from odang import vocab as V
from odang.errors import ClientUnavailable, RateLimited, UnknownEntity
from odang.ingest import messages_from_store, situation_id
from odang.linker.clients import Candidate, FactsClient, LinkClients, SearchClient
from odang.model import Person, PersonFacts, Role, encode_person, message_iri
from odang.namespaces import mint_iri
from odang.store import TripleStore
from odang.terms import Iri, Triple

logger = logging.getLogger(__name__)


class Position(enum.Enum):
    LeadingHandle = "leading"
    Other = "other"


class MentionMode(enum.Enum):
    All = "all"
    Leading = "leading"


@dataclass(frozen=True)
class Mention:
    surface: str
    message_ref: Optional[str]
    position: Position


_TOKEN = re.compile(r"\S+")
_HANDLE = re.compile(r"(?<!\w)@(\w+)")


def extract_mentions(text: str, message_ref: Optional[str] = None) -> List[Mention]:
    """Every ``@handle`` in order; the run of handles opening the text is leading."""
    out = []
    leading = True
    for tok in _TOKEN.finditer(text):
        found = list(_HANDLE.finditer(tok.group(0)))
        is_pure_mention = len(found) == 1 and found[0].start() == 0 and found[0].end() >= len(tok.group(0).rstrip(".,:;!?"))
        if not is_pure_mention:
            leading = False
        for m in found:
            position = Position.LeadingHandle if leading else Position.Other
            out.append(Mention(m.group(0), message_ref, position))
    return out


def search_candidates(name: str, client: SearchClient, limit: int = 10) -> List[Candidate]:
    """Candidates by descending score (stable on ties), at most ``limit``."""
    found = client.search(name, limit)
    return sorted(found, key=lambda c: -c.score)[:limit]


def _norm(text: str, casefold: bool) -> str:
    text = unicodedata.normalize("NFC", text)
    return text.casefold() if casefold else text


@dataclass(frozen=True)
class Disambiguation:
    external_id: Optional[str]
    exact_matches: int
    tie: bool


def resolve(name: str, candidates: Sequence[Candidate], min_score: float = 0.0, casefold: bool = False) -> Disambiguation:
    key = _norm(name, casefold)
    exact = [c for c in candidates if _norm(c.name, casefold) == key]
    qualified = [c for c in exact if c.score >= min_score]
    if not qualified:
        return Disambiguation(None, len(exact), False)
    best = max(c.score for c in qualified)
    top = [c for c in qualified if c.score == best]
    return Disambiguation(top[0].external_id, len(exact), len(top) > 1)


def disambiguate(name: str, candidates: Sequence[Candidate], min_score: float = 0.0, casefold: bool = False) -> Optional[str]:
    """Best-scored candidate whose name equals ``name`` exactly and scores ``>= min_score``."""
    return resolve(name, candidates, min_score, casefold).external_id


# Source property ids for each fact field.
FACT_PROPERTIES = {
    "gender": "P21",
    "birth_year": "P569",
    "country_of_citizenship": "P27",
    "place_of_birth": "P19",
    "occupation": "P106",
    "political_party": "P102",
}
_YEAR = re.compile(r"[+-]?(\d{1,4})-")


def _fact_iri(value: str) -> Iri:
    if re.match(r"[A-Za-z][A-Za-z0-9+.\-]*://", value):
        return Iri(value)
    return mint_iri("odang", value)


def _birth_year(value) -> Optional[int]:
    if type(value) is int:
        return value
    text = str(value)
    if text.isdigit():
        return int(text)
    m = _YEAR.match(text)
    return int(m.group(1)) if m else None


def fetch_person_facts(external_id: str, client: FactsClient) -> PersonFacts:
    """The six person facts, first value per property; absent properties stay ``None``."""
    if not external_id:
        raise UnknownEntity("empty external id")
    data = client.entity(external_id)
    values = {}
    for field_name, prop in FACT_PROPERTIES.items():
        found = data.get(prop) or []
        if not found:
            continue
        if len(found) > 1:
            logger.info("%s: %s has %d values; keeping the first", external_id, prop, len(found))
        first = found[0]
        if field_name == "gender":
            values[field_name] = str(first)
        elif field_name == "birth_year":
            year = _birth_year(first)
            if year is None:
                logger.warning("%s: unreadable date %r", external_id, first)
                continue
            values[field_name] = year
        else:
            values[field_name] = _fact_iri(str(first))
    return PersonFacts(**values)


@dataclass(frozen=True)
class LinkDecision:
    mention: Mention
    name: str
    external_id: str
    person_id: str


@dataclass
class LinkReport:
    mentions_seen: int = 0
    candidates_fetched: int = 0
    linked: int = 0
    rejected_no_exact_match: int = 0
    rejected_low_score: int = 0
    unresolved_handles: int = 0
    errors: int = 0
    ties: int = 0
    links: List[LinkDecision] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "mentionsSeen": self.mentions_seen,
            "candidatesFetched": self.candidates_fetched,
            "linked": self.linked,
            "rejectedNoExactMatch": self.rejected_no_exact_match,
            "rejectedLowScore": self.rejected_low_score,
            "unresolvedHandles": self.unresolved_handles,
            "errors": self.errors,
            "ties": self.ties,
        }


@dataclass(frozen=True)
class LinkConfig:
    min_score: float = 0.0
    limit: int = 10
    mentions: MentionMode = MentionMode.All
    casefold: bool = False
    retries: int = 0


def _call(fn, retries: int):
    for attempt in range(retries + 1):
        try:
            return fn()
        except RateLimited:
            if attempt == retries:
                raise
            logger.info("rate limited; retry %d of %d", attempt + 1, retries)


@dataclass
class _Outcome:
    kind: str  # linked | no_exact | low_score | unresolved | error
    candidates: int = 0
    tie: bool = False
    name: str = ""
    external_id: str = ""
    person: Optional[Person] = None


def _resolve_handle(handle: str, clients: LinkClients, config: LinkConfig) -> _Outcome:
    try:
        user = _call(lambda: clients.handles.lookup(handle), config.retries)
        if user is None:
            return _Outcome("unresolved")
        candidates = _call(lambda: search_candidates(user.name, clients.search, config.limit), config.retries)
        choice = resolve(user.name, candidates, config.min_score, config.casefold)
        if choice.external_id is None:
            kind = "low_score" if choice.exact_matches else "no_exact"
            return _Outcome(kind, len(candidates), name=user.name)
        facts = _call(lambda: fetch_person_facts(choice.external_id, clients.facts), config.retries)
    except (ClientUnavailable, UnknownEntity) as exc:
        logger.warning("linking %s failed: %s", handle, exc)
        return _Outcome("error")
    person = Person(f"usr_{user.platform_id}", handle, facts, user.platform_id)
    return _Outcome("linked", len(candidates), choice.tie, user.name, choice.external_id, person)


def link_corpus(store: TripleStore, clients: LinkClients, config: LinkConfig = LinkConfig()) -> Tuple[Set[Triple], LinkReport]:
    """Link mentioned users of every message in ``store``; returns (new triples, report).

    Each distinct handle is resolved once; counters are per mention. Messages
    with an existing situation gain the linked person as a participant.
    """
    report = LinkReport()
    outcomes: Dict[str, _Outcome] = {}
    out: Set[Triple] = set()

    for message in messages_from_store(store):
        mentions = extract_mentions(message.text, message.id)
        if config.mentions is MentionMode.Leading:
            mentions = [m for m in mentions if m.position is Position.LeadingHandle]
        situation = mint_iri("odang", situation_id(message.id))
        in_situation = Triple(situation, V.RDF_TYPE, V.SITUATION) in store
        for mention in mentions:
            report.mentions_seen += 1
            fresh = mention.surface not in outcomes
            if fresh:
                outcomes[mention.surface] = _resolve_handle(mention.surface, clients, config)
            outcome = outcomes[mention.surface]
            if fresh:
                report.candidates_fetched += outcome.candidates
            if outcome.kind == "unresolved":
                report.unresolved_handles += 1
            elif outcome.kind == "no_exact":
                report.rejected_no_exact_match += 1
            elif outcome.kind == "low_score":
                report.rejected_low_score += 1
            elif outcome.kind == "error":
                report.errors += 1
            if outcome.kind != "linked":
                continue
            report.linked += 1
            report.ties += outcome.tie
            person = outcome.person
            report.links.append(LinkDecision(mention, outcome.name, outcome.external_id, person.id))
            out |= encode_person(person)
            if in_situation:
                out.add(Triple(situation, V.IS_SETTING_FOR, person.iri))
                out.add(Triple(message_iri(message.id), V.HAS_TARGET, person.iri))
                if mention.position is Position.LeadingHandle:
                    out.add(Triple(person.iri, V.HAS_ROLE, Role.Addressee.iri))

    delta = {t for t in out if t not in store}
    return delta, report


def audit_exact_matches(report: LinkReport, clients: LinkClients, casefold: bool = False) -> List[str]:
    """Replay the exchange log: every link must be an exact-name candidate that was served."""
    served = clients.log.responses("search")
    problems = []
    for d in report.links:
        recorded = served.get(d.name) or []
        ok = any(
            _norm(c["name"], casefold) == _norm(d.name, casefold) and str(c["id"]) == d.external_id for c in recorded
        )
        if not ok:
            problems.append(f"{d.mention.surface}: {d.external_id!r} is not an exact match served for {d.name!r}")
    return problems


def audit_facts(triples: Set[Triple], report: LinkReport, clients: LinkClients) -> List[str]:
    """Every fact triple about a linked person must come from a served facts response."""
    served = clients.log.responses("facts")
    by_person = {}
    for d in report.links:
        by_person[mint_iri("odang", d.person_id)] = served.get(d.external_id) or {}
    predicate_field = {
        V.GENDER: "gender",
        V.BIRTH_YEAR: "birth_year",
        V.COUNTRY_OF_CITIZENSHIP: "country_of_citizenship",
        V.PLACE_OF_BIRTH: "place_of_birth",
        V.OCCUPATION: "occupation",
        V.POLITICAL_PARTY: "political_party",
    }
    problems = []
    for t in sorted(triples, key=lambda t: (t.subject.value, t.predicate.value)):
        name = predicate_field.get(t.predicate)
        if name is None:
            continue
        source = by_person.get(t.subject)
        values = (source or {}).get(FACT_PROPERTIES[name]) or []
        if not values:
            problems.append(f"{t.subject.value} {name}: no served value")
            continue
        first = values[0]
        if name == "birth_year":
            expected = _birth_year(first)
            ok = int(t.object.lexical) == expected
        elif name == "gender":
            ok = t.object == mint_iri("odang", str(first))
        else:
            ok = t.object == _fact_iri(str(first))
        if not ok:
            problems.append(f"{t.subject.value} {name}: {t.object} not traceable to {first!r}")
    return problems
