from __future__ import annotations

import json

import pytest
from hypothesis import given, strategies as st

from conftest import FIXTURES
from odang import vocab as V
from odang.errors import ClientUnavailable, RateLimited, UnknownEntity
from odang.ingest import ingest_file
from odang.linker import (
    Candidate,
    LinkClients,
    LinkConfig,
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
from odang.linker.clients import FixtureFactsClient, FixtureHandleClient, FixtureSearchClient, PlatformUser
from odang.model import PersonFacts
from odang.namespaces import ODANG
from odang.rdf import serialize_ntriples
from odang.store import TripleStore
from odang.terms import XSD_INTEGER, Iri, Literal, Triple

LINKER = FIXTURES / "linker"


def o(local):
    return Iri(ODANG + local)


def corpus_store():
    triples, _ = ingest_file(LINKER / "corpus.yaml", LINKER / "corpus.csv")
    return TripleStore(triples)


def run(config=LinkConfig()):
    clients = LinkClients.from_fixtures(LINKER)
    delta, report = link_corpus(corpus_store(), clients, config)
    return delta, report, clients


class TestMentions:
    def test_leading_run(self):
        ms = extract_mentions("@a @b, ciao @c e@d")
        assert [(m.surface, m.position) for m in ms] == [
            ("@a", Position.LeadingHandle),
            ("@b", Position.LeadingHandle),
            ("@c", Position.Other),
        ]

    def test_no_mentions(self):
        assert extract_mentions("nessuna menzione") == []

    @given(st.text())
    def test_leading_mentions_precede_other_tokens(self, text):
        ms = extract_mentions(text)
        assert all(m.surface.startswith("@") for m in ms)
        kinds = [m.position for m in ms]
        assert kinds == sorted(kinds, key=lambda p: p is Position.Other)


class TestDisambiguation:
    CANDS = [Candidate("Ada", "x1", 5.0), Candidate("Ada B", "x2", 50.0), Candidate("Ada", "x3", 7.0), Candidate("ada", "x4", 90.0)]

    def test_exact_name_best_score(self):
        assert disambiguate("Ada", self.CANDS) == "x3"

    def test_min_score(self):
        assert resolve("Ada", self.CANDS, min_score=10).external_id is None
        assert resolve("Ada", self.CANDS, min_score=10).exact_matches == 2

    def test_casefold_opt_in(self):
        assert disambiguate("Ada", self.CANDS, casefold=True) == "x4"

    def test_nfc(self):
        decomposed = "Cécile"
        assert disambiguate("Cécile", [Candidate(decomposed, "k", 1.0)]) == "k"

    def test_tie_takes_first(self):
        d = resolve("Ada", [Candidate("Ada", "a", 3.0), Candidate("Ada", "b", 3.0)])
        assert (d.external_id, d.tie) == ("a", True)

    def test_negative_score_rejected(self):
        with pytest.raises(ValueError):
            Candidate("x", "y", -1.0)

    def test_search_sorted_and_limited(self):
        client = FixtureSearchClient(LINKER / "search")
        assert [c.external_id for c in search_candidates("Laura Rossi", client, 2)] == ["kg:/m/0lower", "kg:/m/0lrossijr"]


class TestClients:
    def test_handles(self):
        client = FixtureHandleClient(LINKER / "handles")
        assert client.lookup("@user_a") == PlatformUser("Laura Rossi", 322933929)
        assert client.lookup("@ghost") is None
        assert client.lookup("@never_recorded") is None
        with pytest.raises(ClientUnavailable):
            client.lookup("@flaky")

    def test_rate_limited(self, tmp_path):
        (tmp_path / "x.json").write_text(json.dumps({"request": "@x", "error": "rate_limited"}))
        with pytest.raises(RateLimited):
            FixtureHandleClient(tmp_path).lookup("@x")

    def test_facts(self):
        client = FixtureFactsClient(LINKER / "facts")
        facts = fetch_person_facts("kg:/m/0lrossi", client)
        assert facts == PersonFacts("female", 1985, o("ITA"), o("Lugano"), o("politician"), o("DemocraticParty"))
        assert fetch_person_facts("kg:/g/11mbianchi", client) == PersonFacts(gender="male", occupation=o("journalist"))
        with pytest.raises(UnknownEntity):
            fetch_person_facts("kg:/nothing", client)

    def test_exchange_log(self):
        _, _, clients = run()
        kinds = [e["client"] for e in clients.log.entries]
        assert kinds.count("handles") == 6
        assert set(clients.log.responses("search")) == {"Cécile Kyenge", "Laura Rossi", "Giulia Verdi", "Marco Bianchi"}
        assert all(json.loads(line) for line in clients.log.to_jsonl().splitlines())


class TestLinkCorpus:
    def test_report(self):
        _, report, _ = run()
        assert report.as_dict() == {
            "mentionsSeen": 6,
            "candidatesFetched": 7,
            "linked": 3,
            "rejectedNoExactMatch": 1,
            "rejectedLowScore": 0,
            "unresolvedHandles": 1,
            "errors": 1,
            "ties": 0,
        }
        assert {(d.mention.surface, d.person_id) for d in report.links} == {
            ("@ckyenge", "usr_1402339740"),
            ("@user_a", "usr_322933929"),
            ("@user_c", "usr_77700011"),
        }

    def test_report_invariant(self):
        for config in (LinkConfig(), LinkConfig(min_score=1000), LinkConfig(mentions=MentionMode.Leading), LinkConfig(casefold=True)):
            _, r, _ = run(config)
            assert r.linked + r.rejected_no_exact_match + r.rejected_low_score <= r.mentions_seen

    def test_person_triples(self):
        delta, _, _ = run()
        u = o("usr_322933929")
        assert {t for t in delta if t.subject == u} == {
            Triple(u, V.RDF_TYPE, V.PERSON),
            Triple(u, V.HAS_ID, Literal("322933929", XSD_INTEGER)),
            Triple(u, V.HANDLE, Literal("@user_a")),
            Triple(u, V.GENDER, o("female")),
            Triple(u, V.BIRTH_YEAR, Literal("1985", XSD_INTEGER)),
            Triple(u, V.COUNTRY_OF_CITIZENSHIP, o("ITA")),
            Triple(u, V.PLACE_OF_BIRTH, o("Lugano")),
            Triple(u, V.OCCUPATION, o("politician")),
            Triple(u, V.POLITICAL_PARTY, o("DemocraticParty")),
        }

    def test_situation_participation(self):
        delta, _, _ = run()
        k = o("usr_1402339740")
        assert Triple(o("situation_m1"), V.IS_SETTING_FOR, k) in delta
        assert Triple(o("message_m1"), V.HAS_TARGET, k) in delta
        assert Triple(k, V.HAS_ROLE, o("Addressee")) in delta
        c = o("usr_77700011")
        assert Triple(o("situation_m4"), V.IS_SETTING_FOR, c) in delta
        assert Triple(c, V.HAS_ROLE, o("Addressee")) not in delta
        assert not any(t.subject == o("situation_m2") for t in delta)

    def test_leading_mode(self):
        _, report, _ = run(LinkConfig(mentions=MentionMode.Leading))
        assert (report.mentions_seen, report.linked) == (5, 2)

    def test_min_score(self):
        _, report, _ = run(LinkConfig(min_score=1000))
        assert (report.linked, report.rejected_low_score) == (1, 2)

    def test_casefold_changes_choice(self):
        _, report, _ = run(LinkConfig(casefold=True))
        assert report.errors == 2 and report.linked == 2

    def test_limit_truncates_candidates(self):
        _, report, _ = run(LinkConfig(limit=1))
        assert report.candidates_fetched == 4
        assert report.rejected_no_exact_match == 2

    def test_determinism(self):
        a, ra, _ = run()
        b, rb, _ = run()
        assert serialize_ntriples(a) == serialize_ntriples(b)
        assert ra == rb

    def test_audits_pass(self):
        delta, report, clients = run()
        assert audit_exact_matches(report, clients) == []
        assert audit_facts(delta, report, clients) == []

    def test_audits_catch_tampering(self):
        delta, report, clients = run()
        u = o("usr_322933929")
        forged = (delta - {Triple(u, V.BIRTH_YEAR, Literal("1985", XSD_INTEGER))}) | {Triple(u, V.BIRTH_YEAR, Literal("1990", XSD_INTEGER))}
        assert len(audit_facts(forged, report, clients)) == 1
        report.links[0] = report.links[0].__class__(report.links[0].mention, report.links[0].name, "kg:/m/0fake01", report.links[0].person_id)
        assert len(audit_exact_matches(report, clients)) == 1

    def test_retries_on_rate_limit(self, tmp_path):
        class Flaky:
            concurrent_safe = False

            def __init__(self):
                self.calls = 0

            def lookup(self, handle):
                self.calls += 1
                if self.calls == 1:
                    raise RateLimited("slow down")
                return None

        fixtures = LinkClients.from_fixtures(LINKER)
        handles = Flaky()
        clients = LinkClients(handles, fixtures.search, fixtures.facts, fixtures.log)
        store = TripleStore(ingest_file(LINKER / "corpus.yaml", LINKER / "corpus.csv")[0])
        _, report = link_corpus(store, clients, LinkConfig(retries=1))
        assert report.unresolved_handles == 6 and report.errors == 0
