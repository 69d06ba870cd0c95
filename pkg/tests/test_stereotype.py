from __future__ import annotations

import csv
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from conftest import FIXTURES, read_fixture
from odang import vocab as V
from odang.errors import InconsistentRefs
from odang.ingest import ingest_file, messages_from_store
from odang.model import AnnotatorId, validate
from odang.rdf import parse_ntriples, serialize_ntriples
from odang.store import TripleStore
from odang.stereotype import (
    Chunk,
    MinimumPhrase,
    Privacy,
    Round,
    StereotypeAnnotatorProfile,
    StereotypeConcept,
    chunk_violations,
    concept_class,
    encode_annotator_profile,
    encode_stereotype,
    load_stereotype_annotations,
    read_stereotype_annotations,
    ster_iri,
    validate_clustering,
)

from mutations import clustering_mutations

STER = FIXTURES / "stereotype"
A1, A2 = AnnotatorId("annotator_01"), AnnotatorId("annotator_02")


@pytest.fixture(scope="module")
def messages():
    store = TripleStore(ingest_file(STER / "messages.yaml", STER / "messages.csv")[0])
    return {m.id: m.text for m in messages_from_store(store)}


@pytest.fixture(scope="module")
def annotations(messages):
    return read_stereotype_annotations(STER / "annotations.tsv", messages)


def rows():
    with open(STER / "annotations.tsv", encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh, delimiter="\t"))


class TestFixture:
    def test_loads_cleanly(self, annotations):
        assert annotations.violations == []
        assert len(annotations.phrases) == 16
        per = Counter((c.annotator, c.round) for c in annotations.concepts)
        assert per[(A1, Round.Ten)] == 10 and per[(A1, Round.Five)] == 5
        assert per[(A2, Round.Ten)] == 2 and per[(A2, Round.Five)] == 2

    def test_chunk_span_integrity(self, annotations, messages):
        for chunk in annotations.chunks.values():
            start, end = chunk.span
            assert messages[chunk.message_ref][start:end] == chunk.text

    def test_chunks_are_per_annotator(self, annotations):
        assert len(annotations.chunks) == 16
        same_span = [c for c in annotations.chunks.values() if (c.message_ref, c.span) == ("s1", (13, 58))]
        assert sorted(c.annotator.name for c in same_span) == ["annotator_01", "annotator_02"]

    def test_valid_clustering(self, annotations):
        for rnd in Round:
            assert validate_clustering(annotations.phrases.values(), annotations.concepts, rnd) == []

    def test_partition_by_counting(self, annotations):
        for rnd in Round:
            counts = Counter(pid for c in annotations.concepts if c.round is rnd for pid in c.members)
            assert set(counts) == set(annotations.phrases) and set(counts.values()) == {1}


class TestMutations:
    @pytest.mark.parametrize(
        "name, needle",
        [
            ("cap_ten", "exceed the cap of 10"),
            ("cap_five", "exceed the cap of 5"),
            ("phrase_unclustered", "in no cluster"),
            ("phrase_in_two_clusters", "in 2 clusters"),
            ("unknown_phrase", "unknown phrase"),
            ("foreign_phrase", "belongs to annotator_02"),
        ],
    )
    def test_each_mutation_rejected(self, annotations, name, needle):
        rnd, concepts = clustering_mutations(annotations)[name]
        problems = validate_clustering(annotations.phrases.values(), concepts, rnd)
        assert len(problems) == 1 and needle in problems[0].rule

    def test_relaxed_ignores_caps_only(self, annotations):
        muts = clustering_mutations(annotations)
        rnd, concepts = muts["cap_ten"]
        assert validate_clustering(annotations.phrases.values(), concepts, rnd, strict=False) == []
        rnd, concepts = muts["phrase_unclustered"]
        assert validate_clustering(annotations.phrases.values(), concepts, rnd, strict=False)


class TestRowValidation:
    def test_bad_span_reported(self, messages):
        data = rows()
        data[0] = dict(data[0], start="14")
        ann = load_stereotype_annotations(data, messages)
        assert [r for r, _ in ann.violations] == [2]

    def test_inconsistent_target_reported(self, messages):
        data = rows()
        data[3] = dict(data[3], target="roma")
        ann = load_stereotype_annotations(data, messages)
        assert [r for r, _ in ann.violations] == [5]

    def test_unknown_message_and_empty_frame(self, messages):
        data = rows()
        data[0] = dict(data[0], message_id="s99")
        data[1] = dict(data[1], frame=" ")
        ann = load_stereotype_annotations(data, messages)
        assert [r for r, _ in ann.violations] == [2, 3]

    def test_chunk_violations(self):
        c = Chunk("c", "abc", "m", (1, 4), A1)
        assert chunk_violations(c, "xabc") == []
        assert chunk_violations(c, "xab")[0].field == "span"
        assert chunk_violations(c, "xabd")[0].field == "text"


class TestEncoding:
    def test_sense_chain_well_formed(self, annotations):
        g = annotations.encode()
        senses = {t.subject for t in g if t.object == V.ONTOLEX_LEXICAL_SENSE}
        assert len(senses) == 2 * len(annotations.phrases)
        for s in senses:
            assert len([t for t in g if t.subject == s and t.predicate == V.ONTOLEX_IS_LEXICALIZED_SENSE_OF]) == 1
            assert len([t for t in g if t.object == s and t.predicate == V.ONTOLEX_SENSE]) == 1

    def test_graph_round_trips(self, annotations):
        g = annotations.encode()
        assert parse_ntriples(serialize_ntriples(g)) == g

    def test_concept_slug(self):
        assert concept_class("sono pericolosi") == ster_iri("SonoPericolosi")
        assert concept_class("Dangerous") == ster_iri("Dangerous")

    def test_inconsistent_refs(self):
        chunk = Chunk("c1", "x", "m", (0, 1), A1)
        concept = StereotypeConcept("L", Round.Ten, A1, frozenset({"p1"}), ster_iri("t"))
        with pytest.raises(InconsistentRefs):
            encode_stereotype(chunk, MinimumPhrase("p1", "f", "c2", A1), concept)
        with pytest.raises(InconsistentRefs):
            encode_stereotype(chunk, MinimumPhrase("p1", "f", "c1", A2), concept)
        with pytest.raises(InconsistentRefs):
            encode_stereotype(chunk, MinimumPhrase("p2", "f", "c1", A1), concept)


class TestProfiles:
    PROFILE = StereotypeAnnotatorProfile(A2, "female", 29, ster_iri("Italy"))

    def test_withheld_by_default(self):
        out = encode_annotator_profile(self.PROFILE)
        assert {t.predicate for t in out} == {V.RDF_TYPE, V.DUL_IS_ROLE_OF}

    def test_released(self):
        out = encode_annotator_profile(self.PROFILE, Privacy.Release)
        assert len(out) == 5

    @given(st.integers(-5, 150))
    def test_age_bounds(self, age):
        problems = validate(StereotypeAnnotatorProfile(A1, age=age))
        assert (problems == []) == (14 <= age <= 100)

    def test_gold_not_a_stereotype_annotator(self):
        assert validate(StereotypeAnnotatorProfile(AnnotatorId("gold_standard")))
