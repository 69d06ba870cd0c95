from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import FIXTURES
from odang.errors import EmptyClass, EmptyDataset, EmptyLemma, LexiconError, MissingClassAnnotation, UnknownCategory
from odang.ingest import ingest_corpus, load_mapping, read_table
from odang.lexprof import (
    CATEGORIES,
    CATEGORY_LABELS,
    CountMode,
    LevelFilter,
    LexiconEntry,
    LexiconIndex,
    _fmt,
    category_counts,
    class_conditional_profile,
    dataset_profile,
    load_lexicon,
    profile_jsonl,
    profile_table,
    read_lexicon,
    tokenize,
)
from odang.model import AnnotationRecord, AnnotationScheme

from oracles import brute_force_profile, lexicon_table, random_documents

LEXICON = FIXTURES / "lexicon" / "synthetic.tsv"


@pytest.fixture(scope="module")
def entries():
    return read_lexicon(LEXICON)


@pytest.fixture(scope="module")
def index(entries):
    return LexiconIndex.build(entries)


def row(**kw):
    base = {"id": "X1", "lemma": "parola", "pos": "n", "category": "cds", "level": "conservative"}
    base.update(kw)
    return base


class TestLoading:
    def test_seventeen_categories(self):
        assert len(CATEGORIES) == 17
        assert CATEGORY_LABELS["CDS"] == "derogatory words" and CATEGORY_LABELS["PS"] == "ethnic slurs"

    def test_fixture(self, entries):
        assert len(entries) == 30
        assert entries[0] == LexiconEntry("IT1241", "fannullone", "n", "DMC")

    def test_normalisation(self):
        (e,) = load_lexicon([row(lemma="  Testa   DI rapa ")])
        assert (e.lemma, e.category) == ("testa di rapa", "CDS")

    def test_level_filter(self):
        data = [row(), row(id="X2", level="inclusive")]
        assert len(load_lexicon(data)) == 1
        assert len(load_lexicon(data, LevelFilter.All)) == 2

    @pytest.mark.parametrize(
        "bad, error, rowno",
        [
            ({"category": "ZZZ"}, UnknownCategory, 2),
            ({"lemma": "   "}, EmptyLemma, 2),
            ({"level": "medium"}, LexiconError, 2),
        ],
    )
    def test_rejections(self, bad, error, rowno):
        with pytest.raises(error) as info:
            load_lexicon([row(), row(**bad)])
        assert info.value.row == rowno


class TestMatching:
    def test_tokenize(self):
        assert tokenize("@Ckyenge sei una #Feccia!! https://t.co/x ben-fatto") == ["ckyenge", "sei", "una", "feccia", "ben-fatto"]

    def test_longest_match_wins(self, index):
        counts = category_counts(tokenize("Sei una testa di rapa e una rapa"), index)
        assert counts["DDF"] == 1 and counts["OR"] == 1

    def test_multiword_and_partial(self, index):
        counts = category_counts(tokenize("buono a nulla, buono a niente, feccia della società"), index)
        assert counts["DMC"] == 1 and counts["CDS"] == 1

    def test_surface_forms_only(self, index):
        assert sum(category_counts(tokenize("schifosa delinquenza"), index).values()) == 0

    def test_counts_cover_all_categories(self, index):
        assert set(category_counts([], index)) == set(CATEGORIES)


class TestProfiles:
    def test_hand_computed(self, index):
        docs = [tokenize("porco maiale ladro"), tokenize("porco"), tokenize("niente")]
        p = dataset_profile(docs, index)
        assert p.per_category["AN"] == Fraction(1) and p.per_category["RE"] == Fraction(1, 3)
        assert p.rounded()["RE"] == "0.3333"
        presence = dataset_profile(docs, index, CountMode.Presence)
        assert presence.per_category["AN"] == Fraction(2, 3)

    def test_empty_dataset(self, index):
        with pytest.raises(EmptyDataset):
            dataset_profile([], index)

    def test_rounding_half_up(self):
        assert _fmt(Fraction(1, 8), 2) == "0.13"
        assert _fmt(Fraction(2, 3), 4) == "0.6667"
        assert _fmt(Fraction(3), 4) == "3.0000"

    def test_class_conditional_fixture(self, index):
        spec = load_mapping(FIXTURES / "corpus" / "class_conditional.yaml")
        messages, records, _ = ingest_corpus(read_table(FIXTURES / "corpus" / "class_conditional.csv"), spec)
        docs = {m.id: tokenize(m.text) for m in messages}
        pos = class_conditional_profile(docs, records, "hate speech", 1, index)
        neg = class_conditional_profile(docs, records, "hate speech", 0, index)
        assert (pos.per_category["CDS"], neg.per_category["CDS"]) == (Fraction(3, 2), Fraction(3, 4))
        assert pos.documents == neg.documents == 4

    def test_class_conditional_errors(self, index):
        hs = AnnotationScheme("hate speech")
        docs = {"a": ["feccia"], "b": ["porco"]}
        with pytest.raises(MissingClassAnnotation):
            class_conditional_profile(docs, [AnnotationRecord("a", hs, 1)], "hate speech", 1, index)
        with pytest.raises(EmptyClass):
            class_conditional_profile(docs, [AnnotationRecord("a", hs, 0), AnnotationRecord("b", hs, 0)], "hate speech", 1, index)

    def test_table_and_jsonl(self, index):
        p = dataset_profile([tokenize("feccia")], index)
        table = profile_table([("toy", p)], ["CDS", "AN"])
        assert table == "dataset     CDS      AN\ntoy      1.0000  0.0000\n"
        assert profile_jsonl([("toy", p)], ["CDS"]) == '{"dataset": "toy", "documents": 1, "CDS": "1.0000"}\n'


WORDS = sorted({w for e in read_lexicon(LEXICON) for w in e.lemma.split()})
TABLE = lexicon_table([(e.lemma, e.category) for e in read_lexicon(LEXICON)])


class TestProperties:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32))
    def test_oracle_equivalence(self, seed):
        docs = random_documents(random.Random(seed), WORDS, max_docs=20, max_tokens=40)
        index = LexiconIndex.build(read_lexicon(LEXICON))
        assert dataset_profile(docs, index).per_category == brute_force_profile(docs, TABLE, CATEGORIES)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32), st.integers(1, 50))
    def test_random_lexicons_match_oracle(self, seed, size):
        rng = random.Random(seed)
        vocab = ["a", "b", "c", "d", "e"]
        lex = [(" ".join(rng.choice(vocab) for _ in range(rng.randint(1, 3))), rng.choice(CATEGORIES)) for _ in range(size)]
        entries = [LexiconEntry(f"E{i}", lemma, "n", cat) for i, (lemma, cat) in enumerate(lex)]
        docs = [[rng.choice(vocab) for _ in range(rng.randint(0, 100))] for _ in range(rng.randint(1, 10))]
        got = dataset_profile(docs, LexiconIndex.build(entries)).per_category
        assert got == brute_force_profile(docs, lexicon_table(lex), CATEGORIES)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32))
    def test_count_conservation(self, seed):
        rng = random.Random(seed)
        index = LexiconIndex.build(read_lexicon(LEXICON))
        tokens = random_documents(rng, WORDS, max_docs=1)[0]
        matched, i = 0, 0
        while i < len(tokens):
            length, _ = index.match_at(tokens, i)
            matched += bool(length)
            i += length or 1
        assert sum(category_counts(tokens, index).values()) == matched

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32))
    def test_linearity(self, seed):
        docs = random_documents(random.Random(seed), WORDS, max_docs=20, max_tokens=30)
        index = LexiconIndex.build(read_lexicon(LEXICON))
        for mode in CountMode:
            assert dataset_profile(docs * 2, index, mode).per_category == dataset_profile(docs, index, mode).per_category

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32), st.sampled_from(WORDS), st.sampled_from(CATEGORIES))
    def test_monotonicity(self, seed, word, category):
        entries = read_lexicon(LEXICON)
        tokens = random_documents(random.Random(seed), WORDS, max_docs=1)[0]
        before = category_counts(tokens, LexiconIndex.build(entries))
        after = category_counts(tokens, LexiconIndex.build(entries + [LexiconEntry("NEW", word, "n", category)]))
        assert all(after[c] >= before[c] for c in CATEGORIES)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32), st.randoms())
    def test_document_order_irrelevant(self, seed, rng):
        docs = random_documents(random.Random(seed), WORDS, max_docs=20, max_tokens=30)
        index = LexiconIndex.build(read_lexicon(LEXICON))
        shuffled = list(docs)
        rng.shuffle(shuffled)
        assert dataset_profile(shuffled, index) == dataset_profile(docs, index)


def test_multiword_entry_can_shadow_a_shorter_match(entries):
    # Monotonicity is asserted above for single-token entries only.
    tokens = tokenize("la di rapa")
    before = category_counts(tokens, LexiconIndex.build(entries))
    after = category_counts(tokens, LexiconIndex.build(entries + [LexiconEntry("NEW", "di rapa", "n", "AN")]))
    assert (before["OR"], after["OR"], after["AN"]) == (1, 0, 1)
