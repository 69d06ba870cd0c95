"""Offensive-lexicon profiling of corpora.

Loads a categorized hurtful-word lexicon, encodes entries as lexical entries
described by a category node, and averages per-category hit counts over the
documents of a corpus (optionally restricted to one annotated class).
"""
from __future__ import annotations

import csv
import enum
import io
import json
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

from odang import vocab as V
from odang.errors import EmptyClass, EmptyDataset, EmptyLemma, LexiconError, MissingClassAnnotation, UnknownCategory
from odang.model import GOLD_STANDARD, AnnotationRecord, AnnotatorId
from odang.namespaces import ODANG, escape_local
from odang.terms import Iri, Literal, Triple

logger = logging.getLogger(__name__)

CATEGORY_LABELS: Dict[str, str] = {
    "PS": "ethnic slurs",
    "RCI": "location and demonyms",
    "PA": "profession and occupation",
    "DDP": "physical disabilities and diversity",
    "DDF": "cognitive disabilities and diversity",
    # The encoded lexicon labels this category by its short name.
    "DMC": "moral defects",
    "IS": "words related to social and economic advantages",
    "OR": "words related to plants",
    "AN": "words related to animals",
    "ASM": "words related to male genitalia",
    "ASF": "words related to female genitalia",
    "PR": "words related to prostitution",
    "OM": "words related to homosexuality",
    "QAS": "descriptive words with potential negative connotations",
    "CDS": "derogatory words",
    "RE": "felonies and words related to crime and immoral behavior",
    "SVP": "words related to the seven deadly sins of the christian tradition",
}
CATEGORIES: Tuple[str, ...] = tuple(CATEGORY_LABELS)

_POS_NAMES = {
    "n": "Noun",
    "noun": "Noun",
    "a": "Adjective",
    "adj": "Adjective",
    "adjective": "Adjective",
    "v": "Verb",
    "verb": "Verb",
    "av": "Adverb",
    "adv": "Adverb",
    "adverb": "Adverb",
}


class Level(enum.Enum):
    Conservative = "conservative"
    Inclusive = "inclusive"


class LevelFilter(enum.Enum):
    ConservativeOnly = "conservative"
    All = "all"


class CountMode(enum.Enum):
    Occurrences = "occurrences"
    Presence = "presence"


@dataclass(frozen=True)
class LexiconEntry:
    id: str
    lemma: str
    pos: str
    category: str
    level: Level = Level.Conservative

    @property
    def iri(self) -> Iri:
        return Iri(ODANG + escape_local(self.id))


def category_iri(code: str) -> Iri:
    return Iri(ODANG + code.lower())


def pos_iri(pos: str) -> Iri:
    name = _POS_NAMES.get(pos.strip().lower())
    if name is None:
        name = "".join(part[:1].upper() + part[1:] for part in re.split(r"[\W_]+", pos.strip()) if part)
    return Iri(ODANG + escape_local(name or "Unknown"))


# ---------------------------------------------------------------------------
# Loading and encoding
# ---------------------------------------------------------------------------

_REQUIRED = ("id", "lemma", "pos", "category", "level")


def load_lexicon(rows: Iterable[Mapping[str, str]], level_filter: LevelFilter = LevelFilter.ConservativeOnly) -> List[LexiconEntry]:
    """Validate lexicon rows (dicts keyed by column name) and apply the level filter.

    Row numbers in errors are 1-based over data rows.
    """
    out = []
    for n, row in enumerate(rows, 1):
        missing = [k for k in _REQUIRED if row.get(k) is None]
        if missing:
            raise LexiconError(n, f"missing fields {missing}")
        category = row["category"].strip().upper()
        if category not in CATEGORY_LABELS:
            raise UnknownCategory(n, f"unknown category {row['category']!r}")
        lemma = " ".join(row["lemma"].split()).lower()
        if not lemma:
            raise EmptyLemma(n, "empty lemma")
        try:
            level = Level(row["level"].strip().lower())
        except ValueError:
            raise LexiconError(n, f"unknown level {row['level']!r}") from None
        if level_filter is LevelFilter.ConservativeOnly and level is not Level.Conservative:
            continue
        out.append(LexiconEntry(row["id"].strip(), lemma, row["pos"].strip(), category, level))
    return out


def read_lexicon(path: Union[str, Path], level_filter: LevelFilter = LevelFilter.ConservativeOnly) -> List[LexiconEntry]:
    path = Path(path)
    delimiter = "," if path.suffix.lower() == ".csv" else "\t"
    with open(path, encoding="utf-8", newline="") as fh:
        return load_lexicon(csv.DictReader(fh, delimiter=delimiter), level_filter)


def encode_lexicon_entry(entry: LexiconEntry) -> Set[Triple]:
    node, cat = entry.iri, category_iri(entry.category)
    return {
        Triple(node, V.RDF_TYPE, V.LEXICAL_ENTRY),
        Triple(node, V.RDFS_LABEL, Literal(entry.lemma)),
        Triple(node, V.LEXINFO_POS, pos_iri(entry.pos)),
        Triple(node, V.IS_DESCRIBED, cat),
        Triple(cat, V.RDF_TYPE, V.OFFENSIVE),
        Triple(cat, V.RDFS_LABEL, Literal(CATEGORY_LABELS[entry.category])),
    }


def encode_lexicon(entries: Iterable[LexiconEntry]) -> Set[Triple]:
    out: Set[Triple] = set()
    for e in entries:
        out |= encode_lexicon_entry(e)
    return out


# ---------------------------------------------------------------------------
# Matching
# ---------------------------------------------------------------------------

_URL = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_WORD = re.compile(r"\w+(?:-\w+)*")


def tokenize(text: str) -> List[str]:
    """Lowercased word tokens; URLs removed, "@"/"#" prefixes and punctuation dropped."""
    return [m.group(0).lower() for m in _WORD.finditer(_URL.sub(" ", text))]


@dataclass
class LexiconIndex:
    unigrams: Dict[str, Set[Tuple[str, str]]] = field(default_factory=dict)
    ngrams: Dict[str, Dict[Tuple[str, ...], Set[Tuple[str, str]]]] = field(default_factory=dict)
    max_length: int = 1

    @classmethod
    def build(cls, entries: Iterable[LexiconEntry]) -> "LexiconIndex":
        index = cls()
        for e in entries:
            index.add(e)
        return index

    def add(self, entry: LexiconEntry) -> None:
        key = tuple(tokenize(entry.lemma))
        if not key:
            logger.warning("lexicon entry %s has no word tokens; skipped", entry.id)
            return
        hit = (entry.id, entry.category)
        if len(key) == 1:
            self.unigrams.setdefault(key[0], set()).add(hit)
        else:
            self.ngrams.setdefault(key[0], {}).setdefault(key, set()).add(hit)
            self.max_length = max(self.max_length, len(key))

    def match_at(self, tokens: Sequence[str], i: int) -> Tuple[int, Set[Tuple[str, str]]]:
        """Length and hits of the longest lexicon match starting at ``i`` (0 if none)."""
        tok = tokens[i]
        for key, hits in sorted(self.ngrams.get(tok, {}).items(), key=lambda kv: -len(kv[0])):
            if tuple(tokens[i : i + len(key)]) == key:
                return len(key), hits
        hits = self.unigrams.get(tok)
        return (1, hits) if hits else (0, set())


def category_counts(tokens: Sequence[str], index: LexiconIndex) -> Dict[str, int]:
    """Greedy longest-match occurrence counts for all 17 categories."""
    counts = dict.fromkeys(CATEGORIES, 0)
    i = 0
    while i < len(tokens):
        length, hits = index.match_at(tokens, i)
        if length:
            for cat in {c for _, c in hits}:
                counts[cat] += 1
            i += length
        else:
            i += 1
    return counts


@dataclass(frozen=True)
class CategoryProfile:
    per_category: Dict[str, Fraction]
    documents: int

    def rounded(self, places: int = 4) -> Dict[str, str]:
        return {c: _fmt(self.per_category[c], places) for c in CATEGORIES}


def _fmt(value: Fraction, places: int) -> str:
    # Round half away from zero on the exact rational.
    scaled = value * 10**places
    q = int(scaled + Fraction(1, 2))
    return f"{q // 10**places}.{q % 10**places:0{places}d}"


def dataset_profile(documents: Sequence[Sequence[str]], index: LexiconIndex, mode: CountMode = CountMode.Occurrences) -> CategoryProfile:
    if not documents:
        raise EmptyDataset("cannot profile an empty dataset")
    totals: Counter = Counter()
    for tokens in documents:
        counts = category_counts(tokens, index)
        if mode is CountMode.Presence:
            counts = {c: int(n > 0) for c, n in counts.items()}
        totals.update(counts)
    n = len(documents)
    return CategoryProfile({c: Fraction(totals[c], n) for c in CATEGORIES}, n)


def class_conditional_profile(
    documents: Mapping[str, Sequence[str]],
    records: Iterable[AnnotationRecord],
    scheme: str,
    value,
    index: LexiconIndex,
    annotator: AnnotatorId = GOLD_STANDARD,
    mode: CountMode = CountMode.Occurrences,
) -> CategoryProfile:
    """Profile only documents whose ``annotator`` judgment on ``scheme`` equals ``value``.

    ``documents`` maps message id to tokens; ``scheme`` is the scheme name.
    Every document must carry a judgment from ``annotator`` on ``scheme``.
    """
    judged = {r.message_ref: r.value for r in records if r.scheme.name == scheme and r.annotator == annotator}
    unjudged = sorted(set(documents) - set(judged))
    if unjudged:
        raise MissingClassAnnotation(
            f"{len(unjudged)} documents lack a {scheme!r} judgment by {annotator.name}, e.g. {unjudged[0]!r}"
        )
    selected = sorted(m for m in documents if judged[m] == value)
    if not selected:
        raise EmptyClass(f"no document has {scheme!r} = {value!r} by {annotator.name}")
    return dataset_profile([documents[m] for m in selected], index, mode)


# ---------------------------------------------------------------------------
# Reporting
# ---------------------------------------------------------------------------


def profile_table(rows: Sequence[Tuple[str, CategoryProfile]], columns: Optional[Sequence[str]] = None) -> str:
    """Fixed-width text table: one row per dataset, one column per category."""
    columns = list(columns or CATEGORIES)
    name_width = max([len("dataset")] + [len(name) for name, _ in rows])
    buf = io.StringIO()
    buf.write("dataset".ljust(name_width) + "".join(f"  {c:>6}" for c in columns) + "\n")
    for name, profile in rows:
        cells = profile.rounded()
        buf.write(name.ljust(name_width) + "".join(f"  {cells[c]:>6}" for c in columns) + "\n")
    return buf.getvalue()


def profile_jsonl(rows: Sequence[Tuple[str, CategoryProfile]], columns: Optional[Sequence[str]] = None) -> str:
    columns = list(columns or CATEGORIES)
    lines = []
    for name, profile in rows:
        cells = profile.rounded()
        record = {"dataset": name, "documents": profile.documents}
        record.update({c: cells[c] for c in columns})
        lines.append(json.dumps(record, ensure_ascii=False))
    return "".join(line + "\n" for line in lines)
