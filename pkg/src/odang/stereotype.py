"""Stereotype annotations as lexical entry / sense / concept chains.

A chunk of a message is a lexical entry; the minimum phrase an annotator
writes for it is a lexical sense; the cluster that phrase is grouped into
during a clustering round is the lexical concept, split from its target group.
"""
from __future__ import annotations

import csv
import enum
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

from odang import vocab as V
from odang.errors import InconsistentRefs
from odang.model import AnnotatorId, Violation, camel_slug, message_iri, validate
from odang.namespaces import STANDARD_NAMESPACES, escape_local, skolem_iri
from odang.terms import Iri, Literal, Triple, integer

STER = STANDARD_NAMESPACES["ster"]
WAS_CLUSTERED_AS = Iri(STER + "wasClusteredAs")


class Round(enum.Enum):
    """Clustering round; the value is the per-annotator cluster cap."""

    Ten = 10
    Five = 5

    @property
    def cap(self) -> int:
        return self.value


class Privacy(enum.Enum):
    Withhold = "withhold"
    Release = "release"


def ster_iri(local: str) -> Iri:
    return Iri(STER + escape_local(local))


def annotator_iri(annotator: AnnotatorId) -> Iri:
    return ster_iri(annotator.name)


def concept_class(label: str) -> Iri:
    slug = camel_slug(label)
    return ster_iri(slug[:1].upper() + slug[1:])


@dataclass(frozen=True)
class Chunk:
    id: str
    text: str
    message_ref: str
    span: Tuple[int, int]
    annotator: AnnotatorId


@dataclass(frozen=True)
class MinimumPhrase:
    id: str
    frame: str
    chunk_ref: str
    annotator: AnnotatorId


@dataclass(frozen=True)
class StereotypeConcept:
    label: str
    round: Round
    annotator: AnnotatorId
    members: FrozenSet[str]
    target: Iri

    @property
    def node(self) -> Iri:
        return skolem_iri("concept", self.annotator.name, self.round.name, self.label)


@dataclass(frozen=True)
class StereotypeAnnotatorProfile:
    id: AnnotatorId
    gender: Optional[str] = None
    age: Optional[int] = None
    birth_country: Optional[Iri] = None


def chunk_violations(chunk: Chunk, message_text: str) -> List[Violation]:
    start, end = chunk.span
    if not 0 <= start < end <= len(message_text):
        return [Violation("span", f"({start}, {end}) outside message of length {len(message_text)}")]
    if message_text[start:end] != chunk.text:
        return [Violation("text", f"message text at {chunk.span} is {message_text[start:end]!r}, not {chunk.text!r}")]
    return []


@validate.register
def _(entity: StereotypeAnnotatorProfile) -> List[Violation]:
    out = validate(entity.id)
    if entity.id.is_gold:
        out.append(Violation("id", "a stereotype annotator must be an individual annotator"))
    if entity.age is not None and not (type(entity.age) is int and 14 <= entity.age <= 100):
        out.append(Violation("age", f"{entity.age!r} outside [14, 100]"))
    return out


@validate.register
def _(entity: MinimumPhrase) -> List[Violation]:
    return [] if entity.frame.strip() else [Violation("frame", "empty minimum phrase")]


# ---------------------------------------------------------------------------
# Encoding
# ---------------------------------------------------------------------------


def entry_node(chunk: Chunk) -> Iri:
    return skolem_iri("chunk", chunk.id)


def sense_node(phrase: MinimumPhrase, round: Round) -> Iri:
    # One sense per clustering round, so each carries exactly one concept link.
    return skolem_iri("phrase", phrase.id, round.name)


def encode_stereotype(
    chunk: Chunk,
    phrase: MinimumPhrase,
    concept: StereotypeConcept,
    manifestation: Optional[Iri] = None,
) -> Set[Triple]:
    """Chunk entry -> phrase sense -> clustered concept, with attributions."""
    if phrase.chunk_ref != chunk.id:
        raise InconsistentRefs(f"phrase {phrase.id!r} refers to chunk {phrase.chunk_ref!r}, not {chunk.id!r}")
    if phrase.annotator != chunk.annotator:
        raise InconsistentRefs(f"phrase {phrase.id!r} and chunk {chunk.id!r} have different annotators")
    if phrase.id not in concept.members:
        raise InconsistentRefs(f"concept {concept.label!r} does not contain phrase {phrase.id!r}")
    entry, sense, node = entry_node(chunk), sense_node(phrase, concept.round), concept.node
    source = manifestation if manifestation is not None else message_iri(chunk.message_ref)
    return {
        Triple(entry, V.RDF_TYPE, V.ONTOLEX_LEXICAL_ENTRY),
        Triple(entry, V.STER_CHUNK, Literal(chunk.text)),
        Triple(entry, V.DUL_IS_PART_OF, source),
        Triple(entry, V.PROV_WAS_ATTRIBUTED_TO, annotator_iri(chunk.annotator)),
        Triple(entry, V.ONTOLEX_SENSE, sense),
        Triple(sense, V.RDF_TYPE, V.STER_ANNOTATION),
        Triple(sense, V.RDF_TYPE, V.ONTOLEX_LEXICAL_SENSE),
        Triple(sense, V.STER_FRAME, Literal(phrase.frame)),
        Triple(sense, V.ONTOLEX_IS_LEXICALIZED_SENSE_OF, node),
        Triple(node, V.RDF_TYPE, concept_class(concept.label)),
        Triple(node, V.RDFS_SUBCLASS_OF, V.STER_STEREOTYPE),
        Triple(node, V.RDFS_SUBCLASS_OF, V.ONTOLEX_LEXICAL_CONCEPT),
        Triple(node, V.STER_HAS_TARGET, concept.target),
        Triple(node, V.PROV_WAS_ATTRIBUTED_TO, annotator_iri(concept.annotator)),
        Triple(node, V.STER_CLUSTER_ROUND, integer(concept.round.cap)),
    }


def encode_annotator_profile(profile: StereotypeAnnotatorProfile, privacy: Privacy = Privacy.Withhold) -> Set[Triple]:
    """Role triples always; demographics only when ``privacy`` is ``Release``."""
    node = annotator_iri(profile.id)
    out = {
        Triple(node, V.RDF_TYPE, V.STER_ANNOTATOR),
        Triple(node, V.DUL_IS_ROLE_OF, V.PROV_PERSON),
    }
    if privacy is Privacy.Release:
        if profile.gender is not None:
            out.add(Triple(node, V.STER_GENDER, Literal(profile.gender)))
        if profile.age is not None:
            out.add(Triple(node, V.STER_AGE, integer(profile.age)))
        if profile.birth_country is not None:
            out.add(Triple(node, V.STER_BIRTH_COUNTRY, profile.birth_country))
    return out


# ---------------------------------------------------------------------------
# Clustering rules
# ---------------------------------------------------------------------------


def validate_clustering(
    phrases: Iterable[MinimumPhrase],
    concepts: Iterable[StereotypeConcept],
    round: Round,
    strict: bool = True,
) -> List[Violation]:
    """Check that each annotator's phrases are partitioned by their clusters of ``round``.

    With ``strict`` off, the per-round cluster cap is not enforced.
    """
    phrases = list(phrases)
    concepts = [c for c in concepts if c.round is round]
    owner = {p.id: p.annotator for p in phrases}
    out: List[Violation] = []

    per_annotator: Dict[AnnotatorId, List[StereotypeConcept]] = defaultdict(list)
    for c in concepts:
        per_annotator[c.annotator].append(c)
    for annotator in sorted(per_annotator):
        n = len(per_annotator[annotator])
        if strict and n > round.cap:
            out.append(Violation(f"{annotator.name}/{round.name}", f"{n} clusters exceed the cap of {round.cap}"))

    membership: Counter = Counter()
    for c in concepts:
        for pid in sorted(c.members):
            if pid not in owner:
                out.append(Violation(f"{c.annotator.name}/{round.name}/{c.label}", f"unknown phrase {pid!r}"))
            elif owner[pid] != c.annotator:
                out.append(Violation(f"{c.annotator.name}/{round.name}/{c.label}", f"phrase {pid!r} belongs to {owner[pid].name}"))
            else:
                membership[pid] += 1
    for p in sorted(phrases, key=lambda p: p.id):
        k = membership[p.id]
        if k != 1:
            where = "no cluster" if k == 0 else f"{k} clusters"
            out.append(Violation(f"{p.annotator.name}/{round.name}", f"phrase {p.id!r} is in {where}"))
    return out


# ---------------------------------------------------------------------------
# Annotation files
# ---------------------------------------------------------------------------

COLUMNS = ("message_id", "start", "end", "chunk", "frame", "cluster10", "cluster5", "annotator", "target")


@dataclass
class StereotypeAnnotations:
    chunks: Dict[str, Chunk] = field(default_factory=dict)
    phrases: Dict[str, MinimumPhrase] = field(default_factory=dict)
    concepts: List[StereotypeConcept] = field(default_factory=list)
    violations: List[Tuple[int, str]] = field(default_factory=list)

    def encode(self, manifestation: Optional[Iri] = None) -> Set[Triple]:
        out: Set[Triple] = set()
        for c in self.concepts:
            for pid in sorted(c.members):
                phrase = self.phrases[pid]
                out |= encode_stereotype(self.chunks[phrase.chunk_ref], phrase, c, manifestation)
        return out


def load_stereotype_annotations(
    rows: Iterable[Mapping[str, str]],
    messages: Optional[Mapping[str, str]] = None,
) -> StereotypeAnnotations:
    """Build chunks, phrases and both rounds of clusters from annotation rows.

    One row is one minimum phrase. When ``messages`` (id -> text) is given,
    chunk spans are checked against it and failing rows are reported.
    Rows numbered from 2 (the header is row 1).
    """
    result = StereotypeAnnotations()
    members: Dict[Tuple[AnnotatorId, Round, str], Set[str]] = defaultdict(set)
    targets: Dict[Tuple[AnnotatorId, Round, str], str] = {}

    for rowno, row in enumerate(rows, 2):
        missing = [c for c in COLUMNS if row.get(c) is None]
        if missing:
            result.violations.append((rowno, f"missing columns {missing}"))
            continue
        annotator = AnnotatorId(row["annotator"].strip())
        problems = [str(v) for v in validate(annotator)]
        try:
            span = (int(row["start"]), int(row["end"]))
        except ValueError:
            problems.append(f"non-integer span ({row['start']!r}, {row['end']!r})")
            span = (0, 0)
        mid = row["message_id"].strip()
        chunk = Chunk(f"{mid}:{span[0]}-{span[1]}:{annotator.name}", row["chunk"], mid, span, annotator)
        if messages is not None and not problems:
            if mid not in messages:
                problems.append(f"unknown message {mid!r}")
            else:
                problems += [str(v) for v in chunk_violations(chunk, messages[mid])]
        phrase = MinimumPhrase(f"phrase_{rowno}", row["frame"].strip(), chunk.id, annotator)
        problems += [str(v) for v in validate(phrase)]
        labels = {Round.Ten: row["cluster10"].strip(), Round.Five: row["cluster5"].strip()}
        if not all(labels.values()):
            problems.append("both cluster labels are required")
        target = row["target"].strip()
        if not target:
            problems.append("empty target")
        for rnd, label in labels.items():
            known = targets.get((annotator, rnd, label))
            if label and target and known is not None and known != target:
                problems.append(f"cluster {label!r} already targets {known!r}, not {target!r}")
        if problems:
            result.violations.append((rowno, "; ".join(problems)))
            continue

        result.chunks.setdefault(chunk.id, chunk)
        result.phrases[phrase.id] = phrase
        for rnd, label in labels.items():
            members[(annotator, rnd, label)].add(phrase.id)
            targets[(annotator, rnd, label)] = target

    for key in sorted(members, key=lambda k: (k[0].name, -k[1].value, k[2])):
        annotator, rnd, label = key
        result.concepts.append(StereotypeConcept(label, rnd, annotator, frozenset(members[key]), ster_iri(targets[key])))
    return result


def read_stereotype_annotations(path: Union[str, Path], messages: Optional[Mapping[str, str]] = None) -> StereotypeAnnotations:
    path = Path(path)
    delimiter = "," if path.suffix.lower() == ".csv" else "\t"
    with open(path, encoding="utf-8", newline="") as fh:
        return load_stereotype_annotations(csv.DictReader(fh, delimiter=delimiter), messages)
