"""Domain types of the O-Dang! semantic model and their triple encodings.

Messages are ``frbr:Expression`` nodes typed with their platform genre and
linked to corpora via ``dul:isPartOf``. Every annotation judgment becomes its
own description node, attributed to exactly one annotator, so un-aggregated
labels survive encoding untouched. The aggregated label is just another
annotator, ``gold_standard``.
"""
from __future__ import annotations

import datetime
import enum
import re
from dataclasses import dataclass, field
from functools import lru_cache, singledispatch
from typing import Collection, Iterable, List, Optional, Set, Tuple, Union

from odang import vocab as V
from odang.errors import DanglingRecord, InvalidSituation
from odang.namespaces import ODANG, escape_local, mint_iri, skolem_iri
from odang.terms import (
    LANG_STRING,
    BlankNode,
    Iri,
    Literal,
    Triple,
    integer,
)

# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


class Genre(enum.Enum):
    Tweet = "Tweet"
    FacebookPost = "FacebookPost"
    NewsHeadline = "NewsHeadline"
    WebContent = "WebContent"

    @property
    def iri(self) -> Iri:
        if self is Genre.WebContent:
            return V.FABIO_WEB_CONTENT
        return Iri(ODANG + self.value)


@dataclass(frozen=True)
class Binary:
    def contains(self, value) -> bool:
        return type(value) is int and value in (0, 1)


@dataclass(frozen=True)
class Categorical:
    labels: Tuple[str, ...]

    def contains(self, value) -> bool:
        return isinstance(value, str) and value in self.labels


@dataclass(frozen=True)
class IntegerScale:
    min: int
    max: int

    def contains(self, value) -> bool:
        return type(value) is int and self.min <= value <= self.max


ValueDomain = Union[Binary, Categorical, IntegerScale]
Value = Union[int, str]


def camel_slug(text: str) -> str:
    """``"hate speech"`` -> ``"HateSpeech"``; single words keep their case."""
    words = re.findall(r"\w+", text)
    if len(words) == 1:
        return words[0]
    return "".join(w[:1].upper() + w[1:] for w in words)


@dataclass(frozen=True)
class AnnotationScheme:
    name: str
    domain: ValueDomain = field(default_factory=Binary)

    @property
    def class_iri(self) -> Iri:
        return _scheme_class(self.name)

    def encode_value(self, value: Value):
        if isinstance(self.domain, Categorical):
            return Iri(self.class_iri.value + "_" + escape_local(value))
        return integer(value)


@lru_cache(maxsize=None)
def _scheme_class(name: str) -> Iri:
    slug = camel_slug(name)
    return mint_iri("odang", slug[:1].upper() + slug[1:])


_ANNOTATOR_RE = re.compile(r"annotator_\d+\Z")


@dataclass(frozen=True, order=True)
class AnnotatorId:
    """An annotator identity: ``gold_standard`` or an anonymized ``annotator_<n>``."""

    name: str

    @property
    def is_gold(self) -> bool:
        return self.name == "gold_standard"

    @property
    def iri(self) -> Iri:
        return _annotator_iri(self.name)

    @classmethod
    def individual(cls, n: int) -> "AnnotatorId":
        return cls(f"annotator_{n}")


GOLD_STANDARD = AnnotatorId("gold_standard")


@lru_cache(maxsize=4096)
def _annotator_iri(name: str) -> Iri:
    return mint_iri("odang", name)


@dataclass(frozen=True)
class Message:
    id: str
    text: str
    genre: Genre
    corpus_ids: frozenset = frozenset()

    @property
    def iri(self) -> Iri:
        return message_iri(self.id)


@dataclass(frozen=True)
class AnnotationRecord:
    message_ref: str
    scheme: AnnotationScheme
    value: Value
    annotator: AnnotatorId = GOLD_STANDARD

    @property
    def key(self) -> Tuple[str, str, str]:
        return (self.message_ref, self.scheme.name, self.annotator.name)


@dataclass(frozen=True)
class PersonFacts:
    gender: Optional[str] = None
    birth_year: Optional[int] = None
    country_of_citizenship: Optional[Iri] = None
    place_of_birth: Optional[Iri] = None
    occupation: Optional[Iri] = None
    political_party: Optional[Iri] = None

    def is_empty(self) -> bool:
        return all(getattr(self, name) is None for name in _FACT_FIELDS)


_FACT_FIELDS = (
    "gender",
    "birth_year",
    "country_of_citizenship",
    "place_of_birth",
    "occupation",
    "political_party",
)


@dataclass(frozen=True)
class Person:
    id: str
    handle: Optional[str] = None
    facts: Optional[PersonFacts] = None
    platform_id: Optional[int] = None

    @property
    def iri(self) -> Iri:
        return person_iri(self.id)


class Role(enum.Enum):
    Addresser = "Addresser"
    Addressee = "Addressee"
    Target = "Target"
    Annotator = "Annotator"
    HateSpeechMessage = "HateSpeechMessage"

    @property
    def iri(self) -> Iri:
        return Iri(ODANG + self.value)

    @property
    def for_messages(self) -> bool:
        return self is Role.HateSpeechMessage


@dataclass(frozen=True)
class Participant:
    entity: Union[Message, Person]
    role: Role
    target: Optional[str] = None  # id of a person participant


@dataclass(frozen=True)
class Situation:
    id: str
    participants: Tuple[Participant, ...] = ()

    @property
    def iri(self) -> Iri:
        return mint_iri("odang", self.id)


def message_iri(message_id: str) -> Iri:
    return mint_iri("odang", f"message_{message_id}")


def person_iri(person_id: str) -> Iri:
    return mint_iri("odang", person_id)


@lru_cache(maxsize=4096)
def corpus_iri(corpus_id: str) -> Iri:
    return mint_iri("odang", f"corpus_{corpus_id}")


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    field: str
    rule: str

    def __str__(self) -> str:
        return f"{self.field}: {self.rule}"


_IRI_SCHEME = re.compile(r"[A-Za-z][A-Za-z0-9+.\-]*:")
_LANG_TAG = re.compile(r"[A-Za-z]{1,8}(-[A-Za-z0-9]{1,8})*\Z")
_INTEGER = re.compile(r"[+-]?[0-9]+\Z")
_HAS_BAD_CHAR = re.compile(r"[\x00-\x20\x7f<>\"{}|^`\\]")


@singledispatch
def validate(entity) -> List[Violation]:
    """Check every invariant of ``entity``; an empty list means valid.

    Never raises. Sequences of :class:`AnnotationRecord` are additionally
    checked for duplicate ``(message, scheme, annotator)`` judgments.
    """
    return [Violation(type(entity).__name__, "not a model type")]


@validate.register
def _(entity: Iri) -> List[Violation]:
    out = []
    v = entity.value
    if not isinstance(v, str) or not v:
        return [Violation("value", "IRI must be a non-empty string")]
    if "://" not in v and not (v.startswith("urn:") and v.count(":") >= 2):
        out.append(Violation("value", "IRI must be absolute (scheme://... or urn:nid:...)"))
    elif not _IRI_SCHEME.match(v):
        out.append(Violation("value", "IRI scheme is malformed"))
    if _HAS_BAD_CHAR.search(v):
        out.append(Violation("value", "IRI contains whitespace, control or forbidden characters"))
    return out


@validate.register
def _(entity: BlankNode) -> List[Violation]:
    if not entity.label or re.search(r"\s", entity.label):
        return [Violation("label", "blank node label must be non-empty without whitespace")]
    return []


@validate.register
def _(entity: Literal) -> List[Violation]:
    out = [Violation("datatype." + v.field, v.rule) for v in validate(entity.datatype)]
    if entity.lang is not None:
        if entity.datatype != LANG_STRING:
            out.append(Violation("lang", "language tag requires the rdf:langString datatype"))
        if not _LANG_TAG.match(entity.lang):
            out.append(Violation("lang", "malformed language tag"))
    elif entity.datatype == LANG_STRING:
        out.append(Violation("lang", "rdf:langString literal without language tag"))
    if entity.is_integer and not _INTEGER.match(entity.lexical):
        out.append(Violation("lexical", "integer literal does not parse as an integer"))
    return out


@validate.register
def _(entity: Triple) -> List[Violation]:
    out = []
    if not isinstance(entity.subject, (Iri, BlankNode)):
        out.append(Violation("subject", "subject must be an IRI or blank node"))
    else:
        out += [Violation("subject." + v.field, v.rule) for v in validate(entity.subject)]
    if not isinstance(entity.predicate, Iri):
        out.append(Violation("predicate", "predicate must be an IRI"))
    else:
        out += [Violation("predicate." + v.field, v.rule) for v in validate(entity.predicate)]
    if not isinstance(entity.object, (Iri, BlankNode, Literal)):
        out.append(Violation("object", "object must be an RDF term"))
    else:
        out += [Violation("object." + v.field, v.rule) for v in validate(entity.object)]
    return out


@validate.register
def _(entity: Message) -> List[Violation]:
    out = []
    if not entity.id:
        out.append(Violation("id", "message id must be non-empty"))
    if not entity.text:
        out.append(Violation("text", "message text must be non-empty"))
    if not isinstance(entity.genre, Genre):
        out.append(Violation("genre", f"unknown genre {entity.genre!r}"))
    if not entity.corpus_ids:
        out.append(Violation("corpus_ids", "message must belong to at least one corpus"))
    return out


@validate.register
def _(entity: AnnotationScheme) -> List[Violation]:
    out = []
    if not entity.name or not entity.name.strip():
        out.append(Violation("name", "scheme name must be non-empty"))
    d = entity.domain
    if isinstance(d, Categorical):
        if not d.labels:
            out.append(Violation("domain", "categorical label set is empty"))
        if len(set(d.labels)) != len(d.labels):
            out.append(Violation("domain", "categorical labels contain duplicates"))
        if any(not isinstance(label, str) or not label for label in d.labels):
            out.append(Violation("domain", "categorical labels must be non-empty strings"))
    elif isinstance(d, IntegerScale):
        if not d.min < d.max:
            out.append(Violation("domain", "integer scale requires min < max"))
    elif not isinstance(d, Binary):
        out.append(Violation("domain", f"unknown value domain {d!r}"))
    return out


@validate.register
def _(entity: AnnotatorId) -> List[Violation]:
    if entity.is_gold or _ANNOTATOR_RE.match(entity.name or ""):
        return []
    return [Violation("annotator", "individual annotator ids must match annotator_<n>")]


@validate.register
def _(entity: AnnotationRecord) -> List[Violation]:
    out = []
    if not entity.message_ref:
        out.append(Violation("message_ref", "record must reference a message"))
    out += [Violation("scheme." + v.field, v.rule) for v in validate(entity.scheme)]
    if not entity.scheme.domain.contains(entity.value):
        out.append(Violation("value", f"value {entity.value!r} out of domain for scheme {entity.scheme.name!r}"))
    out += validate(entity.annotator)
    return out


@validate.register
def _(entity: PersonFacts) -> List[Violation]:
    out = []
    if entity.birth_year is not None:
        this_year = datetime.date.today().year
        if type(entity.birth_year) is not int or not 1850 <= entity.birth_year <= this_year:
            out.append(Violation("birth_year", f"birth year must lie in [1850, {this_year}]"))
    for name in ("country_of_citizenship", "place_of_birth", "occupation", "political_party"):
        value = getattr(entity, name)
        if value is not None:
            if not isinstance(value, Iri):
                out.append(Violation(name, "must be an IRI"))
            else:
                out += [Violation(f"{name}.{v.field}", v.rule) for v in validate(value)]
    return out


@validate.register
def _(entity: Person) -> List[Violation]:
    out = []
    if not entity.id:
        out.append(Violation("id", "person id must be non-empty"))
    if entity.handle is not None and not entity.handle.startswith("@"):
        out.append(Violation("handle", "handle must begin with '@'"))
    if entity.facts is not None:
        out += [Violation("facts." + v.field, v.rule) for v in validate(entity.facts)]
    return out


@validate.register
def _(entity: Situation) -> List[Violation]:
    out = []
    if not entity.id:
        out.append(Violation("id", "situation id must be non-empty"))
    if not any(isinstance(p.entity, Message) for p in entity.participants):
        out.append(Violation("participants", "situation needs at least one message participant"))
    person_ids = {p.entity.id for p in entity.participants if isinstance(p.entity, Person)}
    for i, p in enumerate(entity.participants):
        is_message = isinstance(p.entity, Message)
        if p.role.for_messages and not is_message:
            out.append(Violation(f"participants[{i}].role", f"{p.role.value} attaches only to messages"))
        if not p.role.for_messages and is_message:
            out.append(Violation(f"participants[{i}].role", f"{p.role.value} attaches only to agents"))
        if p.target is not None and p.target not in person_ids:
            out.append(Violation(f"participants[{i}].target", f"target {p.target!r} is not a participant"))
        out += [Violation(f"participants[{i}].{v.field}", v.rule) for v in validate(p.entity)]
    return out


def _validate_sequence(entities) -> List[Violation]:
    out = []
    seen: Set[Tuple[str, str, str]] = set()
    for i, e in enumerate(entities):
        out += [Violation(f"[{i}].{v.field}", v.rule) for v in validate(e)]
        if isinstance(e, AnnotationRecord):
            if e.key in seen:
                out.append(Violation(f"[{i}]", f"duplicate judgment for {e.key}"))
            seen.add(e.key)
    return out


validate.register(list, _validate_sequence)
validate.register(tuple, _validate_sequence)


# ---------------------------------------------------------------------------
# Encoding
# ---------------------------------------------------------------------------


def encode_scheme(scheme: AnnotationScheme) -> Set[Triple]:
    """Declare an annotation scheme as a ``dul:Description`` subclass."""
    cls = scheme.class_iri
    return {
        Triple(cls, V.RDFS_SUBCLASS_OF, V.DUL_DESCRIPTION),
        Triple(cls, V.RDFS_LABEL, Literal(scheme.name)),
    }


def description_iri(record: AnnotationRecord) -> Iri:
    return skolem_iri("description", *record.key)


def encode_message(message: Message, records: Iterable[AnnotationRecord] = ()) -> Set[Triple]:
    """Encode a message and each of its annotation records.

    One description node is emitted per record; records are never merged.
    """
    m = message.iri
    out = {
        Triple(m, V.RDF_TYPE, V.FRBR_EXPRESSION),
        Triple(m, V.RDF_TYPE, message.genre.iri),
        Triple(m, V.HAS_TEXT, Literal(message.text)),
    }
    for corpus in message.corpus_ids:
        out.add(Triple(m, V.DUL_IS_PART_OF, corpus_iri(corpus)))
    for rec in records:
        if rec.message_ref != message.id:
            raise DanglingRecord(f"record for message {rec.message_ref!r} passed with message {message.id!r}")
        d = description_iri(rec)
        out.add(Triple(m, V.IS_DESCRIBED, d))
        out.add(Triple(d, V.RDF_TYPE, rec.scheme.class_iri))
        out.add(Triple(d, V.HAS_VALUE, rec.scheme.encode_value(rec.value)))
        out.add(Triple(d, V.PROV_WAS_ATTRIBUTED_TO, rec.annotator.iri))
    return out


# The entity-linking profile names citizenship `countryOfCitizenship`; inside a
# situation the same fact is written `citizenship`.
_LINKING_PREDICATES = {
    "gender": V.GENDER,
    "birth_year": V.BIRTH_YEAR,
    "country_of_citizenship": V.COUNTRY_OF_CITIZENSHIP,
    "place_of_birth": V.PLACE_OF_BIRTH,
    "occupation": V.OCCUPATION,
    "political_party": V.POLITICAL_PARTY,
}
_SITUATION_PREDICATES = {**_LINKING_PREDICATES, "country_of_citizenship": V.CITIZENSHIP}


def _person_triples(person: Person, predicates) -> Set[Triple]:
    node = person.iri
    out = {Triple(node, V.RDF_TYPE, V.PERSON)}
    if person.platform_id is not None:
        out.add(Triple(node, V.HAS_ID, integer(person.platform_id)))
    if person.handle is not None:
        out.add(Triple(node, V.HANDLE, Literal(person.handle)))
    facts = person.facts
    if facts is None:
        return out
    for name in _FACT_FIELDS:
        value = getattr(facts, name)
        if value is None:
            continue
        if name == "gender":
            value = mint_iri("odang", value)
        elif name == "birth_year":
            value = integer(value)
        out.add(Triple(node, predicates[name], value))
    return out


def encode_person(person: Person) -> Set[Triple]:
    """Typing triple plus one triple per present identifier or fact."""
    return _person_triples(person, _LINKING_PREDICATES)


def encode_situation(situation: Situation) -> Set[Triple]:
    problems = validate(situation)
    if problems:
        raise InvalidSituation("; ".join(map(str, problems)))
    s = situation.iri
    out = {Triple(s, V.RDF_TYPE, V.SITUATION)}
    for p in situation.participants:
        node = p.entity.iri
        out.add(Triple(s, V.IS_SETTING_FOR, node))
        out.add(Triple(node, V.HAS_ROLE, p.role.iri))
        if p.target is not None:
            out.add(Triple(node, V.HAS_TARGET, person_iri(p.target)))
        if isinstance(p.entity, Message):
            out.add(Triple(node, V.RDF_TYPE, p.entity.genre.iri))
            out.add(Triple(node, V.HAS_TEXT, Literal(p.entity.text)))
        else:
            out |= _person_triples(p.entity, _SITUATION_PREDICATES)
    return out


def role_typing_violations(triples: Collection[Triple]) -> List[Triple]:
    """Scan a graph for role assignments that contradict node kinds.

    Messages are nodes with ``:hasText``; agents are ``:Person`` nodes.
    """
    messages = {t.subject for t in triples if t.predicate == V.HAS_TEXT}
    agents = {t.subject for t in triples if t.predicate == V.RDF_TYPE and t.object == V.PERSON}
    bad = []
    for t in triples:
        if t.predicate != V.HAS_ROLE:
            continue
        if t.object == Role.HateSpeechMessage.iri and t.subject in agents:
            bad.append(t)
        elif t.object != Role.HateSpeechMessage.iri and t.subject in messages:
            bad.append(t)
    return bad
