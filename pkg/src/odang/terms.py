"""RDF terms: IRIs, blank nodes, literals and triples.

Terms are small immutable value objects. Construction does not validate;
use :func:`odang.model.validate` for invariant checks so that bulk encoding
stays cheap.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

XSD = "http://www.w3.org/2001/XMLSchema#"
RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"


@dataclass(frozen=True, slots=True)
class Iri:
    value: str

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, slots=True)
class BlankNode:
    label: str

    def __str__(self) -> str:
        return f"_:{self.label}"


@dataclass(frozen=True, slots=True)
class Literal:
    lexical: str
    datatype: Iri = None  # type: ignore[assignment]
    lang: Optional[str] = None

    def __post_init__(self):
        if self.datatype is None:
            object.__setattr__(self, "datatype", LANG_STRING if self.lang else XSD_STRING)

    @property
    def is_integer(self) -> bool:
        return self.datatype == XSD_INTEGER

    def __str__(self) -> str:
        return self.lexical


XSD_STRING = Iri(XSD + "string")
XSD_INTEGER = Iri(XSD + "integer")
LANG_STRING = Iri(RDF + "langString")


def integer(value: int) -> Literal:
    return Literal(str(value), XSD_INTEGER)


Subject = Union[Iri, BlankNode]
Term = Union[Iri, BlankNode, Literal]


class Triple(NamedTuple):
    subject: Subject
    predicate: Iri
    object: Term
