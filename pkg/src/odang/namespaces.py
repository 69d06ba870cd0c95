"""Prefix bindings, IRI minting and skolem identifiers."""
from __future__ import annotations

import uuid
from typing import Dict, Iterator, Mapping, Optional, Tuple
from urllib.parse import urlsplit

from odang.errors import EmptyLocalName, UnknownPrefix
from odang.terms import Iri

ODANG = "https://w3id.org/odang#"

STANDARD_NAMESPACES: Dict[str, str] = {
    "dul": "http://www.ontologydesignpatterns.org/ont/dul/DUL.owl#",
    "prov": "http://www.w3.org/ns/prov#",
    "frbr": "http://purl.org/spar/frbr/",
    "fabio": "http://purl.org/spar/fabio/",
    "dc": "http://purl.org/dc/elements/1.1/",
    "ontolex": "http://www.w3.org/ns/lemon/ontolex#",
    "ster": "https://w3id.org/ster#",
    "rdfs": "http://www.w3.org/2000/01/rdf-schema#",
    "rdf": "http://www.w3.org/1999/02/22-rdf-syntax-ns#",
    "xsd": "http://www.w3.org/2001/XMLSchema#",
    "lexinfo": "http://www.lexinfo.net/ontology/3.0/lexinfo#",
}

# ASCII characters that may appear unescaped in an IRI fragment/path segment.
_SAFE_ASCII = frozenset(
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"
    "-._~!$&'()*+,;=:@/?"
)


class PrefixMap(Mapping[str, str]):
    """Immutable prefix label -> namespace IRI bindings.

    The empty label is the default prefix (``:local`` in Turtle) and is bound
    to the O-Dang base namespace unless overridden.
    """

    def __init__(self, bindings: Optional[Mapping[str, str]] = None):
        self._bindings: Dict[str, str] = dict(bindings or {})
        # longest namespace first so compression picks the most specific match
        self._by_length = sorted(self._bindings.items(), key=lambda kv: (-len(kv[1]), kv[0]))

    @classmethod
    def default(cls, base: str = ODANG) -> "PrefixMap":
        return cls({"": base, "odang": base, **STANDARD_NAMESPACES})

    def __getitem__(self, label: str) -> str:
        try:
            return self._bindings[label]
        except KeyError:
            raise UnknownPrefix(label) from None

    def __iter__(self) -> Iterator[str]:
        return iter(self._bindings)

    def __len__(self) -> int:
        return len(self._bindings)

    def __repr__(self) -> str:
        return f"PrefixMap({self._bindings!r})"

    def bind(self, label: str, namespace: str) -> "PrefixMap":
        return PrefixMap({**self._bindings, label: namespace})

    @property
    def base(self) -> str:
        return self._bindings.get("", ODANG)

    def term(self, label: str, local: str) -> Iri:
        return Iri(self[label] + local)

    def split(self, iri: str) -> Optional[Tuple[str, str]]:
        """Return ``(label, local)`` for the longest matching namespace."""
        for label, ns in self._by_length:
            if iri.startswith(ns) and len(iri) > len(ns):
                return label, iri[len(ns):]
        return None


DEFAULT_PREFIXES = PrefixMap.default()


def escape_local(local: str) -> str:
    out = []
    for ch in local:
        if ch in _SAFE_ASCII or (ord(ch) > 0x7F and not ch.isspace()):
            out.append(ch)
        else:
            out.append("".join(f"%{b:02X}" for b in ch.encode("utf-8")))
    return "".join(out)


def mint_iri(namespace: str, local_name: str, prefixes: PrefixMap = DEFAULT_PREFIXES) -> Iri:
    """Build the IRI for ``local_name`` under the namespace bound to ``namespace``.

    >>> mint_iri("odang", "a b")
    Iri(value='https://w3id.org/odang#a%20b')
    """
    if namespace not in prefixes:
        raise UnknownPrefix(namespace)
    if not local_name:
        raise EmptyLocalName(f"empty local name under prefix {namespace!r}")
    return Iri(prefixes[namespace] + escape_local(local_name))


def genid_base(base: str = ODANG) -> str:
    parts = urlsplit(base)
    return f"{parts.scheme}://{parts.netloc}/.well-known/genid/"


_GENID_NS = uuid.UUID("5b7a8a52-9a1e-4c1f-8f7c-3d1f0a6e2b10")


def skolem_iri(*key: object, base: str = ODANG) -> Iri:
    """Deterministic skolem IRI derived from ``key`` (uuid5)."""
    name = "\x1f".join(str(k) for k in key)
    return Iri(genid_base(base) + str(uuid.uuid5(_GENID_NS, name)))


def is_skolem(iri: Iri) -> bool:
    return "/.well-known/genid/" in iri.value
