"""Canonical N-Triples serialization and a line-oriented parser."""
from __future__ import annotations

import re
from typing import Iterable, Iterator, Set, TextIO

from odang.errors import ParseError
from odang.terms import LANG_STRING, XSD_STRING, BlankNode, Iri, Literal, Term, Triple

# ECHAR for the named escapes, UCHAR for remaining C0 controls and DEL.
_LITERAL_ESCAPES = {
    "\b": "\\b",
    "\t": "\\t",
    "\n": "\\n",
    "\f": "\\f",
    "\r": "\\r",
    '"': '\\"',
    "\\": "\\\\",
}
for _c in list(range(0x20)) + [0x7F]:
    _LITERAL_ESCAPES.setdefault(chr(_c), f"\\u{_c:04X}")
_LITERAL_TABLE = str.maketrans(_LITERAL_ESCAPES)
_NEEDS_LITERAL_ESCAPE = re.compile(r'[\x00-\x1f\x7f"\\]')

_IRI_TABLE = str.maketrans({c: f"\\u{ord(c):04X}" for c in '<>"{}|^`\\' + "".join(map(chr, range(0x21)))})
_NEEDS_IRI_ESCAPE = re.compile(r'[\x00-\x20<>"{}|^`\\]')


def escape_literal(text: str) -> str:
    if _NEEDS_LITERAL_ESCAPE.search(text):
        return text.translate(_LITERAL_TABLE)
    return text


def escape_iri(text: str) -> str:
    if _NEEDS_IRI_ESCAPE.search(text):
        return text.translate(_IRI_TABLE)
    return text


def term_to_nt(term: Term) -> str:
    if type(term) is Iri:
        return f"<{escape_iri(term.value)}>"
    if type(term) is Literal:
        body = f'"{escape_literal(term.lexical)}"'
        if term.lang is not None:
            return f"{body}@{term.lang}"
        if term.datatype == XSD_STRING:
            return body
        return f"{body}^^<{escape_iri(term.datatype.value)}>"
    if type(term) is BlankNode:
        return f"_:{term.label}"
    raise TypeError(f"not an RDF term: {term!r}")


def triple_to_nt(t: Triple) -> str:
    return f"{term_to_nt(t.subject)} {term_to_nt(t.predicate)} {term_to_nt(t.object)} .\n"


def serialize_ntriples(triples: Iterable[Triple]) -> str:
    """Canonical N-Triples: one line per distinct triple, sorted by serialized terms."""
    cache: dict = {}

    def nt(term):
        s = cache.get(term)
        if s is None:
            s = cache[term] = term_to_nt(term)
        return s

    rows = sorted({(nt(s), nt(p), nt(o)) for s, p, o in triples})
    return "".join(f"{s} {p} {o} .\n" for s, p, o in rows)


def write_ntriples(triples: Iterable[Triple], fh: TextIO) -> None:
    fh.write(serialize_ntriples(triples))


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_UCHAR = r"\\u[0-9A-Fa-f]{4}|\\U[0-9A-Fa-f]{8}"
_IRIREF = rf'<((?:[^\x00-\x20<>"{{}}|^`\\]|{_UCHAR})*)>'
_BNODE = r"_:([A-Za-z0-9_À-￿](?:[\w.\-·]*[\w\-·])?)"
_LITERAL = r'"((?:[^"\\\n\r]|\\.)*)"(?:@([A-Za-z]+(?:-[A-Za-z0-9]+)*)|\^\^' + _IRIREF + ")?"

_WS = re.compile(r"[ \t]*")
_SUBJECT = re.compile(f"{_IRIREF}|{_BNODE}")
_PREDICATE = re.compile(_IRIREF)
_OBJECT = re.compile(f"{_IRIREF}|{_BNODE}|{_LITERAL}")
_END = re.compile(r"[ \t]*\.[ \t]*(?:#.*)?\Z")
_ESCAPE = re.compile(r"\\(?:u([0-9A-Fa-f]{4})|U([0-9A-Fa-f]{8})|(.))", re.DOTALL)
_ECHAR = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}


def _unescape(text: str, line: int, column: int, allow_echar: bool) -> str:
    if "\\" not in text:
        return text

    def repl(m: re.Match) -> str:
        hex_ = m.group(1) or m.group(2)
        if hex_:
            cp = int(hex_, 16)
            if cp > 0x10FFFF or 0xD800 <= cp <= 0xDFFF:
                raise ParseError(line, column + m.start(), f"invalid code point U+{cp:X}")
            return chr(cp)
        ch = m.group(3)
        if allow_echar and ch in _ECHAR:
            return _ECHAR[ch]
        raise ParseError(line, column + m.start(), f"invalid escape \\{ch}")

    return _ESCAPE.sub(repl, text)


def _parse_line(text: str, lineno: int):
    pos = _WS.match(text).end()
    if pos == len(text) or text[pos] == "#":
        return None

    m = _SUBJECT.match(text, pos)
    if not m:
        raise ParseError(lineno, pos + 1, "expected IRI or blank node as subject")
    if m.group(1) is not None:
        subject = Iri(_unescape(m.group(1), lineno, pos + 2, False))
    else:
        subject = BlankNode(m.group(2))
    pos = _WS.match(text, m.end()).end()

    m = _PREDICATE.match(text, pos)
    if not m:
        raise ParseError(lineno, pos + 1, "expected IRI as predicate")
    predicate = Iri(_unescape(m.group(1), lineno, pos + 2, False))
    pos = _WS.match(text, m.end()).end()

    m = _OBJECT.match(text, pos)
    if not m:
        raise ParseError(lineno, pos + 1, "expected IRI, blank node or literal as object")
    iri, bnode, lex, lang, dtype = m.groups()
    if iri is not None:
        obj = Iri(_unescape(iri, lineno, pos + 2, False))
    elif bnode is not None:
        obj = BlankNode(bnode)
    else:
        lexical = _unescape(lex, lineno, pos + 2, True)
        if lang is not None:
            obj = Literal(lexical, LANG_STRING, lang)
        elif dtype is not None:
            obj = Literal(lexical, Iri(_unescape(dtype, lineno, pos + 1, False)))
        else:
            obj = Literal(lexical, XSD_STRING)
    end = m.end()
    if not _END.match(text, end):
        col = _WS.match(text, end).end() + 1
        raise ParseError(lineno, col, "expected '.' terminating the triple")
    return Triple(subject, predicate, obj)


def iter_ntriples(lines: Iterable[str]) -> Iterator[Triple]:
    for lineno, raw in enumerate(lines, 1):
        t = _parse_line(raw.rstrip("\r\n"), lineno)
        if t is not None:
            yield t


def parse_ntriples(text: str) -> Set[Triple]:
    """Parse N-Triples text into a set; duplicate lines collapse.

    Raises :class:`ParseError` carrying the 1-based line and column.
    """
    return set(iter_ntriples(text.split("\n")))
