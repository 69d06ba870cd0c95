"""A bounded Turtle subset.

Supported: ``@prefix`` directives, IRIs, prefixed names, ``a``, ``;`` and
``,`` lists, ``[ ... ]`` anonymous nodes, ``_:`` labels, string literals with
optional language tag or datatype, and bare integers. Anonymous nodes are
skolemized to ``<base>/.well-known/genid/b<n>``, numbered per document.
"""
from __future__ import annotations

import bisect
import re
from collections import defaultdict
from typing import Dict, Iterable, List, Optional, Set, Tuple

from odang.errors import ParseError, UnknownPrefixInDocument
from odang.namespaces import DEFAULT_PREFIXES, ODANG, PrefixMap, genid_base
from odang.rdf.ntriples import _unescape, escape_iri, escape_literal, term_to_nt
from odang.terms import LANG_STRING, XSD_INTEGER, XSD_STRING, BlankNode, Iri, Literal, Term, Triple

RDF_TYPE = Iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type")

_LOCAL_ESC_CHARS = "_~.-!$&'()*+,;=/?#@%"
_PLX = r"%[0-9A-Fa-f]{2}|\\[_~.\-!$&'()*+,;=/?#@%]"
_LOCAL_CHAR = rf"(?:[\w\-:·]|{_PLX})"
_LOCAL = rf"(?:[\w:]|{_PLX})(?:(?:{_LOCAL_CHAR}|\.)*{_LOCAL_CHAR})?"
_PREFIX = r"[^\W\d_](?:[\w\-.·]*[\w\-·])?"
_LOCAL_RE = re.compile(_LOCAL + r"\Z")

_TOKEN = re.compile(
    r"""
    (?P<ws>(?:\s+|\#[^\n]*)+)
  | (?P<iri><(?:[^\x00-\x20<>"{}|^`\\]|\\u[0-9A-Fa-f]{4}|\\U[0-9A-Fa-f]{8})*>)
  | (?P<long>\"\"\"(?:[^"\\]|\\.|"(?!""))*\"\"\"|'''(?:[^'\\]|\\.|'(?!''))*''')
    (?:@(?P<longlang>[A-Za-z]+(?:-[A-Za-z0-9]+)*))?
  | (?P<string>"(?:[^"\\\n\r]|\\.)*"|'(?:[^'\\\n\r]|\\.)*')
    (?:@(?P<lang>[A-Za-z]+(?:-[A-Za-z0-9]+)*))?
  | (?P<prefix_kw>@prefix\b)
  | (?P<bnode>_:[A-Za-z0-9_À-￿](?:[\w.\-·]*[\w\-·])?)
  | (?P<pname>(?:"""
    + _PREFIX
    + r""")?:(?:"""
    + _LOCAL
    + r""")?)
  | (?P<integer>[+-]?[0-9]+(?![\w.]*[\w]))
  | (?P<a>a(?=[\s\[\]<"';,.\#]|\Z))
  | (?P<punct>\^\^|[.;,\[\]])
    """,
    re.VERBOSE | re.DOTALL,
)


class _Token:
    __slots__ = ("kind", "text", "pos", "lang")

    def __init__(self, kind: str, text: str, pos: int, lang: Optional[str] = None):
        self.kind = kind
        self.text = text
        self.pos = pos
        self.lang = lang

    def __repr__(self) -> str:
        return f"_Token({self.kind!r}, {self.text!r})"


class _Parser:
    def __init__(self, text: str, prefixes: PrefixMap, base: str, label_prefix: str):
        self.text = text
        self.line_starts = [0] + [m.end() for m in re.finditer("\n", text)]
        self.prefixes: Dict[str, str] = dict(prefixes)
        self.genid = genid_base(base)
        self.label_prefix = label_prefix
        self.counter = 0
        self.tokens = self._tokenize()
        self.i = 0
        self.out: Set[Triple] = set()

    # -- diagnostics -----------------------------------------------------
    def where(self, pos: int) -> Tuple[int, int]:
        line = bisect.bisect_right(self.line_starts, pos)
        return line, pos - self.line_starts[line - 1] + 1

    def error(self, pos: int, reason: str, cls=ParseError) -> ParseError:
        line, col = self.where(pos)
        return cls(line, col, reason)

    def _tokenize(self) -> List[_Token]:
        toks = []
        pos, n = 0, len(self.text)
        while pos < n:
            m = _TOKEN.match(self.text, pos)
            if not m or m.end() == pos:
                raise self.error(pos, f"unexpected character {self.text[pos]!r}")
            kind = m.lastgroup
            if kind in ("lang", "longlang"):
                kind = "long" if kind == "longlang" else "string"
            if kind != "ws":
                lang = m.group("lang") or m.group("longlang")
                toks.append(_Token(kind, m.group(kind), pos, lang))
            pos = m.end()
        toks.append(_Token("eof", "", n))
        return toks

    # -- token helpers ---------------------------------------------------
    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.next()
        if tok.text != text or tok.kind not in ("punct", "prefix_kw"):
            raise self.error(tok.pos, f"expected {text!r}, found {tok.text or 'end of input'!r}")
        return tok

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind == "punct" and tok.text == text

    # -- terms -----------------------------------------------------------
    def fresh(self) -> Iri:
        iri = Iri(f"{self.genid}{self.label_prefix}{self.counter}")
        self.counter += 1
        return iri

    def iri(self, tok: _Token) -> Iri:
        line, col = self.where(tok.pos)
        if tok.kind == "iri":
            return Iri(_unescape(tok.text[1:-1], line, col + 1, False))
        label, _, local = tok.text.partition(":")
        if label not in self.prefixes:
            raise self.error(tok.pos, f"prefix {label + ':'!r} is not bound", UnknownPrefixInDocument)
        return Iri(self.prefixes[label] + re.sub(r"\\(.)", r"\1", local))

    def literal(self, tok: _Token) -> Literal:
        line, col = self.where(tok.pos)
        if tok.kind == "integer":
            return Literal(tok.text, XSD_INTEGER)
        quote = 3 if tok.kind == "long" else 1
        body = tok.text[quote : len(tok.text) - quote]
        lexical = _unescape(body, line, col + quote, True)
        if tok.lang:
            return Literal(lexical, LANG_STRING, tok.lang)
        if self.at("^^"):
            self.next()
            dt = self.next()
            if dt.kind not in ("iri", "pname"):
                raise self.error(dt.pos, "expected datatype IRI after '^^'")
            return Literal(lexical, self.iri(dt))
        return Literal(lexical, XSD_STRING)

    # -- grammar ---------------------------------------------------------
    def parse(self) -> Set[Triple]:
        while self.peek().kind != "eof":
            if self.peek().kind == "prefix_kw":
                self.directive()
            else:
                self.triples()
                self.expect(".")
        return self.out

    def directive(self) -> None:
        self.next()
        tok = self.next()
        if tok.kind != "pname" or not tok.text.endswith(":") or tok.text.count(":") != 1:
            raise self.error(tok.pos, "expected prefix label ending in ':'")
        iri_tok = self.next()
        if iri_tok.kind != "iri":
            raise self.error(iri_tok.pos, "expected namespace IRI")
        self.prefixes[tok.text[:-1]] = self.iri(iri_tok).value
        self.expect(".")

    def triples(self) -> None:
        tok = self.peek()
        if tok.kind == "punct" and tok.text == "[":
            node = self.blank_property_list()
            if not self.at("."):
                self.predicate_object_list(node)
            return
        self.predicate_object_list(self.subject())

    def subject(self) -> Term:
        tok = self.next()
        if tok.kind in ("iri", "pname"):
            return self.iri(tok)
        if tok.kind == "bnode":
            return BlankNode(tok.text[2:])
        raise self.error(tok.pos, f"expected subject, found {tok.text or 'end of input'!r}")

    def blank_property_list(self) -> Iri:
        self.expect("[")
        node = self.fresh()
        if not self.at("]"):
            self.predicate_object_list(node)
        self.expect("]")
        return node

    def verb(self) -> Iri:
        tok = self.next()
        if tok.kind == "a":
            return RDF_TYPE
        if tok.kind in ("iri", "pname"):
            return self.iri(tok)
        raise self.error(tok.pos, f"expected predicate, found {tok.text or 'end of input'!r}")

    def predicate_object_list(self, subject: Term) -> None:
        while True:
            predicate = self.verb()
            self.object_list(subject, predicate)
            if not self.at(";"):
                return
            while self.at(";"):
                self.next()
            tok = self.peek()
            if tok.kind == "punct" and tok.text in (".", "]"):
                return

    def object_list(self, subject: Term, predicate: Iri) -> None:
        self.out.add(Triple(subject, predicate, self.object()))
        while self.at(","):
            self.next()
            self.out.add(Triple(subject, predicate, self.object()))

    def object(self) -> Term:
        tok = self.peek()
        if tok.kind == "punct" and tok.text == "[":
            return self.blank_property_list()
        tok = self.next()
        if tok.kind in ("iri", "pname"):
            return self.iri(tok)
        if tok.kind == "bnode":
            return BlankNode(tok.text[2:])
        if tok.kind in ("string", "long", "integer"):
            return self.literal(tok)
        raise self.error(tok.pos, f"expected object, found {tok.text or 'end of input'!r}")


def parse_turtle_subset(
    text: str,
    prefixes: PrefixMap = DEFAULT_PREFIXES,
    *,
    base: str = ODANG,
    label_prefix: str = "b",
) -> Set[Triple]:
    """Parse Turtle-subset ``text``; ``prefixes`` are pre-bound and may be overridden."""
    return _Parser(text, prefixes, base, label_prefix).parse()


def parse_term(text: str, prefixes: PrefixMap = DEFAULT_PREFIXES) -> Term:
    """Parse a single IRI, prefixed name, blank node label or literal."""
    parser = _Parser(text, prefixes, ODANG, "b")
    term = parser.object()
    tok = parser.peek()
    if tok.kind != "eof":
        raise parser.error(tok.pos, f"unexpected trailing {tok.text!r}")
    return term


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _compress_local(local: str) -> Optional[str]:
    out = []
    i = 0
    while i < len(local):
        ch = local[i]
        if ch == "%" and re.match(r"%[0-9A-Fa-f]{2}", local[i:]):
            out.append(local[i : i + 3])
            i += 3
            continue
        if ch == "." or (ch == "-" and i == 0):
            out.append("\\" + ch)
        elif re.match(r"[\w\-:·]", ch):
            out.append(ch)
        elif ch in _LOCAL_ESC_CHARS:
            out.append("\\" + ch)
        else:
            return None
        i += 1
    result = "".join(out)
    return result if _LOCAL_RE.match(result) else None


class _Writer:
    def __init__(self, prefixes: PrefixMap):
        self.prefixes = prefixes
        self.used: Set[str] = set()

    def iri(self, iri: Iri) -> str:
        split = self.prefixes.split(iri.value)
        if split is not None:
            label, local = split
            esc = _compress_local(local)
            if esc is not None:
                self.used.add(label)
                return f"{label}:{esc}"
        return f"<{escape_iri(iri.value)}>"

    def term(self, term: Term) -> str:
        if type(term) is Iri:
            return self.iri(term)
        if type(term) is BlankNode:
            return f"_:{term.label}"
        if term.lang is not None:
            return f'"{escape_literal(term.lexical)}"@{term.lang}'
        if term.datatype == XSD_STRING:
            return f'"{escape_literal(term.lexical)}"'
        if term.datatype == XSD_INTEGER and re.fullmatch(r"[+-]?[0-9]+", term.lexical):
            return term.lexical
        return f'"{escape_literal(term.lexical)}"^^{self.iri(term.datatype)}'


def format_term(term: Term, prefixes: PrefixMap = DEFAULT_PREFIXES) -> str:
    """One term in compact Turtle form (qname when a prefix applies)."""
    return _Writer(prefixes).term(term)


def serialize_turtle(triples: Iterable[Triple], prefixes: PrefixMap = DEFAULT_PREFIXES) -> str:
    """Turtle grouped by subject with ``;`` and ``,`` lists; deterministic output."""
    w = _Writer(prefixes)
    grouped: Dict[Term, Dict[Iri, List[Term]]] = defaultdict(lambda: defaultdict(list))
    for s, p, o in set(triples):
        grouped[s][p].append(o)

    blocks = []
    for s in sorted(grouped, key=term_to_nt):
        preds = sorted(grouped[s], key=lambda p: (p != RDF_TYPE, term_to_nt(p)))
        parts = []
        for p in preds:
            verb = "a" if p == RDF_TYPE else w.iri(p)
            objs = " , ".join(w.term(o) for o in sorted(grouped[s][p], key=term_to_nt))
            parts.append(f"{verb} {objs}")
        blocks.append(w.term(s) + " " + " ;\n    ".join(parts) + " .\n")

    header = "".join(
        f"@prefix {label}: <{escape_iri(prefixes[label])}> .\n"
        for label in sorted(w.used)
    )
    if header and blocks:
        header += "\n"
    return header + "".join(blocks)
