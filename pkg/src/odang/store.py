"""In-memory triple store with SPO/POS/OSP indexes and a basic-graph-pattern engine.

Terms are interned to dense integer ids. Each index is a two-level dict of
sets keyed by ids, so any combination of bound positions resolves to a
direct lookup. Queries run an index-backed nested-loop join over conjuncts
ordered by ascending candidate count.
"""
from __future__ import annotations

import operator
import re
import threading
from collections import defaultdict
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Set, Tuple, Union

from odang.errors import PatternError, UnboundFilterVariable
from odang.namespaces import DEFAULT_PREFIXES, PrefixMap
from odang.rdf.turtle import RDF_TYPE, parse_term
from odang.rdf.ntriples import iter_ntriples, serialize_ntriples
from odang.terms import Iri, Literal, Term, Triple


@dataclass(frozen=True, order=True)
class Var:
    name: str

    def __str__(self) -> str:
        return f"?{self.name}"


PatternTerm = Union[Var, Term]

COMPARATORS = {
    "=": operator.eq,
    "!=": operator.ne,
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}
NUMERIC = frozenset({"<", "<=", ">", ">="})


@dataclass(frozen=True)
class Filter:
    var: Var
    op: str
    value: Term

    def test(self, term: Term) -> bool:
        if self.op in NUMERIC:
            if not (isinstance(term, Literal) and term.is_integer):
                return False
            try:
                return COMPARATORS[self.op](int(term.lexical), int(self.value.lexical))
            except ValueError:
                return False
        return COMPARATORS[self.op](term, self.value)


@dataclass(frozen=True)
class Pattern:
    conjuncts: Tuple[Tuple[PatternTerm, PatternTerm, PatternTerm], ...]
    filters: Tuple[Filter, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "conjuncts", tuple(tuple(c) for c in self.conjuncts))
        object.__setattr__(self, "filters", tuple(self.filters))

    @property
    def variables(self) -> List[str]:
        return sorted({t.name for c in self.conjuncts for t in c if isinstance(t, Var)})

    def check(self) -> None:
        """Raise if a filter names an unbound variable or misuses a numeric comparator."""
        names = set(self.variables)
        for f in self.filters:
            if f.var.name not in names:
                raise UnboundFilterVariable(f"filter variable ?{f.var.name} does not occur in any conjunct")
            if f.op not in COMPARATORS:
                raise PatternError(f"unknown comparator {f.op!r}")
            if f.op in NUMERIC and not (isinstance(f.value, Literal) and f.value.is_integer):
                raise PatternError(f"comparator {f.op} needs an integer literal, got {f.value!r}")
        for c in self.conjuncts:
            if len(c) != 3:
                raise PatternError(f"conjunct must have three positions: {c!r}")


Solution = Dict[str, Term]


class _RWLock:
    """Many readers or one writer."""

    def __init__(self):
        self._cond = threading.Condition()
        self._readers = 0
        self._writer = False

    @contextmanager
    def read(self):
        with self._cond:
            while self._writer:
                self._cond.wait()
            self._readers += 1
        try:
            yield
        finally:
            with self._cond:
                self._readers -= 1
                if not self._readers:
                    self._cond.notify_all()

    @contextmanager
    def write(self):
        with self._cond:
            while self._writer or self._readers:
                self._cond.wait()
            self._writer = True
        try:
            yield
        finally:
            with self._cond:
                self._writer = False
                self._cond.notify_all()


def _nested():
    return defaultdict(set)


class TripleStore:
    def __init__(self, triples: Iterable[Triple] = ()):
        self._ids: Dict[Term, int] = {}
        self._terms: List[Term] = []
        self._spo: Dict[int, Dict[int, Set[int]]] = defaultdict(_nested)
        self._pos: Dict[int, Dict[int, Set[int]]] = defaultdict(_nested)
        self._osp: Dict[int, Dict[int, Set[int]]] = defaultdict(_nested)
        self._count_s: Dict[int, int] = defaultdict(int)
        self._count_p: Dict[int, int] = defaultdict(int)
        self._count_o: Dict[int, int] = defaultdict(int)
        self._size = 0
        self._lock = _RWLock()
        if triples:
            self.insert(triples)

    # -- terms -----------------------------------------------------------
    def _intern(self, term: Term) -> int:
        i = self._ids.get(term)
        if i is None:
            i = self._ids[term] = len(self._terms)
            self._terms.append(term)
        return i

    def term_id(self, term: Term) -> Optional[int]:
        return self._ids.get(term)

    def term(self, i: int) -> Term:
        return self._terms[i]

    # -- mutation --------------------------------------------------------
    def insert(self, triples: Iterable[Triple]) -> int:
        """Add triples with set semantics; returns how many were new."""
        added = 0
        intern = self._intern
        with self._lock.write():
            for s, p, o in triples:
                si, pi, oi = intern(s), intern(p), intern(o)
                objs = self._spo[si][pi]
                if oi in objs:
                    continue
                objs.add(oi)
                self._pos[pi][oi].add(si)
                self._osp[oi][si].add(pi)
                self._count_s[si] += 1
                self._count_p[pi] += 1
                self._count_o[oi] += 1
                added += 1
            self._size += added
        return added

    # -- inspection ------------------------------------------------------
    def __len__(self) -> int:
        return self._size

    def __contains__(self, t: Triple) -> bool:
        ids = [self._ids.get(x) for x in t]
        if None in ids:
            return False
        s, p, o = ids
        with self._lock.read():
            return o in self._spo.get(s, {}).get(p, ())

    def __iter__(self) -> Iterator[Triple]:
        return iter(self.triples())

    def index_sizes(self) -> Tuple[int, int, int]:
        with self._lock.read():
            return tuple(
                sum(len(leaf) for inner in idx.values() for leaf in inner.values())
                for idx in (self._spo, self._pos, self._osp)
            )

    def triples(self, s: Optional[Term] = None, p: Optional[Term] = None, o: Optional[Term] = None) -> List[Triple]:
        """All triples matching the given constants (``None`` is a wildcard)."""
        ids = []
        for t in (s, p, o):
            if t is None:
                ids.append(None)
            else:
                i = self._ids.get(t)
                if i is None:
                    return []
                ids.append(i)
        T = self._terms
        with self._lock.read():
            return [Triple(T[a], T[b], T[c]) for a, b, c in self._match(*ids)]

    def _match(self, s: Optional[int], p: Optional[int], o: Optional[int]) -> Iterator[Tuple[int, int, int]]:
        spo, pos, osp = self._spo, self._pos, self._osp
        if s is not None:
            by_p = spo.get(s)
            if not by_p:
                return
            if p is not None:
                objs = by_p.get(p, ())
                if o is not None:
                    if o in objs:
                        yield s, p, o
                else:
                    for oo in objs:
                        yield s, p, oo
            elif o is not None:
                for pp in osp.get(o, {}).get(s, ()):
                    yield s, pp, o
            else:
                for pp, objs in by_p.items():
                    for oo in objs:
                        yield s, pp, oo
        elif p is not None:
            by_o = pos.get(p)
            if not by_o:
                return
            if o is not None:
                for ss in by_o.get(o, ()):
                    yield ss, p, o
            else:
                for oo, subs in by_o.items():
                    for ss in subs:
                        yield ss, p, oo
        elif o is not None:
            for ss, preds in osp.get(o, {}).items():
                for pp in preds:
                    yield ss, pp, o
        else:
            for ss, by_p in spo.items():
                for pp, objs in by_p.items():
                    for oo in objs:
                        yield ss, pp, oo

    def _estimate(self, s: Optional[int], p: Optional[int], o: Optional[int]) -> int:
        if s is not None and p is not None:
            n = len(self._spo.get(s, {}).get(p, ()))
            return min(n, 1) if o is not None else n
        if p is not None and o is not None:
            return len(self._pos.get(p, {}).get(o, ()))
        if s is not None and o is not None:
            return len(self._osp.get(o, {}).get(s, ()))
        if s is not None:
            return self._count_s.get(s, 0)
        if p is not None:
            return self._count_p.get(p, 0)
        if o is not None:
            return self._count_o.get(o, 0)
        return self._size

    # -- querying --------------------------------------------------------
    def query(self, pattern: Pattern, order: Optional[Sequence[int]] = None) -> List[Solution]:
        """Evaluate a basic graph pattern.

        Returns distinct solutions sorted by the interned ids of their
        bindings (variables taken in name order). ``order`` forces a conjunct
        evaluation order; by default conjuncts run by ascending candidate count.
        """
        pattern.check()
        with self._lock.read():
            rows = self._solve(pattern, order)
        names = pattern.variables
        T = self._terms
        return [{n: T[i] for n, i in zip(names, row)} for row in rows]

    def _solve(self, pattern: Pattern, order: Optional[Sequence[int]]) -> List[Tuple[int, ...]]:
        if not pattern.conjuncts:
            return []
        compiled = []
        for conj in pattern.conjuncts:
            slots = []
            for t in conj:
                if isinstance(t, Var):
                    slots.append(t.name)
                else:
                    i = self._ids.get(t)
                    if i is None:
                        return []
                    slots.append(i)
            compiled.append(tuple(slots))

        if order is None:
            def cost(k: int) -> Tuple[int, int]:
                s, p, o = (x if isinstance(x, int) else None for x in compiled[k])
                return self._estimate(s, p, o), k

            order = sorted(range(len(compiled)), key=cost)
        plan = [compiled[k] for k in order]

        filters: Dict[str, List[Filter]] = defaultdict(list)
        for f in pattern.filters:
            filters[f.var.name].append(f)
        T = self._terms
        names = pattern.variables
        results: Set[Tuple[int, ...]] = set()
        binding: Dict[str, int] = {}

        def passes(name: str, value: int) -> bool:
            return all(f.test(T[value]) for f in filters.get(name, ()))

        def step(depth: int) -> None:
            if depth == len(plan):
                results.add(tuple(binding[n] for n in names))
                return
            slots = plan[depth]
            lookup = [
                x if isinstance(x, int) else binding.get(x)
                for x in slots
            ]
            for triple in self._match(*lookup):
                newly = []
                ok = True
                for x, value in zip(slots, triple):
                    if isinstance(x, int):
                        continue
                    bound = binding.get(x)
                    if bound is None:
                        if not passes(x, value):
                            ok = False
                            break
                        binding[x] = value
                        newly.append(x)
                    elif bound != value:
                        ok = False
                        break
                if ok:
                    step(depth + 1)
                for x in newly:
                    del binding[x]

        step(0)
        return sorted(results)

    def export_subgraph(self, pattern: Pattern, projection: Iterable[str]) -> Set[Triple]:
        """Every triple touching (as subject or object) a term bound to a projected variable."""
        projection = [p.lstrip("?") for p in projection]
        unknown = set(projection) - set(pattern.variables)
        if unknown:
            raise PatternError(f"projection variables not in pattern: {sorted(unknown)}")
        pattern.check()
        with self._lock.read():
            rows = self._solve(pattern, None)
            idx = [pattern.variables.index(p) for p in projection]
            nodes = {row[k] for row in rows for k in idx}
            T = self._terms
            out: Set[Triple] = set()
            for n in nodes:
                for s, p, o in self._match(n, None, None):
                    out.add(Triple(T[s], T[p], T[o]))
                for s, p, o in self._match(None, None, n):
                    out.add(Triple(T[s], T[p], T[o]))
        return out

    # -- persistence -----------------------------------------------------
    def to_ntriples(self) -> str:
        return serialize_ntriples(self.triples())

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_ntriples(), encoding="utf-8", newline="\n")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "TripleStore":
        store = cls()
        with open(path, encoding="utf-8", newline="") as fh:
            store.insert(iter_ntriples(fh))
        return store


# ---------------------------------------------------------------------------
# Pattern files
# ---------------------------------------------------------------------------

_PIECE = re.compile(
    r"""\?\w+
      | <[^>\s]*>
      | "(?:[^"\\]|\\.)*"(?:@[A-Za-z0-9\-]+|\^\^(?:<[^>\s]*>|[^\s]+))?
      | \S+""",
    re.VERBOSE,
)
_FILTER = re.compile(r"FILTER\s+\?(\w+)\s*(<=|>=|!=|=|<|>|≠|≤|≥)\s*(.+?)\s*\Z")
_OP_ALIASES = {"≠": "!=", "≤": "<=", "≥": ">="}
_PREFIX_LINE = re.compile(r"@prefix\s+([^\s:]*):\s*<([^>]*)>\s*\.?\s*\Z")


def parse_pattern(text: str, prefixes: PrefixMap = DEFAULT_PREFIXES) -> Pattern:
    """Parse the line-oriented pattern-file grammar (see docs/pattern-grammar.md)."""
    conjuncts = []
    filters = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _PREFIX_LINE.match(line)
        if m:
            prefixes = prefixes.bind(m.group(1), m.group(2))
            continue
        m = _FILTER.match(line)
        if m:
            op = _OP_ALIASES.get(m.group(2), m.group(2))
            filters.append(Filter(Var(m.group(1)), op, _term(m.group(3), prefixes, lineno)))
            continue
        if line.startswith("FILTER"):
            raise PatternError(f"line {lineno}: malformed FILTER")
        pieces = _PIECE.findall(line)
        if pieces and pieces[-1] == ".":
            pieces.pop()
        if len(pieces) != 3:
            raise PatternError(f"line {lineno}: a conjunct needs exactly three terms, found {len(pieces)}")
        conj = []
        for k, piece in enumerate(pieces):
            if piece.startswith("?"):
                conj.append(Var(piece[1:]))
            elif piece == "a" and k == 1:
                conj.append(RDF_TYPE)
            else:
                conj.append(_term(piece, prefixes, lineno))
        conjuncts.append(tuple(conj))
    pattern = Pattern(tuple(conjuncts), tuple(filters))
    pattern.check()
    return pattern


def _term(text: str, prefixes: PrefixMap, lineno: int) -> Term:
    try:
        return parse_term(text, prefixes)
    except ValueError as exc:
        raise PatternError(f"line {lineno}: bad term {text!r}: {exc}") from None
