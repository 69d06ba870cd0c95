"""Tabular corpus ingestion driven by a declarative YAML mapping.

A mapping names the id and text columns of a corpus file and binds each
annotation scheme either to one aggregated column (the ``gold_standard``
annotator) or to one column per individual annotator. See
``docs/mapping-format.md`` for the grammar.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Set, Tuple, Union
from urllib.parse import unquote

import yaml

from odang import vocab as V
from odang.errors import (
    ColumnMissing,
    DuplicateColumn,
    MappingError,
    MappingSyntaxError,
    UnknownValueDomain,
)
from odang.model import (
    GOLD_STANDARD,
    AnnotationRecord,
    AnnotationScheme,
    AnnotatorId,
    Binary,
    Categorical,
    Genre,
    IntegerScale,
    Message,
    Participant,
    Role,
    Situation,
    encode_message,
    encode_scheme,
    encode_situation,
    message_iri,
    validate,
)
from odang.namespaces import ODANG
from odang.store import Pattern, TripleStore, Var
from odang.terms import Iri, Literal, Triple, integer

logger = logging.getLogger(__name__)

DOMAIN_KIND = Iri(ODANG + "valueDomain")
SCALE_MIN = Iri(ODANG + "scaleMin")
SCALE_MAX = Iri(ODANG + "scaleMax")
ALLOWED_VALUE = Iri(ODANG + "allowedValue")


@dataclass(frozen=True)
class AggregatedColumn:
    column: str

    def columns(self) -> List[Tuple[str, AnnotatorId]]:
        return [(self.column, GOLD_STANDARD)]


@dataclass(frozen=True)
class PerAnnotatorColumns:
    annotators: Tuple[Tuple[str, AnnotatorId], ...]

    def columns(self) -> List[Tuple[str, AnnotatorId]]:
        return list(self.annotators)


@dataclass(frozen=True)
class SchemeBinding:
    scheme: AnnotationScheme
    mode: Union[AggregatedColumn, PerAnnotatorColumns]


@dataclass(frozen=True)
class SituationRule:
    """Open a situation for every message whose selected judgment equals ``value``."""

    scheme: str
    value: Union[int, str]
    annotator: AnnotatorId = GOLD_STANDARD


@dataclass(frozen=True)
class MappingSpec:
    corpus_id: str
    genre: Genre
    id_column: str
    text_column: str
    bindings: Tuple[SchemeBinding, ...] = ()
    unannotated: bool = False
    situations: Optional[SituationRule] = None

    @property
    def schemes(self) -> List[AnnotationScheme]:
        seen: Dict[str, AnnotationScheme] = {}
        for b in self.bindings:
            seen.setdefault(b.scheme.name, b.scheme)
        return list(seen.values())

    def bound_columns(self) -> List[str]:
        cols = [self.id_column, self.text_column]
        for b in self.bindings:
            cols += [c for c, _ in b.mode.columns()]
        return cols


@dataclass
class IngestReport:
    rows_read: int = 0
    messages_emitted: int = 0
    records_emitted: int = 0
    violations: List[Tuple[int, str]] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "rowsRead": self.rows_read,
            "messagesEmitted": self.messages_emitted,
            "recordsEmitted": self.records_emitted,
            "violations": [{"row": r, "reason": why} for r, why in self.violations],
        }


# ---------------------------------------------------------------------------
# Mapping documents
# ---------------------------------------------------------------------------

_TOP_KEYS = {"corpus", "genre", "id_column", "text_column", "schemes", "unannotated", "situations"}


def _parse_domain(raw, where: str):
    if raw == "binary" or raw is None:
        return Binary()
    if isinstance(raw, dict) and len(raw) == 1:
        (kind, arg), = raw.items()
        if kind == "categorical" and isinstance(arg, list):
            return Categorical(tuple(str(x) for x in arg))
        if kind == "scale" and isinstance(arg, list) and len(arg) == 2 and all(type(x) is int for x in arg):
            return IntegerScale(arg[0], arg[1])
    raise UnknownValueDomain(f"{where}: unknown value domain {raw!r}")


def parse_mapping(document: str) -> MappingSpec:
    """Parse and fully validate a YAML mapping document."""
    try:
        data = yaml.safe_load(document)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line, col = (mark.line + 1, mark.column + 1) if mark else (0, 0)
        raise MappingSyntaxError(line, col, exc.problem or str(exc)) from None
    except yaml.YAMLError as exc:
        raise MappingSyntaxError(0, 0, str(exc)) from None
    if not isinstance(data, dict):
        raise MappingError("mapping document must be a key-value mapping")

    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise MappingError(f"unknown mapping keys: {sorted(unknown)}")
    for key in ("corpus", "genre", "id_column", "text_column"):
        if not isinstance(data.get(key), (str, int)) or str(data[key]) == "":
            raise MappingError(f"mapping requires a non-empty {key!r}")
    try:
        genre = Genre(data["genre"])
    except ValueError:
        raise MappingError(f"unknown genre {data['genre']!r}; expected one of {[g.value for g in Genre]}") from None

    bindings = []
    domains: Dict[str, object] = {}
    for i, raw in enumerate(data.get("schemes") or []):
        where = f"schemes[{i}]"
        if not isinstance(raw, dict) or not raw.get("name"):
            raise MappingError(f"{where}: a scheme binding needs a name")
        extra = set(raw) - {"name", "domain", "aggregated", "annotators"}
        if extra:
            raise MappingError(f"{where}: unknown keys {sorted(extra)}")
        scheme = AnnotationScheme(str(raw["name"]), _parse_domain(raw.get("domain"), where))
        problems = validate(scheme)
        if problems:
            raise MappingError(f"{where}: " + "; ".join(map(str, problems)))
        if domains.setdefault(scheme.name, scheme.domain) != scheme.domain:
            raise MappingError(f"{where}: scheme {scheme.name!r} bound with conflicting value domains")
        has_agg, has_ann = "aggregated" in raw, "annotators" in raw
        if has_agg == has_ann:
            raise MappingError(f"{where}: give exactly one of 'aggregated' or 'annotators'")
        if has_agg:
            mode = AggregatedColumn(str(raw["aggregated"]))
        else:
            if not isinstance(raw["annotators"], dict) or not raw["annotators"]:
                raise MappingError(f"{where}: 'annotators' must map column names to annotator ids")
            pairs = []
            for col, ann in raw["annotators"].items():
                annotator = AnnotatorId(str(ann))
                if validate(annotator):
                    raise MappingError(f"{where}: annotator id {ann!r} must look like annotator_<n>")
                pairs.append((str(col), annotator))
            mode = PerAnnotatorColumns(tuple(pairs))
        bindings.append(SchemeBinding(scheme, mode))

    unannotated = bool(data.get("unannotated", False))
    if not bindings and not unannotated:
        raise MappingError("mapping binds no annotation scheme; set 'unannotated: true' for raw corpora")

    rule = None
    if data.get("situations") is not None:
        raw = data["situations"]
        if not isinstance(raw, dict) or "scheme" not in raw or "value" not in raw:
            raise MappingError("'situations' needs 'scheme' and 'value'")
        rule = SituationRule(str(raw["scheme"]), raw["value"], AnnotatorId(str(raw.get("annotator", "gold_standard"))))
        if rule.scheme not in domains:
            raise MappingError(f"'situations' refers to unbound scheme {rule.scheme!r}")

    spec = MappingSpec(
        corpus_id=str(data["corpus"]),
        genre=genre,
        id_column=str(data["id_column"]),
        text_column=str(data["text_column"]),
        bindings=tuple(bindings),
        unannotated=unannotated,
        situations=rule,
    )
    cols = spec.bound_columns()
    dupes = sorted({c for c in cols if cols.count(c) > 1})
    if dupes:
        raise DuplicateColumn(f"columns bound more than once: {dupes}")
    return spec


def load_mapping(path: Union[str, Path]) -> MappingSpec:
    return parse_mapping(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Corpus rows
# ---------------------------------------------------------------------------


def read_table(path: Union[str, Path]) -> Iterator[List[str]]:
    """Yield header then data rows of a UTF-8 CSV (or TSV for .tsv/.tab files)."""
    path = Path(path)
    delimiter = "\t" if path.suffix.lower() in (".tsv", ".tab") else ","
    with open(path, encoding="utf-8", newline="") as fh:
        yield from csv.reader(fh, delimiter=delimiter)


def _parse_value(scheme: AnnotationScheme, cell: str):
    d = scheme.domain
    if isinstance(d, Categorical):
        value = cell
    else:
        try:
            value = int(cell)
        except ValueError:
            return None
    return value if d.contains(value) else None


def ingest_corpus(rows: Iterable[Sequence[str]], spec: MappingSpec) -> Tuple[List[Message], List[AnnotationRecord], IngestReport]:
    """Turn a header-first row stream into messages and per-annotator records.

    A row with any violation is skipped whole and reported; empty annotator
    cells are simply missing judgments.
    """
    it = iter(rows)
    try:
        header = [h.strip() for h in next(it)]
    except StopIteration:
        header = []
    missing = [c for c in spec.bound_columns() if c not in header]
    if missing:
        raise ColumnMissing(f"columns {missing} absent from header {header}")
    pos = {name: k for k, name in enumerate(header)}

    cells = [(b.scheme, col, ann) for b in spec.bindings for col, ann in b.mode.columns()]
    report = IngestReport()
    messages: List[Message] = []
    records: List[AnnotationRecord] = []
    seen_ids: Set[str] = set()

    for rowno, row in enumerate(it, start=2):
        if not any(c.strip() for c in row):
            continue
        report.rows_read += 1
        if len(row) != len(header):
            report.violations.append((rowno, f"expected {len(header)} cells, found {len(row)}"))
            continue
        mid = row[pos[spec.id_column]].strip()
        text = row[pos[spec.text_column]]
        if not mid:
            report.violations.append((rowno, "empty message id"))
            continue
        if not text.strip():
            report.violations.append((rowno, f"empty text for message {mid!r}"))
            continue
        if mid in seen_ids:
            report.violations.append((rowno, f"duplicate message id {mid!r}"))
            continue

        row_records = []
        problem = None
        for scheme, col, annotator in cells:
            cell = row[pos[col]].strip()
            if not cell:
                continue
            value = _parse_value(scheme, cell)
            if value is None:
                problem = f"value {cell!r} in column {col!r} outside domain of {scheme.name!r}"
                break
            row_records.append(AnnotationRecord(mid, scheme, value, annotator))
        if problem:
            report.violations.append((rowno, problem))
            continue

        seen_ids.add(mid)
        messages.append(Message(mid, text, spec.genre, frozenset({spec.corpus_id})))
        records.extend(row_records)
        report.messages_emitted += 1
        report.records_emitted += len(row_records)

    for rowno, why in report.violations:
        logger.warning("%s row %d skipped: %s", spec.corpus_id, rowno, why)
    return messages, records, report


def build_situations(messages: Iterable[Message], records: Iterable[AnnotationRecord], rule: SituationRule) -> List[Situation]:
    flagged = {
        r.message_ref
        for r in records
        if r.scheme.name == rule.scheme and r.annotator == rule.annotator and r.value == rule.value
    }
    return [
        Situation(situation_id(m.id), (Participant(m, Role.HateSpeechMessage),))
        for m in messages
        if m.id in flagged
    ]


def situation_id(message_id: str) -> str:
    return f"situation_{message_id}"


def encode_scheme_declaration(scheme: AnnotationScheme) -> Set[Triple]:
    """Scheme class as a ``dul:Description`` subclass, with its value domain."""
    cls = scheme.class_iri
    out = encode_scheme(scheme)
    d = scheme.domain
    if isinstance(d, Binary):
        out.add(Triple(cls, DOMAIN_KIND, Literal("binary")))
    elif isinstance(d, IntegerScale):
        out |= {
            Triple(cls, DOMAIN_KIND, Literal("scale")),
            Triple(cls, SCALE_MIN, integer(d.min)),
            Triple(cls, SCALE_MAX, integer(d.max)),
        }
    else:
        out.add(Triple(cls, DOMAIN_KIND, Literal("categorical")))
        out |= {Triple(cls, ALLOWED_VALUE, Literal(label)) for label in d.labels}
    return out


def encode_corpus(spec: MappingSpec, messages: Iterable[Message], records: Iterable[AnnotationRecord]) -> Set[Triple]:
    messages = list(messages)
    by_message: Dict[str, List[AnnotationRecord]] = {m.id: [] for m in messages}
    records = list(records)
    for r in records:
        by_message[r.message_ref].append(r)
    out: Set[Triple] = set()
    for scheme in spec.schemes:
        out |= encode_scheme_declaration(scheme)
    for m in messages:
        out |= encode_message(m, by_message[m.id])
    if spec.situations is not None:
        for s in build_situations(messages, records, spec.situations):
            out |= encode_situation(s)
    return out


def ingest_file(mapping_path, corpus_path) -> Tuple[Set[Triple], IngestReport]:
    spec = load_mapping(mapping_path)
    messages, records, report = ingest_corpus(read_table(corpus_path), spec)
    return encode_corpus(spec, messages, records), report


# ---------------------------------------------------------------------------
# Reading the graph back
# ---------------------------------------------------------------------------

_MESSAGE_PREFIX = message_iri("x").value[:-1]


def message_id_from_iri(iri: Iri) -> str:
    return unquote(iri.value[len(_MESSAGE_PREFIX):])


def kg_stats(store: TripleStore) -> Tuple[int, int, int, int]:
    """(triples, messages, users, annotation records), counted by pattern queries."""
    m, u, d = Var("m"), Var("u"), Var("d")
    messages = store.query(Pattern(((m, V.RDF_TYPE, V.FRBR_EXPRESSION),)))
    users = store.query(Pattern(((u, V.RDF_TYPE, V.PERSON),)))
    described = store.query(Pattern(((m, V.RDF_TYPE, V.FRBR_EXPRESSION), (m, V.IS_DESCRIBED, d))))
    return len(store), len(messages), len(users), len({row["d"] for row in described})


def messages_from_store(store: TripleStore) -> List[Message]:
    m, text, genre = Var("m"), Var("text"), Var("genre")
    rows = store.query(Pattern(((m, V.RDF_TYPE, V.FRBR_EXPRESSION), (m, V.HAS_TEXT, text))))
    genres = {g.iri: g for g in Genre}
    out = []
    for row in rows:
        node = row["m"]
        kinds = [t.object for t in store.triples(node, V.RDF_TYPE) if t.object in genres]
        corpora = frozenset(
            unquote(t.object.value[len(ODANG + "corpus_"):])
            for t in store.triples(node, V.DUL_IS_PART_OF)
            if isinstance(t.object, Iri) and t.object.value.startswith(ODANG + "corpus_")
        )
        out.append(Message(message_id_from_iri(node), row["text"].lexical, genres[min(kinds, key=str)] if kinds else Genre.Tweet, corpora))
    return sorted(out, key=lambda msg: msg.id)


def schemes_from_store(store: TripleStore) -> Dict[Iri, AnnotationScheme]:
    out = {}
    for t in store.triples(None, V.RDFS_SUBCLASS_OF, V.DUL_DESCRIPTION):
        cls = t.subject
        labels = store.triples(cls, V.RDFS_LABEL)
        kinds = store.triples(cls, DOMAIN_KIND)
        if not labels or not kinds:
            continue
        kind = kinds[0].object.lexical
        if kind == "scale":
            domain = IntegerScale(
                int(store.triples(cls, SCALE_MIN)[0].object.lexical),
                int(store.triples(cls, SCALE_MAX)[0].object.lexical),
            )
        elif kind == "categorical":
            domain = Categorical(tuple(sorted(t.object.lexical for t in store.triples(cls, ALLOWED_VALUE))))
        else:
            domain = Binary()
        out[cls] = AnnotationScheme(labels[0].object.lexical, domain)
    return out


def records_from_store(store: TripleStore) -> List[AnnotationRecord]:
    """Decode every description node back into an :class:`AnnotationRecord`."""
    schemes = schemes_from_store(store)
    m, d, cls, v, a = Var("m"), Var("d"), Var("cls"), Var("v"), Var("a")
    rows = store.query(
        Pattern(
            (
                (m, V.IS_DESCRIBED, d),
                (d, V.RDF_TYPE, cls),
                (d, V.HAS_VALUE, v),
                (d, V.PROV_WAS_ATTRIBUTED_TO, a),
            )
        )
    )
    out = []
    for row in rows:
        scheme = schemes.get(row["cls"])
        if scheme is None:
            continue
        value = row["v"]
        if isinstance(value, Literal):
            decoded = int(value.lexical)
        else:
            decoded = unquote(value.value[len(scheme.class_iri.value) + 1:])
        annotator = AnnotatorId(unquote(row["a"].value[len(ODANG):]))
        out.append(AnnotationRecord(message_id_from_iri(row["m"]), scheme, decoded, annotator))
    return sorted(out, key=lambda r: r.key)
