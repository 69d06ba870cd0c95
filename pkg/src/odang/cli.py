"""Command-line entry point: ``odang <subcommand>``.

Exit status is 0 on success, 1 when the input was read but failed
validation, and 2 on I/O, usage or parse errors. Reports go to standard
error; primary outputs go to standard output unless ``-o`` is given.
"""
from __future__ import annotations

import csv
import functools
import json
import logging
import sys
from pathlib import Path
from typing import Iterable, List, Optional, Tuple

import click
import yaml

from odang import ingest as ing
from odang import lexprof as lx
from odang import stereotype as st
from odang.errors import EmptyClass, MissingClassAnnotation, OdangError
from odang.linker import LinkClients, LinkConfig, MentionMode, link_corpus
from odang.model import AnnotatorId, validate
from odang.namespaces import DEFAULT_PREFIXES
from odang.rdf.ntriples import iter_ntriples, serialize_ntriples, term_to_nt
from odang.rdf.turtle import format_term
from odang.store import TripleStore, parse_pattern

logger = logging.getLogger("odang")

EXIT_OK, EXIT_INVALID, EXIT_ERROR = 0, 1, 2

_IN_FILE = click.Path(exists=True, dir_okay=False, readable=True, path_type=Path)
_IN_DIR = click.Path(exists=True, file_okay=False, readable=True, path_type=Path)
_OUT_FILE = click.Path(dir_okay=False, writable=True, allow_dash=True, path_type=Path)


class Invalid(Exception):
    """Raised by a subcommand after writing its outputs when validation failed."""


def _guard(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            fn(*args, **kwargs)
        except Invalid as exc:
            if str(exc):
                click.echo(f"invalid: {exc}", err=True)
            sys.exit(EXIT_INVALID)
        except (OdangError, OSError, UnicodeDecodeError) as exc:
            message = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
            click.echo(f"error: {message}", err=True)
            sys.exit(EXIT_ERROR)

    return wrapper


def _write(text: str, path: Optional[Path]) -> None:
    if path is None or str(path) == "-":
        click.echo(text, nl=False)
    else:
        path.write_text(text, encoding="utf-8", newline="\n")


def _load_store(paths: Iterable[Path]) -> TripleStore:
    store = TripleStore()
    for path in paths:
        with open(path, encoding="utf-8", newline="") as fh:
            store.insert(iter_ntriples(fh))
    return store


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--config", "config_path", type=_IN_FILE, help="YAML file of per-subcommand option defaults.")
@click.option("-v", "--verbose", is_flag=True, help="Log progress to standard error.")
@click.version_option(package_name="artifact")
@click.pass_context
def main(ctx: click.Context, config_path: Optional[Path], verbose: bool) -> None:
    """Build, query and profile abusive-language corpus knowledge graphs."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if config_path is not None:
        try:
            loaded = yaml.safe_load(config_path.read_text(encoding="utf-8")) or {}
        except yaml.YAMLError as exc:
            raise click.BadParameter(str(exc), param_hint="--config") from None
        if not isinstance(loaded, dict) or not all(isinstance(v, dict) for v in loaded.values()):
            raise click.BadParameter("config must map subcommand names to option tables", param_hint="--config")
        ctx.default_map = {cmd: {k.replace("-", "_"): v for k, v in opts.items()} for cmd, opts in loaded.items()}


# ---------------------------------------------------------------------------


@main.command()
@click.argument("mapping", type=_IN_FILE)
@click.argument("corpus", type=_IN_FILE)
@click.option("-o", "--output", type=_OUT_FILE, help="Write N-Triples here instead of standard output.")
@click.option("--report", "report_path", type=_OUT_FILE, help="Also write the ingest report as one JSON line.")
@_guard
def ingest(mapping: Path, corpus: Path, output: Optional[Path], report_path: Optional[Path]) -> None:
    """Encode CORPUS (CSV/TSV) as N-Triples according to MAPPING (YAML)."""
    spec = ing.load_mapping(mapping)
    messages, records, report = ing.ingest_corpus(ing.read_table(corpus), spec)
    _write(serialize_ntriples(ing.encode_corpus(spec, messages, records)), output)
    click.echo(
        f"rows read {report.rows_read}, messages {report.messages_emitted}, "
        f"records {report.records_emitted}, violations {len(report.violations)}",
        err=True,
    )
    for row, why in report.violations:
        click.echo(f"row {row}: {why}", err=True)
    if report_path is not None:
        _write(json.dumps(report.as_dict(), ensure_ascii=False, sort_keys=True) + "\n", report_path)
    if report.violations:
        raise Invalid("")


@main.command()
@click.argument("stores", nargs=-1, required=True, type=_IN_FILE)
@click.option("--fixtures", type=_IN_DIR, help="Root of recorded client exchanges (handles/, search/, facts/).")
@click.option("--live", is_flag=True, help="Call the live services (credentials from the environment).")
@click.option("--min-score", type=click.FloatRange(min=0), default=0.0, show_default=True)
@click.option("--limit", type=click.IntRange(min=1), default=10, show_default=True, help="Candidates kept per search.")
@click.option("--mentions", type=click.Choice([m.value for m in MentionMode]), default="all", show_default=True)
@click.option("--casefold", is_flag=True, help="Compare names case-insensitively.")
@click.option("--retries", type=click.IntRange(min=0), default=0, show_default=True, help="Retries after a rate limit.")
@click.option("--exchange-log", type=_OUT_FILE, help="Append every client exchange to this JSONL file.")
@click.option("-o", "--output", type=_OUT_FILE, help="Write the new triples here instead of standard output.")
@click.option("--report", "report_path", type=_OUT_FILE, help="Also write the link report as one JSON line.")
@_guard
def link(stores, fixtures, live, min_score, limit, mentions, casefold, retries, exchange_log, output, report_path) -> None:
    """Link users mentioned in the messages of STORES; emits only new triples."""
    if live == (fixtures is not None):
        raise click.UsageError("give exactly one of --fixtures DIR or --live")
    if live:
        from odang.linker.live import live_clients

        clients = live_clients()
    else:
        clients = LinkClients.from_fixtures(fixtures)
    config = LinkConfig(min_score, limit, MentionMode(mentions), casefold, retries)
    delta, report = link_corpus(_load_store(stores), clients, config)
    _write(serialize_ntriples(delta), output)
    summary = report.as_dict()
    click.echo(" ".join(f"{k}={v}" for k, v in summary.items()), err=True)
    if report_path is not None:
        _write(json.dumps(summary, sort_keys=True) + "\n", report_path)
    if exchange_log is not None:
        clients.log.append_to(exchange_log)


def _parse_class(text: Optional[str]) -> Optional[Tuple[str, object]]:
    if text is None:
        return None
    scheme, sep, value = text.rpartition("=")
    if not sep or not scheme:
        raise click.BadParameter("expected SCHEME=VALUE", param_hint="--class")
    try:
        return scheme, int(value)
    except ValueError:
        return scheme, value


@main.command()
@click.argument("stores", nargs=-1, required=True, type=_IN_FILE)
@click.option("--lexicon", type=_IN_FILE, required=True, help="Lexicon TSV with id, pos, category, level, lemma columns.")
@click.option("--level", type=click.Choice([f.value for f in lx.LevelFilter]), default="conservative", show_default=True)
@click.option("--count-mode", type=click.Choice([m.value for m in lx.CountMode]), default="occurrences", show_default=True)
@click.option("--columns", help="Comma-separated category codes to report (default: all 17).")
@click.option("--class", "class_", help="Restrict to messages whose judgment is SCHEME=VALUE.")
@click.option("--annotator", default="gold_standard", show_default=True, help="Annotator whose judgment selects the class.")
@click.option("-o", "--output", type=_OUT_FILE, help="Write the text table here instead of standard output.")
@click.option("--jsonl", "jsonl_path", type=_OUT_FILE, help="Also write one JSON record per table row.")
@_guard
def profile(stores, lexicon, level, count_mode, columns, class_, annotator, output, jsonl_path) -> None:
    """Average lexicon category hits per document, one row per corpus in STORES."""
    cols = [c.strip().upper() for c in columns.split(",")] if columns else list(lx.CATEGORIES)
    unknown = [c for c in cols if c not in lx.CATEGORY_LABELS]
    if unknown:
        raise click.BadParameter(f"unknown categories {unknown}", param_hint="--columns")
    selector = _parse_class(class_)
    index = lx.LexiconIndex.build(lx.read_lexicon(lexicon, lx.LevelFilter(level)))
    mode = lx.CountMode(count_mode)

    store = _load_store(stores)
    messages = ing.messages_from_store(store)
    records = ing.records_from_store(store) if selector else []
    corpora = sorted({c for m in messages for c in m.corpus_ids})
    rows = []
    for corpus in corpora:
        docs = {m.id: lx.tokenize(m.text) for m in messages if corpus in m.corpus_ids}
        if selector is None:
            rows.append((corpus, lx.dataset_profile([docs[k] for k in sorted(docs)], index, mode)))
            continue
        scheme, value = selector
        try:
            prof = lx.class_conditional_profile(docs, records, scheme, value, index, AnnotatorId(annotator), mode)
        except (EmptyClass, MissingClassAnnotation) as exc:
            raise Invalid(f"{corpus}: {exc}") from None
        rows.append((f"{corpus} [{scheme}={value}]", prof))
    if not rows:
        raise Invalid("no messages found in the given stores")
    _write(lx.profile_table(rows, cols), output)
    if jsonl_path is not None:
        _write(lx.profile_jsonl(rows, cols), jsonl_path)


@main.command()
@click.argument("stores", nargs=-1, required=True, type=_IN_FILE)
@click.option("--pattern", "pattern_path", type=_IN_FILE, required=True, help="Pattern file (see docs/pattern-grammar.md).")
@click.option("--format", "fmt", type=click.Choice(["text", "jsonl"]), default="text", show_default=True)
@click.option("-o", "--output", type=_OUT_FILE)
@_guard
def query(stores, pattern_path, fmt, output) -> None:
    """Print every binding of the pattern over STORES."""
    pattern = parse_pattern(pattern_path.read_text(encoding="utf-8"))
    rows = _load_store(stores).query(pattern)
    names = pattern.variables
    if fmt == "jsonl":
        text = "".join(json.dumps({n: term_to_nt(r[n]) for n in names}, ensure_ascii=False) + "\n" for r in rows)
    else:
        lines = ["\t".join(f"?{n}" for n in names)]
        lines += ["\t".join(format_term(r[n], DEFAULT_PREFIXES) for n in names) for r in rows]
        text = "\n".join(lines) + "\n"
    _write(text, output)
    click.echo(f"{len(rows)} bindings", err=True)


@main.command()
@click.argument("stores", nargs=-1, required=True, type=_IN_FILE)
@click.option("--pattern", "pattern_path", type=_IN_FILE, required=True)
@click.option("--project", "projection", multiple=True, help="Variable to project (repeatable; default: all).")
@click.option("-o", "--output", type=_OUT_FILE)
@_guard
def export(stores, pattern_path, projection, output) -> None:
    """Write every triple touching a node bound to a projected variable."""
    pattern = parse_pattern(pattern_path.read_text(encoding="utf-8"))
    triples = _load_store(stores).export_subgraph(pattern, projection or pattern.variables)
    _write(serialize_ntriples(triples), output)
    click.echo(f"{len(triples)} triples", err=True)


@main.command()
@click.argument("stores", nargs=-1, required=True, type=_IN_FILE)
@click.option("--format", "fmt", type=click.Choice(["text", "jsonl"]), default="text", show_default=True)
@_guard
def stats(stores, fmt) -> None:
    """Print triple, message, user and annotation-record counts."""
    t, m, u, r = ing.kg_stats(_load_store(stores))
    if fmt == "jsonl":
        click.echo(json.dumps({"triples": t, "messages": m, "users": u, "records": r}))
    else:
        click.echo(f"{t} {m} {u} {r}")


@main.command()
@click.argument("lexicon_path", metavar="LEXICON", type=_IN_FILE)
@click.option("--level", type=click.Choice([f.value for f in lx.LevelFilter]), default="conservative", show_default=True)
@click.option("-o", "--output", type=_OUT_FILE)
@_guard
def lexicon(lexicon_path, level, output) -> None:
    """Encode a lexicon file as lexical entries described by category nodes."""
    entries = lx.read_lexicon(lexicon_path, lx.LevelFilter(level))
    _write(serialize_ntriples(lx.encode_lexicon(entries)), output)
    click.echo(f"{len(entries)} entries", err=True)


def _read_profiles(path: Path) -> List[st.StereotypeAnnotatorProfile]:
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh, delimiter="\t"):
            age = (row.get("age") or "").strip()
            country = (row.get("birth_country") or "").strip()
            out.append(
                st.StereotypeAnnotatorProfile(
                    AnnotatorId(row["annotator"].strip()),
                    (row.get("gender") or "").strip() or None,
                    int(age) if age else None,
                    st.ster_iri(country) if country else None,
                )
            )
    return out


@main.command()
@click.argument("annotations", type=_IN_FILE)
@click.option("--store", "store_paths", multiple=True, type=_IN_FILE, help="Store holding the annotated messages, to check chunk spans.")
@click.option("--profiles", type=_IN_FILE, help="Annotator TSV: annotator, gender, age, birth_country.")
@click.option("--privacy", type=click.Choice([p.value for p in st.Privacy]), default="withhold", show_default=True)
@click.option("--relaxed", is_flag=True, help="Do not enforce the per-round cluster caps.")
@click.option("-o", "--output", type=_OUT_FILE)
@_guard
def stereotype(annotations, store_paths, profiles, privacy, relaxed, output) -> None:
    """Encode stereotype annotations (chunks, minimum phrases, clusters)."""
    texts = None
    if store_paths:
        texts = {m.id: m.text for m in ing.messages_from_store(_load_store(store_paths))}
    data = st.read_stereotype_annotations(annotations, texts)
    problems = [f"row {row}: {why}" for row, why in data.violations]
    phrases = list(data.phrases.values())
    for rnd in st.Round:
        problems += [str(v) for v in st.validate_clustering(phrases, data.concepts, rnd, strict=not relaxed)]
    triples = data.encode()
    if profiles is not None:
        for p in _read_profiles(profiles):
            found = validate(p)
            if found:
                problems += [f"{p.id.name}: {v}" for v in found]
                continue
            triples |= st.encode_annotator_profile(p, st.Privacy(privacy))
    _write(serialize_ntriples(triples), output)
    for line in problems:
        click.echo(line, err=True)
    if problems:
        raise Invalid(f"{len(problems)} problems")


if __name__ == "__main__":  # pragma: no cover
    main()
