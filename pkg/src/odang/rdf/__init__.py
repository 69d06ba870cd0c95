"""RDF serialization: canonical N-Triples and a Turtle subset."""
from odang.namespaces import DEFAULT_PREFIXES, PrefixMap
from odang.rdf.ntriples import iter_ntriples, parse_ntriples, serialize_ntriples, term_to_nt
from odang.rdf.turtle import parse_turtle_subset, serialize_turtle

__all__ = [
    "DEFAULT_PREFIXES",
    "PrefixMap",
    "iter_ntriples",
    "parse_ntriples",
    "parse_turtle_subset",
    "serialize_ntriples",
    "serialize_turtle",
    "term_to_nt",
]
