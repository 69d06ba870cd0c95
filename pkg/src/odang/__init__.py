"""Knowledge-graph toolkit for annotated abusive-language corpora."""

__version__ = "0.1.0"
