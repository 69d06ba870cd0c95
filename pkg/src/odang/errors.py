"""Exception hierarchy shared by all modules."""
from __future__ import annotations


class OdangError(Exception):
    """Base class for every error raised by the toolkit."""


# model
class UnknownPrefix(OdangError, KeyError):
    pass


class EmptyLocalName(OdangError, ValueError):
    pass


class DanglingRecord(OdangError, ValueError):
    pass


class InvalidSituation(OdangError, ValueError):
    pass


# rdf
class ParseError(OdangError, ValueError):
    def __init__(self, line: int, column: int, reason: str):
        super().__init__(f"line {line}, column {column}: {reason}")
        self.line = line
        self.column = column
        self.reason = reason


class UnknownPrefixInDocument(ParseError):
    pass


# ingest
class MappingError(OdangError, ValueError):
    pass


class MappingSyntaxError(MappingError):
    def __init__(self, line: int, column: int, reason: str):
        super().__init__(f"mapping line {line}, column {column}: {reason}")
        self.line = line
        self.column = column


class UnknownValueDomain(MappingError):
    pass


class DuplicateColumn(MappingError):
    pass


class ColumnMissing(OdangError, KeyError):
    pass


# store
class PatternError(OdangError, ValueError):
    pass


class UnboundFilterVariable(PatternError):
    pass


# linker
class ClientUnavailable(OdangError):
    pass


class RateLimited(ClientUnavailable):
    pass


class UnknownEntity(OdangError, KeyError):
    pass


# lexprof
class LexiconError(OdangError, ValueError):
    def __init__(self, row: int, message: str):
        super().__init__(f"lexicon row {row}: {message}")
        self.row = row


class UnknownCategory(LexiconError):
    pass


class EmptyLemma(LexiconError):
    pass


class EmptyDataset(OdangError, ValueError):
    pass


class EmptyClass(OdangError, ValueError):
    pass


class MissingClassAnnotation(OdangError, ValueError):
    pass


# stereotype
class InconsistentRefs(OdangError, ValueError):
    pass
