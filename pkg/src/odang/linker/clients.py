"""Client interfaces for the linking pipeline and their recorded-fixture backing.

A fixture root holds one directory per client (``handles``, ``search``,
``facts``). Each ``*.json`` file in a directory records one exchange::

    {"request": "Cécile Kyenge", "response": [...]}
    {"request": "@someone", "error": "unavailable"}

``error`` may be ``"unavailable"`` or ``"rate_limited"``. Requests with no
recording behave as "not found" for the handle and search clients and raise
:class:`UnknownEntity` for the facts client.
"""
from __future__ import annotations

import json
import logging
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Protocol, Union

from odang.errors import ClientUnavailable, RateLimited, UnknownEntity

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Candidate:
    name: str
    external_id: str
    score: float

    def __post_init__(self):
        if self.score < 0:
            raise ValueError(f"candidate score must be >= 0, got {self.score}")


@dataclass(frozen=True)
class PlatformUser:
    """What the platform knows about a handle: display name and numeric id."""

    name: str
    platform_id: int


class HandleClient(Protocol):
    concurrent_safe: bool

    def lookup(self, handle: str) -> Optional[PlatformUser]: ...


class SearchClient(Protocol):
    concurrent_safe: bool

    def search(self, name: str, limit: int) -> List[Candidate]: ...


class FactsClient(Protocol):
    concurrent_safe: bool

    def entity(self, external_id: str) -> Dict[str, List[Any]]:
        """Property id (e.g. ``P569``) -> values in source order."""
        ...


@dataclass
class ExchangeLog:
    """Every request a client answered, in call order."""

    entries: List[dict] = field(default_factory=list)

    def record(self, client: str, request: str, *, response: Any = None, error: Optional[str] = None) -> None:
        entry = {"client": client, "request": request}
        if error is not None:
            entry["error"] = error
        else:
            entry["response"] = response
        self.entries.append(entry)

    def responses(self, client: str) -> Dict[str, Any]:
        return {e["request"]: e.get("response") for e in self.entries if e["client"] == client and "error" not in e}

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e, ensure_ascii=False, sort_keys=True) + "\n" for e in self.entries)

    def append_to(self, path: Union[str, Path]) -> None:
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(self.to_jsonl())


def _nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


class _FixtureClient:
    concurrent_safe = True
    kind = ""

    def __init__(self, directory: Union[str, Path], log: Optional[ExchangeLog] = None):
        self.directory = Path(directory)
        self.log = log if log is not None else ExchangeLog()
        self._recordings: Dict[str, dict] = {}
        if self.directory.is_dir():
            for path in sorted(self.directory.glob("*.json")):
                doc = json.loads(path.read_text(encoding="utf-8"))
                if "request" not in doc or ("response" not in doc and "error" not in doc):
                    raise ValueError(f"{path}: a recording needs 'request' and 'response' or 'error'")
                key = _nfc(str(doc["request"]))
                if key in self._recordings:
                    raise ValueError(f"{path}: request {key!r} recorded twice")
                self._recordings[key] = doc
        else:
            logger.warning("fixture directory %s missing; every request is unrecorded", self.directory)

    def _replay(self, request: str):
        doc = self._recordings.get(_nfc(request))
        if doc is None:
            self.log.record(self.kind, request, response=None)
            return None
        error = doc.get("error")
        if error is not None:
            self.log.record(self.kind, request, error=error)
            if error == "rate_limited":
                raise RateLimited(f"{self.kind}: rate limited on {request!r}")
            raise ClientUnavailable(f"{self.kind}: {error} on {request!r}")
        self.log.record(self.kind, request, response=doc["response"])
        return doc["response"]


class FixtureHandleClient(_FixtureClient):
    kind = "handles"

    def lookup(self, handle: str) -> Optional[PlatformUser]:
        resp = self._replay(handle)
        if not resp:
            return None
        return PlatformUser(resp["name"], int(resp["id"]))


class FixtureSearchClient(_FixtureClient):
    kind = "search"

    def search(self, name: str, limit: int) -> List[Candidate]:
        resp = self._replay(name) or []
        # Recordings are returned whole; truncation is the caller's job.
        return [Candidate(c["name"], str(c["id"]), float(c["score"])) for c in resp]


class FixtureFactsClient(_FixtureClient):
    kind = "facts"

    def entity(self, external_id: str) -> Dict[str, List[Any]]:
        resp = self._replay(external_id)
        if resp is None:
            raise UnknownEntity(external_id)
        return {prop: list(values) for prop, values in resp.items()}


@dataclass
class LinkClients:
    handles: HandleClient
    search: SearchClient
    facts: FactsClient
    log: ExchangeLog = field(default_factory=ExchangeLog)

    @classmethod
    def from_fixtures(cls, root: Union[str, Path]) -> "LinkClients":
        root = Path(root)
        log = ExchangeLog()
        return cls(
            FixtureHandleClient(root / "handles", log),
            FixtureSearchClient(root / "search", log),
            FixtureFactsClient(root / "facts", log),
            log,
        )
