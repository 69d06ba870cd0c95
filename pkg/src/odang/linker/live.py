"""HTTP clients for the live services. Only used behind the CLI ``--live`` flag.

Credentials come from the environment: ``ODANG_TWITTER_BEARER`` for handle
lookup and ``ODANG_GOOGLE_KG_KEY`` for knowledge-graph search. Wikidata needs
no key. These clients make one request at a time and declare themselves not
safe for concurrent use.
"""
from __future__ import annotations

import json
import logging
import os
import urllib.error
import urllib.parse
import urllib.request
from typing import Any, Dict, List, Optional

from odang.errors import ClientUnavailable, RateLimited, UnknownEntity
from odang.linker.clients import Candidate, ExchangeLog, LinkClients, PlatformUser

logger = logging.getLogger(__name__)

USER_AGENT = "odang-linker/0.1"
WIKIDATA_ENTITY = "http://www.wikidata.org/entity/"
_GENDER_LABELS = {"Q6581072": "female", "Q6581097": "male", "Q1097630": "intersex"}


def _get_json(url: str, headers: Optional[Dict[str, str]] = None, timeout: float = 20.0) -> Any:
    req = urllib.request.Request(url, headers={"User-Agent": USER_AGENT, **(headers or {})})
    try:
        with urllib.request.urlopen(req, timeout=timeout) as resp:
            return json.load(resp)
    except urllib.error.HTTPError as exc:
        if exc.code == 429:
            raise RateLimited(f"{url}: HTTP 429") from None
        if exc.code == 404:
            return None
        raise ClientUnavailable(f"{url}: HTTP {exc.code}") from None
    except (urllib.error.URLError, TimeoutError, json.JSONDecodeError) as exc:
        raise ClientUnavailable(f"{url}: {exc}") from None


def _require_env(name: str) -> str:
    value = os.environ.get(name)
    if not value:
        raise ClientUnavailable(f"environment variable {name} is not set")
    return value


class LiveHandleClient:
    concurrent_safe = False

    def __init__(self, log: ExchangeLog):
        self.log = log

    def lookup(self, handle: str) -> Optional[PlatformUser]:
        token = _require_env("ODANG_TWITTER_BEARER")
        url = "https://api.twitter.com/2/users/by/username/" + urllib.parse.quote(handle.lstrip("@"))
        doc = _get_json(url, {"Authorization": f"Bearer {token}"})
        data = (doc or {}).get("data")
        response = {"name": data["name"], "id": int(data["id"])} if data else None
        self.log.record("handles", handle, response=response)
        return PlatformUser(response["name"], response["id"]) if response else None


class LiveSearchClient:
    """Knowledge-graph search; candidate ids are the service's entity ids (``kg:/m/...``)."""

    concurrent_safe = False

    def __init__(self, log: ExchangeLog, languages: str = "it"):
        self.log = log
        self.languages = languages

    def search(self, name: str, limit: int) -> List[Candidate]:
        key = _require_env("ODANG_GOOGLE_KG_KEY")
        query = urllib.parse.urlencode(
            {"query": name, "key": key, "limit": limit, "languages": self.languages, "types": "Person"}
        )
        doc = _get_json("https://kgsearch.googleapis.com/v1/entities:search?" + query) or {}
        recorded = []
        for item in doc.get("itemListElement", []):
            result = item.get("result", {})
            if "name" in result and "@id" in result:
                recorded.append({"name": result["name"], "id": result["@id"], "score": float(item.get("resultScore", 0))})
        self.log.record("search", name, response=recorded)
        return [Candidate(c["name"], c["id"], c["score"]) for c in recorded]


class LiveFactsClient:
    """Wikidata claims, reached from a search id through its Freebase/Google KG identifier."""

    concurrent_safe = False
    _PROPS = ("P21", "P569", "P27", "P19", "P106", "P102")

    def __init__(self, log: ExchangeLog):
        self.log = log

    def _qid(self, external_id: str) -> str:
        if external_id.startswith("Q") and external_id[1:].isdigit():
            return external_id
        mid = external_id.removeprefix("kg:")
        prop = "P646" if mid.startswith("/m/") else "P2671"
        sparql = f'SELECT ?item WHERE {{ ?item wdt:{prop} "{mid}" }} LIMIT 1'
        url = "https://query.wikidata.org/sparql?" + urllib.parse.urlencode({"query": sparql, "format": "json"})
        rows = ((_get_json(url) or {}).get("results") or {}).get("bindings") or []
        if not rows:
            raise UnknownEntity(external_id)
        return rows[0]["item"]["value"].rsplit("/", 1)[-1]

    def entity(self, external_id: str) -> Dict[str, List[Any]]:
        qid = self._qid(external_id)
        url = f"https://www.wikidata.org/wiki/Special:EntityData/{qid}.json"
        doc = _get_json(url)
        entity = ((doc or {}).get("entities") or {}).get(qid)
        if entity is None:
            raise UnknownEntity(external_id)
        out: Dict[str, List[Any]] = {}
        for prop in self._PROPS:
            values = []
            for claim in entity.get("claims", {}).get(prop, []):
                value = claim.get("mainsnak", {}).get("datavalue", {}).get("value")
                if value is None:
                    continue
                if prop == "P569":
                    values.append(value["time"])
                elif prop == "P21":
                    values.append(_GENDER_LABELS.get(value["id"], value["id"]))
                else:
                    values.append(WIKIDATA_ENTITY + value["id"])
            if values:
                out[prop] = values
        self.log.record("facts", external_id, response=out)
        return out


def live_clients() -> LinkClients:
    log = ExchangeLog()
    return LinkClients(LiveHandleClient(log), LiveSearchClient(log), LiveFactsClient(log), log)
