"""Paginated (scroll) retrieval client for the patent-search API.

The canonical input to the engine is an offline JSONL dump; this client
is the optional, config-gated path that produces such a dump. The
protocol: the first POST carries the CPC-filter query body, every
subsequent POST carries ``{"scroll_id": ..., "include": ...}``, and the
walk ends when a page reports zero results. HTTP 429 waits and retries
the same scroll id; an expired scroll restarts the walk from scratch
(deduplication by record id keeps the output stable); any other non-OK
status aborts with the partial results preserved on the exception.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field

from .errors import FetchError

log = logging.getLogger(__name__)

HTTP_OK = 200
HTTP_TOO_MANY_REQUESTS = 429
HTTP_GONE = 410


@dataclass
class FetchResult:
    records: list = field(default_factory=list)
    requests: int = 0
    retries: int = 0
    restarts: int = 0
    duplicates: int = 0


def _is_scroll_expiry(status: int, text: str) -> bool:
    if status == HTTP_GONE:
        return True
    return status == 400 and "scroll" in (text or "").lower()


def fetch_scroll(endpoint, query, token, *, include=None, session=None,
                 sleep=time.sleep, retry_wait=1.0, max_restarts=3) -> FetchResult:
    """Walk a scroll-paginated search and return de-duplicated records.

    ``query`` is the first request body (dict). ``session`` needs only a
    ``post(url, headers=..., data=...)`` method returning an object with
    ``status_code``, ``json()`` and ``text``; by default a
    ``requests.Session`` is used. ``sleep`` is injectable for tests.
    """
    if session is None:
        import requests
        session = requests.Session()
    headers = {
        "Content-Type": "application/json",
        "Authorization": f"Bearer {token}",
    }
    include = include if include is not None else ["biblio", "doc_key", "lang"]
    result = FetchResult()
    seen = set()
    restarts_left = max_restarts

    body = dict(query)
    scroll_id = None
    while True:
        resp = session.post(endpoint, headers=headers, data=json.dumps(body))
        result.requests += 1
        status = resp.status_code
        if status == HTTP_TOO_MANY_REQUESTS:
            result.retries += 1
            sleep(retry_wait)
            continue
        if status != HTTP_OK:
            if _is_scroll_expiry(status, getattr(resp, "text", "")):
                if restarts_left <= 0:
                    raise FetchError("scroll expired and restart budget exhausted",
                                     records=result.records, status=status)
                restarts_left -= 1
                result.restarts += 1
                log.warning("scroll expired (status %s); restarting from scratch", status)
                body = dict(query)
                scroll_id = None
                continue
            raise FetchError(f"request failed with status {status}",
                             records=result.records, status=status)
        data = resp.json()
        n = data.get("results") or 0
        if n <= 0:
            return result
        scroll_id = data.get("scroll_id", scroll_id)
        for rec in data.get("data", []):
            rid = rec.get("lens_id") or rec.get("id")
            if rid in seen:
                result.duplicates += 1
                continue
            seen.add(rid)
            result.records.append(rec)
        body = {"scroll_id": scroll_id, "include": include}


def write_jsonl(records, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(rec, sort_keys=True))
            f.write("\n")
