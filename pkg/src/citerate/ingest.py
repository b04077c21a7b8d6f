"""Corpus ingestion from offline dumps.

Two source formats are supported:

* ``parse_jsonl`` reads newline-delimited JSON dumps shaped like the
  patent-search API response (``lens_id``, ``biblio``, ``doc_key``,
  ``lang``). Malformed records are skipped and tallied, never fatal.
* ``parse_csv_edges`` reads the strict two-file CSV fixture format
  (patent table + edge list) that the simulator also emits.

Both return a :class:`~citerate.model.CorpusStore`. Edge endpoints that do
not resolve to a stored patent are quarantined, never silently dropped,
and self-citations are dropped with a count, so that
``resolved + quarantined + self == raw`` always holds.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import time

from .dates import day_of_str, iso_of
from .errors import IngestError
from .model import (SUBDOMAINS, CitationEdge, CorpusStore, Patent,
                    subdomain_flags_from_cpc)

PATENT_CSV_COLUMNS = ["id", "pub_date", "filing_date", "storage", "distribution",
                      "production", "fuel_cells", "total_cpc"]
EDGE_CSV_COLUMNS = ["citing_id", "cited_id"]


def _file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _record_id(rec) -> str | None:
    rid = rec.get("lens_id") or rec.get("id")
    if rid is None:
        return None
    rid = str(rid).strip()
    return rid or None


def _record_dates(rec):
    """(pub_date, filing_date) ISO strings from either flat or biblio shape."""
    biblio = rec.get("biblio") or {}
    pub = rec.get("date_published")
    if pub is None:
        pub = (biblio.get("publication_reference") or {}).get("date")
    filing = rec.get("date_filed")
    if filing is None:
        filing = (biblio.get("application_reference") or {}).get("date")
    return pub, filing


def _record_cpc(rec):
    if "cpc" in rec:
        return [str(s) for s in rec["cpc"]]
    biblio = rec.get("biblio") or {}
    cls = (biblio.get("classifications_cpc") or {}).get("classifications") or []
    return [str(c.get("symbol", "")) for c in cls if c.get("symbol")]


def _record_citations(rec):
    if "citations" in rec:
        return [str(c) for c in rec["citations"]]
    biblio = rec.get("biblio") or {}
    cites = (biblio.get("references_cited") or {}).get("citations") or []
    out = []
    for c in cites:
        ref = (c.get("patcit") or {}).get("lens_id")
        if ref:
            out.append(str(ref))
    return out


def _patent_from_record(rec) -> tuple[Patent, list[str]] | None:
    """Build a Patent from one dump record, or None if malformed."""
    rid = _record_id(rec)
    if rid is None:
        return None
    pub_s, filing_s = _record_dates(rec)
    if not pub_s:
        return None
    try:
        pub = day_of_str(pub_s)
        filing = day_of_str(filing_s) if filing_s else None
    except ValueError:
        return None
    if filing is not None and filing > pub:
        return None
    cpc = _record_cpc(rec)
    if not cpc:
        return None
    flags = subdomain_flags_from_cpc(cpc)
    patent = Patent(
        id=rid,
        publication_day=pub,
        filing_day=filing,
        is_storage=flags["storage"],
        is_distribution=flags["distribution"],
        is_production=flags["production"],
        is_fuel_cells=flags["fuel_cells"],
        total_cpc_classes=len(set(cpc)),
    )
    return patent, _record_citations(rec)


def _resolve_edges(store: CorpusStore, raw_refs) -> None:
    """Second pass: turn (citing, cited) pairs into resolved edges,
    self-citation counts, or quarantined pairs."""
    for citing_id, cited_id in raw_refs:
        if citing_id == cited_id:
            store.self_citations += 1
            continue
        citing = store.patents.get(citing_id)
        cited = store.patents.get(cited_id)
        if citing is None or cited is None:
            store.unresolved_edges.append((citing_id, cited_id))
            continue
        store.edges.append(CitationEdge(citing_id, cited_id, citing.publication_day))


def parse_jsonl(stream, source_name="<stream>") -> CorpusStore:
    """Parse a newline-delimited JSON dump into a CorpusStore.

    ``stream`` may be a path, a text file object, or a binary file
    object. Records missing an id, a publication date, or any CPC class,
    and records whose filing date postdates publication, are skipped and
    counted in ``skipped_records``. Duplicate ids keep the first record.
    """
    close = False
    if isinstance(stream, (str, os.PathLike)):
        source_name = str(stream)
        stream = open(stream, "rb")
        close = True
    try:
        if isinstance(stream, io.TextIOBase):
            lines = stream
        else:
            lines = io.TextIOWrapper(stream, encoding="utf-8")
        store = CorpusStore()
        raw_refs = []
        for line in lines:
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError:
                store.skipped_records += 1
                continue
            parsed = _patent_from_record(rec)
            if parsed is None:
                store.skipped_records += 1
                continue
            patent, refs = parsed
            if patent.id in store.patents:
                store.skipped_records += 1
                continue
            store.patents[patent.id] = patent
            raw_refs.extend((patent.id, ref) for ref in refs)
        _resolve_edges(store, raw_refs)
        store.provenance = {"source": source_name, "format": "jsonl",
                            "ingested_at": time.time()}
        return store
    except OSError as exc:
        raise IngestError(f"unreadable stream {source_name}: {exc}") from exc
    finally:
        if close:
            stream.close()


def _parse_bool(text: str) -> bool:
    return text.strip() in ("1", "true", "True")


def parse_csv_edges(patent_file, edge_file) -> CorpusStore:
    """Parse the two-file CSV fixture format.

    ``patent_file`` columns: id, pub_date, filing_date, storage,
    distribution, production, fuel_cells, total_cpc.
    ``edge_file`` columns: citing_id, cited_id. Citation dates are filled
    from the citing patent's publication date. A duplicate patent id is
    fatal; an edge referencing an unknown id is quarantined.
    """
    store = CorpusStore()
    try:
        with open(patent_file, newline="", encoding="utf-8") as f:
            reader = csv.DictReader(f)
            for row in reader:
                pid = row["id"].strip()
                if pid in store.patents:
                    raise IngestError(f"duplicate patent id {pid!r} in {patent_file}")
                filing_s = (row.get("filing_date") or "").strip()
                pub = day_of_str(row["pub_date"])
                filing = day_of_str(filing_s) if filing_s else None
                if filing is not None and filing > pub:
                    raise IngestError(f"patent {pid!r}: filing date after publication date")
                total = int(row["total_cpc"])
                if total < 1:
                    raise IngestError(f"patent {pid!r}: total_cpc must be >= 1")
                store.patents[pid] = Patent(
                    id=pid,
                    publication_day=pub,
                    filing_day=filing,
                    is_storage=_parse_bool(row["storage"]),
                    is_distribution=_parse_bool(row["distribution"]),
                    is_production=_parse_bool(row["production"]),
                    is_fuel_cells=_parse_bool(row["fuel_cells"]),
                    total_cpc_classes=total,
                )
        raw_refs = []
        with open(edge_file, newline="", encoding="utf-8") as f:
            reader = csv.DictReader(f)
            for row in reader:
                raw_refs.append((row["citing_id"].strip(), row["cited_id"].strip()))
        _resolve_edges(store, raw_refs)
    except OSError as exc:
        raise IngestError(f"cannot read corpus files: {exc}") from exc
    except KeyError as exc:
        raise IngestError(f"missing CSV column: {exc}") from exc
    store.provenance = {
        "patents_file": str(patent_file), "edges_file": str(edge_file),
        "patents_sha256": _file_digest(patent_file),
        "edges_sha256": _file_digest(edge_file),
        "format": "csv", "ingested_at": time.time(),
    }
    return store


def write_csv(store: CorpusStore, patent_file, edge_file) -> None:
    """Write a CorpusStore back to the CSV fixture format.

    Patents are written in id order; resolved edges first (by citing,
    cited), then quarantined pairs, so parse_csv_edges round-trips to an
    identical store.
    """
    with open(patent_file, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(PATENT_CSV_COLUMNS)
        for pid in sorted(store.patents):
            p = store.patents[pid]
            w.writerow([
                p.id, iso_of(p.publication_day),
                iso_of(p.filing_day) if p.filing_day is not None else "",
                int(p.is_storage), int(p.is_distribution),
                int(p.is_production), int(p.is_fuel_cells),
                p.total_cpc_classes,
            ])
    with open(edge_file, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(EDGE_CSV_COLUMNS)
        for e in sorted(store.edges, key=lambda e: (e.citing_id, e.cited_id)):
            w.writerow([e.citing_id, e.cited_id])
        for citing_id, cited_id in sorted(store.unresolved_edges):
            w.writerow([citing_id, cited_id])


def subdomain_counts(store: CorpusStore) -> dict[str, int]:
    counts = dict.fromkeys(SUBDOMAINS, 0)
    for p in store.patents.values():
        for name, flag in zip(SUBDOMAINS, p.flags()):
            counts[name] += int(flag)
    return counts
