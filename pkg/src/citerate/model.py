"""Core corpus data model: patents, citation edges, and the corpus store."""

from __future__ import annotations

from dataclasses import dataclass, field

from .dates import iso_of

# Technology subdomain flags, in canonical column order. These mirror the
# four CPC groups the engine tracks (Y02E60/32, /34, /36, /50).
SUBDOMAINS = ("storage", "distribution", "production", "fuel_cells")

CPC_SUBDOMAIN_PREFIXES = {
    "Y02E60/32": "storage",
    "Y02E60/34": "distribution",
    "Y02E60/36": "production",
    "Y02E60/50": "fuel_cells",
}


@dataclass(frozen=True)
class Patent:
    """One patent node.

    Dates are integer day numbers (see :mod:`citerate.dates`);
    ``filing_day`` may be None. The four booleans mark membership in the
    hydrogen technology subdomains; ``total_cpc_classes`` counts all CPC
    classes the patent is filed in (always >= 1).
    """

    id: str
    publication_day: int
    filing_day: int | None = None
    is_storage: bool = False
    is_distribution: bool = False
    is_production: bool = False
    is_fuel_cells: bool = False
    total_cpc_classes: int = 1

    def flags(self) -> tuple[bool, bool, bool, bool]:
        return (self.is_storage, self.is_distribution,
                self.is_production, self.is_fuel_cells)

    def shares_subdomain(self, other: "Patent") -> bool:
        return any(a and b for a, b in zip(self.flags(), other.flags()))


@dataclass(frozen=True)
class CitationEdge:
    """Directed citing -> cited link. ``citation_day`` equals the citing
    patent's publication day."""

    citing_id: str
    cited_id: str
    citation_day: int


@dataclass
class CorpusStore:
    """Normalized corpus: patents keyed by id plus resolved citation edges.

    Edges whose endpoints do not resolve are quarantined in
    ``unresolved_edges`` rather than dropped; self-citations are dropped
    and counted. The accounting identity
    ``len(edges) + len(unresolved_edges) + self_citations == raw edge count``
    always holds after ingest.
    """

    patents: dict[str, Patent] = field(default_factory=dict)
    edges: list[CitationEdge] = field(default_factory=list)
    unresolved_edges: list[tuple[str, str]] = field(default_factory=list)
    self_citations: int = 0
    skipped_records: int = 0
    provenance: dict = field(default_factory=dict)

    @property
    def raw_edge_count(self) -> int:
        return len(self.edges) + len(self.unresolved_edges) + self.self_citations

    def same_content(self, other: "CorpusStore") -> bool:
        """Content equality: patents and edge sets, ignoring ingest
        tallies and provenance."""
        return (self.patents == other.patents
                and sorted(self.edges, key=_edge_key) == sorted(other.edges, key=_edge_key)
                and sorted(self.unresolved_edges) == sorted(other.unresolved_edges))

    def span_days(self) -> tuple[int, int]:
        """(first, last) publication day across the corpus."""
        if not self.patents:
            raise ValueError("empty corpus has no span")
        days = [p.publication_day for p in self.patents.values()]
        return min(days), max(days)

    def describe(self) -> str:
        if not self.patents:
            return "CorpusStore(empty)"
        lo, hi = self.span_days()
        return (f"CorpusStore({len(self.patents)} patents, {len(self.edges)} edges, "
                f"{len(self.unresolved_edges)} unresolved, span {iso_of(lo)}..{iso_of(hi)})")


def _edge_key(e: CitationEdge):
    return (e.citing_id, e.cited_id, e.citation_day)


def subdomain_flags_from_cpc(symbols) -> dict[str, bool]:
    """Map CPC symbols to subdomain membership booleans."""
    out = {name: False for name in SUBDOMAINS}
    for sym in symbols:
        sym = sym.strip()
        for prefix, name in CPC_SUBDOMAIN_PREFIXES.items():
            if sym.startswith(prefix):
                out[name] = True
    return out
