"""Temporal directed acyclic citation graph.

Patent citations are inherently acyclic (nothing cites the future), but
same-day publications produce occasional reciprocal ties. Resolution:
order nodes totally by (publication day, filing day, id) and delete every
edge in which the earlier node cites the later one. Under a total order
this provably removes all cycles, of any length, and for a reciprocal
pair it deletes exactly the older-citing-newer edge. Missing filing days
sort as the publication day (the latest value consistent with
filing <= publication). Deleted edges are retained with reason codes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dates import iso_of
from .errors import GraphError
from .model import CorpusStore

REASON_OLDER_CITES_NEWER = "older_cites_newer"


@dataclass(frozen=True)
class RemovedEdge:
    citing_id: str
    cited_id: str
    citation_day: int
    reason: str


@dataclass
class TemporalDag:
    """Citation DAG with nodes in (pub, filing, id) order.

    ``node_ids[i]`` has publication day ``pub_day[i]``; the ascending node
    order is the cycle-resolution total order, so every kept edge points
    from a higher index (newer patent) to a lower index (older patent).
    Edges are sorted by (citation day, citing, cited), which makes a time
    snapshot a simple prefix of both arrays.
    """

    node_ids: list[str]
    pub_day: np.ndarray            # int64[n], ascending
    filing_day: np.ndarray         # int64[n], -1 where unknown
    index_of: dict[str, int]
    citing: np.ndarray             # int32/int64[m] node indices
    cited: np.ndarray
    citation_day: np.ndarray       # int64[m], ascending
    removed_edges: list[RemovedEdge] = field(default_factory=list)

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_edges(self) -> int:
        return len(self.citing)

    @property
    def topo_order(self) -> list[str]:
        """A topological order witness for citing -> cited edges
        (descending node order: every edge source precedes its target)."""
        return self.node_ids[::-1]

    def check_order(self) -> None:
        """Raise unless every edge points from a newer to an older node
        under the total order (the acyclicity witness)."""
        if np.any(self.citing <= self.cited):
            raise GraphError("edge violates the tie-resolved node order")

    def full_view(self) -> "DagView":
        day = int(self.pub_day[-1]) if self.n_nodes else 0
        day = max(day, int(self.citation_day[-1]) if self.n_edges else 0)
        return DagView(self, day, self.n_nodes, self.n_edges)


@dataclass(frozen=True)
class DagView:
    """Read-only snapshot: the first ``n_nodes`` nodes and first
    ``n_edges`` edges of the parent DAG (both prefixes in time order)."""

    dag: TemporalDag
    day: int
    n_nodes: int
    n_edges: int

    @property
    def citing(self) -> np.ndarray:
        return self.dag.citing[:self.n_edges]

    @property
    def cited(self) -> np.ndarray:
        return self.dag.cited[:self.n_edges]

    @property
    def node_ids(self) -> list[str]:
        return self.dag.node_ids[:self.n_nodes]

    def in_degrees(self) -> np.ndarray:
        """Citations received per node (edges pointing into the node)."""
        return np.bincount(self.cited, minlength=self.n_nodes)[:self.n_nodes]

    def out_degrees(self) -> np.ndarray:
        """Backward citations made per node."""
        return np.bincount(self.citing, minlength=self.n_nodes)[:self.n_nodes]


def build_dag(store: CorpusStore) -> TemporalDag:
    """Construct the temporal DAG, deleting order-violating citations.

    Nodes are ordered by (publication day, filing day, id); for every
    resolved edge u -> v with u earlier than v in that order (an older
    patent citing a newer one), the edge is deleted and logged in
    ``removed_edges``. The remaining graph is acyclic by construction.
    """
    patents = sorted(
        store.patents.values(),
        key=lambda p: (p.publication_day,
                       p.filing_day if p.filing_day is not None else p.publication_day,
                       p.id),
    )
    node_ids = [p.id for p in patents]
    pub = np.array([p.publication_day for p in patents], dtype=np.int64)
    filing = np.array([p.filing_day if p.filing_day is not None else -1
                       for p in patents], dtype=np.int64)
    index_of = {pid: i for i, pid in enumerate(node_ids)}

    kept = []
    removed: list[RemovedEdge] = []
    for e in store.edges:
        u = index_of[e.citing_id]
        v = index_of[e.cited_id]
        if u > v:
            kept.append((e.citation_day, u, v))
        else:
            removed.append(RemovedEdge(e.citing_id, e.cited_id, e.citation_day,
                                       REASON_OLDER_CITES_NEWER))
    kept.sort(key=lambda t: (t[0], t[1], t[2]))
    if kept:
        day_arr = np.array([t[0] for t in kept], dtype=np.int64)
        citing_arr = np.array([t[1] for t in kept], dtype=np.int64)
        cited_arr = np.array([t[2] for t in kept], dtype=np.int64)
    else:
        day_arr = np.empty(0, dtype=np.int64)
        citing_arr = np.empty(0, dtype=np.int64)
        cited_arr = np.empty(0, dtype=np.int64)
    return TemporalDag(node_ids, pub, filing, index_of,
                       citing_arr, cited_arr, day_arr, removed)


def snapshot_at(dag: TemporalDag, day: int) -> DagView:
    """View of the graph as observable at end of ``day``: nodes published
    on or before it and citations dated on or before it. Days before the
    first publication give an empty view."""
    n_nodes = int(np.searchsorted(dag.pub_day, day, side="right"))
    n_edges = int(np.searchsorted(dag.citation_day, day, side="right"))
    return DagView(dag, day, n_nodes, n_edges)


@dataclass
class DegreeStats:
    node_ids: list[str]
    in_degree: np.ndarray
    out_degree: np.ndarray
    in_hist: list[tuple[int, int]]    # (degree, count)
    out_hist: list[tuple[int, int]]


def degree_stats(view: TemporalDag | DagView) -> DegreeStats:
    """Per-node in/out degrees plus (degree, count) histograms for both
    directions, suitable for log-log plotting."""
    if isinstance(view, TemporalDag):
        view = view.full_view()
    ind = view.in_degrees()
    outd = view.out_degrees()
    in_vals, in_counts = np.unique(ind, return_counts=True)
    out_vals, out_counts = np.unique(outd, return_counts=True)
    return DegreeStats(
        node_ids=view.node_ids,
        in_degree=ind,
        out_degree=outd,
        in_hist=list(zip(in_vals.tolist(), in_counts.tolist())),
        out_hist=list(zip(out_vals.tolist(), out_counts.tolist())),
    )


def write_dag_csv(dag: TemporalDag, nodes_path, edges_path, removed_path) -> None:
    import csv

    with open(nodes_path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["id", "pub_date"])
        for i, pid in enumerate(dag.node_ids):
            w.writerow([pid, iso_of(int(dag.pub_day[i]))])
    with open(edges_path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["citing_id", "cited_id", "citation_date"])
        for k in range(dag.n_edges):
            w.writerow([dag.node_ids[dag.citing[k]], dag.node_ids[dag.cited[k]],
                        iso_of(int(dag.citation_day[k]))])
    with open(removed_path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["citing_id", "cited_id", "citation_date", "reason"])
        for e in dag.removed_edges:
            w.writerow([e.citing_id, e.cited_id, iso_of(e.citation_day), e.reason])
