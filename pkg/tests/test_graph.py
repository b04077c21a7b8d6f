from __future__ import annotations

import numpy as np
import pytest

from citerate.dates import day_of_str
from citerate.errors import GraphError
from citerate.graph import (REASON_OLDER_CITES_NEWER, TemporalDag, build_dag,
                            degree_stats, snapshot_at, write_dag_csv)
from citerate.model import CitationEdge, CorpusStore, Patent

SEED = 20210907


def _store(patents, edges):
    """patents: (id, pub_iso[, filing_iso]); edges: (citing, cited)."""
    store = CorpusStore()
    for spec in patents:
        pid, pub = spec[0], spec[1]
        filing = day_of_str(spec[2]) if len(spec) > 2 and spec[2] else None
        store.patents[pid] = Patent(pid, day_of_str(pub), filing)
    for citing, cited in edges:
        store.edges.append(
            CitationEdge(citing, cited, store.patents[citing].publication_day))
    return store


def _has_cycle(n_nodes, edge_pairs) -> bool:
    """Independent iterative-DFS cycle detector (oracle)."""
    adj = [[] for _ in range(n_nodes)]
    for u, v in edge_pairs:
        adj[u].append(v)
    color = [0] * n_nodes  # 0 unseen, 1 on stack, 2 done
    for root in range(n_nodes):
        if color[root]:
            continue
        stack = [(root, iter(adj[root]))]
        color[root] = 1
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if color[nxt] == 1:
                    return True
                if color[nxt] == 0:
                    color[nxt] = 1
                    stack.append((nxt, iter(adj[nxt])))
                    advanced = True
                    break
            if not advanced:
                color[node] = 2
                stack.pop()
    return False


def test_cycle_detector_oracle_sanity():
    assert _has_cycle(2, [(0, 1), (1, 0)])
    assert _has_cycle(3, [(0, 1), (1, 2), (2, 0)])
    assert not _has_cycle(3, [(2, 1), (1, 0), (2, 0)])
    assert _has_cycle(1, [(0, 0)])


def test_chain_degrees():
    store = _store([("a", "2000-01-01"), ("b", "2001-01-01"),
                    ("c", "2002-01-01")],
                   [("b", "a"), ("c", "b")])
    dag = build_dag(store)
    view = dag.full_view()
    ind = dict(zip(view.node_ids, view.in_degrees()))
    outd = dict(zip(view.node_ids, view.out_degrees()))
    assert ind == {"a": 1, "b": 1, "c": 0}
    assert outd == {"a": 0, "b": 1, "c": 1}


def test_star_root_in_degree():
    patents = [("root", "1990-01-01")] + [(f"s{i}", "2000-01-01")
                                          for i in range(5)]
    store = _store(patents, [(f"s{i}", "root") for i in range(5)])
    view = build_dag(store).full_view()
    assert view.in_degrees()[view.node_ids.index("root")] == 5


def test_reciprocal_tie_same_day_resolved_by_filing():
    # a and b publish the same day; a filed first, so a is the older
    # patent and its citation of b (older citing newer) must go.
    store = _store([("a", "2010-05-05", "2008-01-01"),
                    ("b", "2010-05-05", "2009-06-06")],
                   [("a", "b"), ("b", "a")])
    dag = build_dag(store)
    assert dag.n_edges == 1
    assert dag.node_ids[dag.citing[0]] == "b"
    assert dag.node_ids[dag.cited[0]] == "a"
    assert len(dag.removed_edges) == 1
    gone = dag.removed_edges[0]
    assert (gone.citing_id, gone.cited_id) == ("a", "b")
    assert gone.reason == REASON_OLDER_CITES_NEWER


def test_missing_filing_day_sorts_as_publication_day():
    # Same pub day; b's filing day precedes it, a's is unknown (treated
    # as the pub day itself), so b is older and b -> a must be removed.
    store = _store([("a", "2010-05-05"), ("b", "2010-05-05", "2009-01-01")],
                   [("a", "b"), ("b", "a")])
    dag = build_dag(store)
    removed = {(e.citing_id, e.cited_id) for e in dag.removed_edges}
    assert removed == {("b", "a")}
    assert dag.node_ids[dag.citing[0]] == "a"


def test_kept_edges_always_point_new_to_old():
    rng = np.random.default_rng(SEED)
    store = _random_store(rng, n=40, extra_cycles=6)
    dag = build_dag(store)
    dag.check_order()  # raises on violation
    assert np.all(dag.citing > dag.cited)


def test_check_order_raises_on_forged_edge():
    store = _store([("a", "2000-01-01"), ("b", "2001-01-01")], [("b", "a")])
    dag = build_dag(store)
    forged = TemporalDag(dag.node_ids, dag.pub_day, dag.filing_day,
                         dag.index_of, dag.cited, dag.citing,
                         dag.citation_day)
    with pytest.raises(GraphError):
        forged.check_order()


def _random_store(rng, n=30, extra_cycles=4):
    """Random corpus with duplicate pub days, random edges in both
    directions, and injected reciprocal pairs."""
    store = CorpusStore()
    pubs = rng.integers(58000, 58000 + 400, size=n)
    filings = pubs - rng.integers(1, 900, size=n)
    ids = [f"N{i:03d}" for i in range(n)]
    for i in range(n):
        filing = int(filings[i]) if rng.uniform() < 0.8 else None
        store.patents[ids[i]] = Patent(ids[i], int(pubs[i]), filing)
    m = int(rng.integers(n, 4 * n))
    for _ in range(m):
        i, j = rng.integers(0, n, size=2)
        if i == j:
            continue
        store.edges.append(CitationEdge(ids[i], ids[j], int(pubs[i])))
    for _ in range(extra_cycles):
        i, j = rng.integers(0, n, size=2)
        if i == j:
            continue
        store.edges.append(CitationEdge(ids[i], ids[j], int(pubs[i])))
        store.edges.append(CitationEdge(ids[j], ids[i], int(pubs[j])))
    return store


def test_random_graphs_come_out_acyclic():
    rng = np.random.default_rng(SEED + 1)
    for _ in range(25):
        store = _random_store(rng)
        dag = build_dag(store)
        pairs = list(zip(dag.citing.tolist(), dag.cited.tolist()))
        assert not _has_cycle(dag.n_nodes, pairs)
        # Nothing is lost: kept + removed == resolved input edges.
        assert dag.n_edges + len(dag.removed_edges) == len(store.edges)


def test_topological_order_witness():
    rng = np.random.default_rng(SEED + 2)
    store = _random_store(rng)
    dag = build_dag(store)
    position = {pid: k for k, pid in enumerate(dag.topo_order)}
    for u, v in zip(dag.citing.tolist(), dag.cited.tolist()):
        assert position[dag.node_ids[u]] < position[dag.node_ids[v]]


def test_snapshot_is_a_time_prefix():
    store = _store(
        [("a", "2000-06-01"), ("b", "2003-06-01"), ("c", "2006-06-01")],
        [("b", "a"), ("c", "a"), ("c", "b")])
    dag = build_dag(store)
    early = snapshot_at(dag, day_of_str("1999-12-31"))
    assert early.n_nodes == 0 and early.n_edges == 0
    mid = snapshot_at(dag, day_of_str("2003-06-01"))
    assert mid.node_ids == ["a", "b"]
    assert mid.n_edges == 1
    exact = snapshot_at(dag, day_of_str("2006-06-01"))
    assert exact.n_nodes == 3 and exact.n_edges == 3


def test_snapshot_counts_match_brute_force():
    rng = np.random.default_rng(SEED + 3)
    store = _random_store(rng)
    dag = build_dag(store)
    pubs = sorted(p.publication_day for p in store.patents.values())
    for day in rng.choice(pubs, size=8, replace=False):
        view = snapshot_at(dag, int(day))
        assert view.n_nodes == sum(1 for p in pubs if p <= day)
        assert view.n_edges == int(np.sum(dag.citation_day <= day))


def test_degree_stats_histograms():
    store = _store([("root", "1990-01-01")] + [(f"s{i}", "2000-01-01")
                                               for i in range(3)],
                   [(f"s{i}", "root") for i in range(3)])
    stats = degree_stats(build_dag(store))
    assert dict(stats.in_hist) == {0: 3, 3: 1}
    assert dict(stats.out_hist) == {0: 1, 1: 3}
    assert stats.in_degree.sum() == stats.out_degree.sum() == 3


def test_write_dag_csv(tmp_path):
    store = _store([("a", "2010-05-05", "2008-01-01"),
                    ("b", "2010-05-05", "2009-06-06")],
                   [("a", "b"), ("b", "a")])
    dag = build_dag(store)
    nodes, edges, removed = (tmp_path / "nodes.csv", tmp_path / "edges.csv",
                             tmp_path / "removed.csv")
    write_dag_csv(dag, nodes, edges, removed)
    assert nodes.read_text().splitlines()[1] == "a,2010-05-05"
    assert edges.read_text().splitlines()[1] == "b,a,2010-05-05"
    removed_lines = removed.read_text().splitlines()
    assert removed_lines[1].startswith("a,b,")
    assert removed_lines[1].endswith(REASON_OLDER_CITES_NEWER)


def test_build_is_insensitive_to_edge_insertion_order():
    rng = np.random.default_rng(SEED + 4)
    store = _random_store(rng)
    shuffled = CorpusStore(patents=dict(store.patents),
                           edges=list(store.edges))
    rng.shuffle(shuffled.edges)
    d1, d2 = build_dag(store), build_dag(shuffled)
    assert d1.node_ids == d2.node_ids
    assert np.array_equal(d1.citing, d2.citing)
    assert np.array_equal(d1.cited, d2.cited)
    assert np.array_equal(d1.citation_day, d2.citation_day)
    assert (sorted((e.citing_id, e.cited_id) for e in d1.removed_edges)
            == sorted((e.citing_id, e.cited_id) for e in d2.removed_edges))
