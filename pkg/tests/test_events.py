from __future__ import annotations

import warnings

import numpy as np
import pytest

from citerate.centrality import yearly_katz
from citerate.errors import SpellError
from citerate.events import (COVARIATE_ORDER, DUMMY_COVARIATES, SpellMatrix,
                             _years_of_days, build_spells, standardize)
from citerate.dates import day_of_str, year_of
from citerate.graph import build_dag
from citerate.model import CitationEdge, CorpusStore, Patent
from citerate.sim import SimConfig, simulate

SEED = 7203


def _store(patents, edges):
    """patents: Patent(...); edges: (citing, cited) with day from citing."""
    store = CorpusStore(patents={p.id: p for p in patents})
    for citing, cited in edges:
        store.edges.append(
            CitationEdge(citing, cited, store.patents[citing].publication_day))
    return store


def _rows_for(sm, cited_id):
    return [i for i, c in enumerate(sm.cited_ids) if c == cited_id]


def test_never_cited_patent_yields_single_censored_spell():
    store = _store([Patent("lonely", 50)], [])
    sm = build_spells(store, build_dag(store), horizon_day=400)
    assert len(sm) == 1
    assert (int(sm.start[0]), int(sm.stop[0])) == (50, 400)
    assert sm.event[0] == 0
    assert bool(sm.is_first[0])
    assert sm.citing_ids[0] is None


def test_citation_chain_spells():
    store = _store(
        [Patent("A", 100), Patent("P1", 150), Patent("P2", 300)],
        [("P1", "A"), ("P2", "A")])
    sm = build_spells(store, build_dag(store), horizon_day=400)
    rows = _rows_for(sm, "A")
    spans = [(int(sm.start[i]), int(sm.stop[i]), int(sm.event[i]))
             for i in rows]
    assert spans == [(100, 150, 1), (150, 300, 1), (300, 400, 0)]
    assert [bool(b) for b in sm.is_first[rows]] == [True, False, False]
    assert sm.citing_ids[rows[0]] == "P1"
    assert sm.citing_ids[rows[2]] is None
    days_col = sm.columns.index("days_after_publication")
    assert sm.X[rows, days_col].tolist() == [0.0, 50.0, 200.0]
    # The citing patents themselves are at risk from publication.
    assert [(int(sm.start[i]), int(sm.stop[i])) for i in _rows_for(sm, "P1")] \
        == [(150, 400)]


def test_accounting_identity_on_fixture():
    store = _store(
        [Patent("A", 100), Patent("P1", 150), Patent("P2", 300)],
        [("P1", "A"), ("P2", "A")])
    sm = build_spells(store, build_dag(store), horizon_day=400)
    received = {"A": 2, "P1": 0, "P2": 0}
    assert sm.n_events + sm.n_censored == sum(v + 1 for v in received.values())
    assert sm.n_events == 2 and sm.n_censored == 3


def test_patents_published_after_horizon_are_excluded():
    store = _store([Patent("early", 50), Patent("late", 500)], [])
    sm = build_spells(store, build_dag(store), horizon_day=400)
    assert sm.cited_ids == ["early"]


def test_horizon_before_last_citation_is_rejected():
    store = _store([Patent("A", 100), Patent("B", 300)], [("B", "A")])
    with pytest.raises(SpellError, match="precedes last citation"):
        build_spells(store, build_dag(store), horizon_day=200)


def test_default_horizon_is_last_observed_day():
    store = _store([Patent("A", 100), Patent("B", 300)], [("B", "A")])
    sm = build_spells(store, build_dag(store))
    assert sm.meta["horizon_day"] == 300
    store2 = _store([Patent("A", 100), Patent("late", 600)], [])
    assert build_spells(store2, build_dag(store2)).meta["horizon_day"] == 600


def test_empty_graph_is_rejected():
    with pytest.raises(SpellError, match="empty graph"):
        build_spells(CorpusStore(), build_dag(CorpusStore()))


def test_covariate_columns_and_dummy_flags():
    store = _store([Patent("A", 100, is_storage=True)], [])
    sm = build_spells(store, build_dag(store), horizon_day=200)
    assert tuple(sm.columns) == COVARIATE_ORDER
    for spec in sm.specs:
        assert spec.dummy == (spec.name in DUMMY_COVARIATES)
        assert not spec.standardized


def test_shared_subdomain_covariate():
    cited = Patent("A", 100, is_fuel_cells=True)
    sharer = Patent("S", 200, is_fuel_cells=True, is_storage=True)
    stranger = Patent("T", 300, is_storage=True)
    store = _store([cited, sharer, stranger], [("S", "A"), ("T", "A")])
    sm = build_spells(store, build_dag(store), horizon_day=400)
    col = sm.columns.index("shared_subdomain")
    rows = _rows_for(sm, "A")
    # event via S shares fuel_cells; event via T shares nothing; the
    # censored tail has no citing side and codes 0.
    assert sm.X[rows, col].tolist() == [1.0, 0.0, 0.0]
    assert [int(e) for e in sm.event[rows]] == [1, 1, 0]


def test_subdomain_dummies_and_cpc_come_from_cited_patent():
    cited = Patent("A", 100, is_distribution=True, total_cpc_classes=7)
    citing = Patent("B", 250, is_storage=True, total_cpc_classes=2)
    store = _store([cited, citing], [("B", "A")])
    sm = build_spells(store, build_dag(store), horizon_day=400)
    rows = _rows_for(sm, "A")
    sub = sm.select(["storage", "distribution", "production", "fuel_cells"])
    assert sub[rows].tolist() == [[0, 1, 0, 0], [0, 1, 0, 0]]
    assert sm.select(["total_cpc_classes"])[rows].ravel().tolist() == [7, 7]


def test_days_transform_log1p():
    store = _store([Patent("A", 100), Patent("B", 250)], [("B", "A")])
    linear = build_spells(store, build_dag(store), horizon_day=400)
    logged = build_spells(store, build_dag(store), horizon_day=400,
                          days_transform="log1p")
    col = linear.columns.index("days_after_publication")
    assert np.allclose(logged.X[:, col], np.log1p(linear.X[:, col]))
    assert logged.meta["days_transform"] == "log1p"
    with pytest.raises(SpellError, match="days_transform"):
        build_spells(store, build_dag(store), days_transform="sqrt")


def test_years_of_days_matches_calendar():
    rng = np.random.default_rng(SEED)
    days = rng.integers(0, 70000, size=300)
    got = _years_of_days(days)
    want = np.array([year_of(int(d)) for d in days])
    assert np.array_equal(got, want)


def test_katz_column_is_lagged_to_prior_year_snapshot():
    res = simulate(SimConfig(seed=11, n_seeds=40, horizon_years=6.0,
                             start_year=1995))
    dag = build_dag(res.store)
    yearly = yearly_katz(dag)
    sm = build_spells(res.store, dag, katz=yearly)
    col = sm.columns.index("katz")
    rng = np.random.default_rng(SEED + 1)
    rows = rng.choice(len(sm), size=min(200, len(sm)), replace=False)
    for i in rows:
        want = yearly.score_before(sm.cited_ids[i], int(sm.start[i]))
        assert sm.X[i, col] == want
    assert sm.meta["katz_years"] == yearly.years


def test_without_katz_the_column_is_zero():
    store = _store([Patent("A", 100), Patent("B", 250)], [("B", "A")])
    sm = build_spells(store, build_dag(store), horizon_day=400)
    assert not sm.X[:, sm.columns.index("katz")].any()


def test_cluster_groups_rows_by_cited_patent():
    store = _store(
        [Patent("A", 100), Patent("P1", 150), Patent("P2", 300)],
        [("P1", "A"), ("P2", "A")])
    sm = build_spells(store, build_dag(store), horizon_day=400)
    by_id = {}
    for i, cid in enumerate(sm.cited_ids):
        by_id.setdefault(cid, set()).add(int(sm.cluster[i]))
    assert all(len(v) == 1 for v in by_id.values())
    labels = [next(iter(v)) for v in by_id.values()]
    assert len(set(labels)) == len(by_id)


def test_select_preserves_request_order_and_names_unknowns():
    store = _store([Patent("A", 100)], [])
    sm = build_spells(store, build_dag(store), horizon_day=200)
    two = sm.select(["total_cpc_classes", "storage"])
    assert two.shape == (1, 2)
    with pytest.raises(SpellError, match="unknown covariates: ghost"):
        sm.select(["storage", "ghost"])
    with pytest.raises(SpellError, match="unknown covariate"):
        sm.spec_for("ghost")


def _two_point_store():
    # Two isolated patents whose cpc counts are 1 and 3: a {1,3} column.
    return _store([Patent("A", 100, total_cpc_classes=1),
                   Patent("B", 100, total_cpc_classes=3)], [])


def test_standardize_two_point_column():
    store = _two_point_store()
    sm = build_spells(store, build_dag(store), horizon_day=200)
    with pytest.warns(UserWarning):  # flat days/katz columns get dropped
        std = standardize(sm)
    col = std.columns.index("total_cpc_classes")
    assert sorted(std.X[:, col].tolist()) == [-1.0, 1.0]
    spec = std.spec_for("total_cpc_classes")
    assert spec.mean == 2.0 and spec.sd == 1.0  # population sd over {1, 3}
    assert spec.standardized


def test_standardize_uses_population_spread_on_random_data():
    res = simulate(SimConfig(seed=29, n_seeds=40, horizon_years=6.0))
    dag = build_dag(res.store)
    sm = build_spells(res.store, dag)
    with pytest.warns(UserWarning):  # the unused katz column is flat
        std = standardize(sm)
    for name in ("days_after_publication", "total_cpc_classes"):
        col = std.X[:, std.columns.index(name)]
        assert abs(col.mean()) < 1e-12
        assert abs(col.std(ddof=0) - 1.0) < 1e-12
        spec = std.spec_for(name)
        raw = sm.X[:, sm.columns.index(name)]
        assert spec.mean == pytest.approx(float(raw.mean()))
        assert spec.sd == pytest.approx(float(raw.std(ddof=0)))


def test_standardize_leaves_dummies_alone_by_default():
    store = _store([Patent("A", 100, is_storage=True),
                    Patent("B", 150), Patent("C", 220)],
                   [("B", "A"), ("C", "B")])
    sm = build_spells(store, build_dag(store), horizon_day=300)
    with pytest.warns(UserWarning):  # flat columns in this tiny fixture
        std = standardize(sm)
    col = std.columns.index("storage")
    assert set(np.unique(std.X[:, col])) <= {0.0, 1.0}
    assert not std.spec_for("storage").standardized
    with pytest.warns(UserWarning):
        both = standardize(sm, include_dummies=True)
    assert both.spec_for("storage").standardized


def test_zero_spread_columns_are_dropped_with_warning():
    store = _two_point_store()
    sm = build_spells(store, build_dag(store), horizon_day=200)
    # Both spells start at publication, so days-after is identically 0.
    with pytest.warns(UserWarning, match="zero spread"):
        std = standardize(sm)
    assert "days_after_publication" not in std.columns
    assert "katz" not in std.columns
    assert "total_cpc_classes" in std.columns


def test_standardize_is_idempotent():
    res = simulate(SimConfig(seed=3, n_seeds=25, horizon_years=5.0))
    dag = build_dag(res.store)
    sm = build_spells(res.store, dag)
    with pytest.warns(UserWarning):
        once = standardize(sm)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        twice = standardize(once)
    assert caught == []  # nothing left to scale or drop
    assert twice.columns == once.columns
    assert np.array_equal(twice.X, once.X)
    assert twice.specs == once.specs


def test_digest_tracks_content_not_cluster_labels():
    store = _store(
        [Patent("A", 100), Patent("P1", 150), Patent("P2", 300)],
        [("P1", "A"), ("P2", "A")])
    sm = build_spells(store, build_dag(store), horizon_day=400)
    again = build_spells(store, build_dag(store), horizon_day=400)
    assert sm.digest() == again.digest()

    relabeled = SpellMatrix(
        cited_ids=sm.cited_ids, citing_ids=sm.citing_ids, start=sm.start,
        stop=sm.stop, event=sm.event, is_first=sm.is_first,
        cluster=sm.cluster.max() - sm.cluster, columns=sm.columns,
        X=sm.X, specs=sm.specs, meta=sm.meta)
    assert relabeled.digest() == sm.digest()

    bumped = SpellMatrix(
        cited_ids=sm.cited_ids, citing_ids=sm.citing_ids, start=sm.start,
        stop=sm.stop, event=sm.event, is_first=sm.is_first,
        cluster=sm.cluster, columns=sm.columns,
        X=sm.X + 1e-9, specs=sm.specs, meta=sm.meta)
    assert bumped.digest() != sm.digest()


def test_durations_property():
    store = _store([Patent("A", 100), Patent("B", 250)], [("B", "A")])
    sm = build_spells(store, build_dag(store), horizon_day=400)
    assert np.array_equal(sm.durations, sm.stop - sm.start)
    assert np.all(sm.durations >= 0)
