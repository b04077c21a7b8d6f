"""Relational event spells: one row per inter-citation interval.

Every patent published by the observation horizon contributes a chain of
spells on the calendar axis: publication -> first citation received ->
second -> ... -> horizon. Each citation closes one spell with an event;
the final spell is censored at the horizon. A patent with no citations
contributes a single censored spell, so

    rows = events + censored = sum over patents (citations received + 1),

an accounting identity the builder enforces.

Covariates are measured at spell start (entry into the risk set):
subdomain membership dummies of the cited patent, days elapsed since its
publication, its CPC class count, whether the incoming citation comes
from a patent sharing a subdomain (0 on censored rows, which have no
citing side), and the cited patent's Katz score lagged to the latest
year-end snapshot strictly before the spell-start year, so the score
never reflects same-interval citations.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .centrality import YearlyKatz
from .errors import SpellError
from .graph import TemporalDag
from .model import SUBDOMAINS, CorpusStore

COVARIATE_ORDER = (
    "storage", "distribution", "production", "fuel_cells",
    "days_after_publication", "total_cpc_classes",
    "shared_subdomain", "katz",
)
DUMMY_COVARIATES = frozenset(
    ("storage", "distribution", "production", "fuel_cells",
     "shared_subdomain"))


@dataclass(frozen=True)
class CovariateSpec:
    """Column metadata; ``mean``/``sd`` are set once standardized."""

    name: str
    dummy: bool
    mean: float | None = None
    sd: float | None = None

    @property
    def standardized(self) -> bool:
        return self.mean is not None


@dataclass
class SpellMatrix:
    cited_ids: list[str]
    citing_ids: list[str | None]
    start: np.ndarray          # int64 calendar days
    stop: np.ndarray
    event: np.ndarray          # int8
    is_first: np.ndarray       # bool, spell starts at publication
    cluster: np.ndarray        # int64, one cluster per cited patent
    columns: list[str]
    X: np.ndarray              # float64 (n, p)
    specs: list[CovariateSpec]
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.start)

    @property
    def n_events(self) -> int:
        return int(self.event.sum())

    @property
    def n_censored(self) -> int:
        return len(self) - self.n_events

    @property
    def durations(self) -> np.ndarray:
        return self.stop - self.start

    def spec_for(self, name: str) -> CovariateSpec:
        try:
            return self.specs[self.columns.index(name)]
        except ValueError:
            raise SpellError(f"unknown covariate: {name!r}") from None

    def select(self, names: list[str]) -> np.ndarray:
        """Covariate submatrix in the requested order."""
        missing = [n for n in names if n not in self.columns]
        if missing:
            raise SpellError("unknown covariates: " + ", ".join(missing))
        idx = [self.columns.index(n) for n in names]
        return self.X[:, idx]

    def digest(self) -> str:
        """Content hash used to verify two fits saw the same data.

        Cluster labels are left out on purpose: the partition is fully
        determined by the cited ids, which are hashed, while the integer
        labels depend on construction order.
        """
        h = hashlib.sha256()
        h.update(json.dumps({"columns": self.columns, "n": len(self)},
                            sort_keys=True).encode())
        h.update("\n".join(self.cited_ids).encode())
        for arr in (self.start, self.stop, self.event.astype(np.int64)):
            h.update(np.ascontiguousarray(arr, dtype=np.int64).tobytes())
        h.update(np.ascontiguousarray(self.X, dtype=np.float64).tobytes())
        return h.hexdigest()


def _years_of_days(days: np.ndarray) -> np.ndarray:
    base = np.datetime64("1841-01-01", "D")
    stamps = base + days.astype("timedelta64[D]")
    return stamps.astype("datetime64[Y]").astype(np.int64) + 1970


def build_spells(store: CorpusStore,
                 dag: TemporalDag,
                 katz: YearlyKatz | None = None,
                 horizon_day: int | None = None,
                 days_transform: str = "linear") -> SpellMatrix:
    """Assemble the spell matrix from the citation DAG.

    ``horizon_day`` defaults to the last day observed in the corpus. A
    horizon earlier than the last citation is rejected rather than
    silently truncating events. ``days_transform`` can be ``"log1p"`` to
    compress the elapsed-days covariate before standardization.
    """
    if days_transform not in ("linear", "log1p"):
        raise SpellError(f"unknown days_transform: {days_transform!r}")
    n = dag.n_nodes
    if n == 0:
        raise SpellError("empty graph: nothing to build spells from")
    pub = dag.pub_day
    last_cite = int(dag.citation_day[-1]) if dag.n_edges else None
    if horizon_day is None:
        horizon_day = int(pub[-1]) if last_cite is None else max(int(pub[-1]), last_cite)
    if last_cite is not None and horizon_day < last_cite:
        raise SpellError(
            f"horizon day {horizon_day} precedes last citation day {last_cite}")

    flags = np.zeros((n, 4), dtype=np.int8)
    cpc = np.ones(n, dtype=np.int64)
    for pid, p in store.patents.items():
        i = dag.index_of[pid]
        flags[i] = p.flags()
        cpc[i] = p.total_cpc_classes

    # Event spells: group incoming citations by cited patent in day order.
    order = np.lexsort((dag.citing, dag.citation_day, dag.cited))
    g_cited = dag.cited[order]
    g_day = dag.citation_day[order]
    g_citing = dag.citing[order]
    m = len(g_cited)

    ev_start = np.empty(m, dtype=np.int64)
    if m:
        ev_start[1:] = g_day[:-1]
        first_of_group = np.ones(m, dtype=bool)
        first_of_group[1:] = g_cited[1:] != g_cited[:-1]
        ev_start[first_of_group] = pub[g_cited[first_of_group]]

    # Censored spells: every published patent gets one, starting at its
    # last received citation (or publication when it has none).
    eligible = pub <= horizon_day
    cens_start = pub.copy()
    if m:
        last_of_group = np.ones(m, dtype=bool)
        last_of_group[:-1] = g_cited[:-1] != g_cited[1:]
        cens_start[g_cited[last_of_group]] = g_day[last_of_group]
    cens_nodes = np.flatnonzero(eligible)

    cited_idx = np.concatenate([g_cited, cens_nodes])
    citing_idx = np.concatenate([g_citing, np.full(len(cens_nodes), -1)])
    start = np.concatenate([ev_start, cens_start[cens_nodes]])
    stop = np.concatenate([g_day, np.full(len(cens_nodes), horizon_day)])
    event = np.concatenate([np.ones(m, dtype=np.int8),
                            np.zeros(len(cens_nodes), dtype=np.int8)])

    rank = np.lexsort((1 - event, stop, start, cited_idx))
    cited_idx, citing_idx = cited_idx[rank], citing_idx[rank]
    start, stop, event = start[rank], stop[rank], event[rank]
    is_first = start == pub[cited_idx]

    n_rows = len(start)
    if int(event.sum()) != dag.n_edges or n_rows - int(event.sum()) != len(cens_nodes):
        raise SpellError("spell accounting identity violated")

    X = np.zeros((n_rows, len(COVARIATE_ORDER)))
    X[:, 0:4] = flags[cited_idx]
    days_after = (start - pub[cited_idx]).astype(np.float64)
    if days_transform == "log1p":
        days_after = np.log1p(days_after)
    X[:, 4] = days_after
    X[:, 5] = cpc[cited_idx]
    ev_mask = event == 1
    shared = np.zeros(n_rows)
    if ev_mask.any():
        both = flags[cited_idx[ev_mask]] & flags[citing_idx[ev_mask]]
        shared[ev_mask] = both.any(axis=1)
    X[:, 6] = shared
    if katz is not None and katz.years:
        X[:, 7] = _lagged_katz(katz, cited_idx, start)

    cluster, _ = _factorize(cited_idx)
    node_ids = dag.node_ids
    sm = SpellMatrix(
        cited_ids=[node_ids[i] for i in cited_idx],
        citing_ids=[node_ids[i] if i >= 0 else None for i in citing_idx],
        start=start,
        stop=stop,
        event=event,
        is_first=is_first,
        cluster=cluster,
        columns=list(COVARIATE_ORDER),
        X=X,
        specs=[CovariateSpec(name, name in DUMMY_COVARIATES)
               for name in COVARIATE_ORDER],
        meta={
            "horizon_day": int(horizon_day),
            "days_transform": days_transform,
            "katz_years": list(katz.years) if katz is not None else [],
            "subdomains": list(SUBDOMAINS),
        },
    )
    return sm


def _factorize(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    uniq, inv = np.unique(values, return_inverse=True)
    return inv.astype(np.int64), uniq


def _lagged_katz(katz: YearlyKatz, cited_idx: np.ndarray,
                 start: np.ndarray) -> np.ndarray:
    """Vectorized ``score_before``: latest snapshot year < spell-start year."""
    years = np.asarray(katz.years, dtype=np.int64)
    target = _years_of_days(start) - 1
    pos = np.searchsorted(years, target, side="right") - 1
    out = np.zeros(len(start))
    for j in np.unique(pos):
        if j < 0:
            continue
        sel = pos == j
        idx = cited_idx[sel]
        in_snap = idx < katz.n_nodes[j]
        vals = np.zeros(int(sel.sum()))
        vals[in_snap] = katz.scores[j][idx[in_snap]]
        out[sel] = vals
    return out


def standardize(sm: SpellMatrix, include_dummies: bool = False) -> SpellMatrix:
    """Center and scale continuous covariates to unit population spread.

    Uses the population standard deviation (ddof=0). Dummy columns are
    left alone unless ``include_dummies``. Columns with zero spread carry
    no information for a relative-rate model and are dropped with a
    warning. Already-standardized columns are passed through untouched,
    so applying this twice is a no-op.
    """
    keep: list[int] = []
    specs: list[CovariateSpec] = []
    X = sm.X.copy()
    for j, spec in enumerate(sm.specs):
        col = X[:, j]
        if spec.standardized or (spec.dummy and not include_dummies):
            keep.append(j)
            specs.append(spec)
            continue
        mean = float(col.mean())
        sd = float(col.std(ddof=0))
        if sd == 0.0:
            warnings.warn(
                f"covariate {spec.name!r} has zero spread; dropped",
                stacklevel=2)
            continue
        X[:, j] = (col - mean) / sd
        keep.append(j)
        specs.append(replace(spec, mean=mean, sd=sd))
    return SpellMatrix(
        cited_ids=sm.cited_ids,
        citing_ids=sm.citing_ids,
        start=sm.start,
        stop=sm.stop,
        event=sm.event,
        is_first=sm.is_first,
        cluster=sm.cluster,
        columns=[sm.columns[j] for j in keep],
        X=X[:, keep],
        specs=specs,
        meta=dict(sm.meta),
    )
