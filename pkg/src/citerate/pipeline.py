"""Stage pipeline with digest-keyed artifact caching.

A run produces exactly seven artifacts under the output directory —
corpus, dag, katz, spells, km, fits, report — each a directory of plain
files. manifest.json records, per stage, a cache key (the sha256 of the
stage's configuration plus upstream artifact digests) and the sha256 of
every file the stage wrote. A stage whose key matches and whose files
still hash correctly is loaded from disk instead of recomputed. Nothing
under the output directory carries a timestamp, so identical inputs
yield byte-identical artifacts and manifest.

Progress is logged as one JSON object per line with stable fields only.
"""

from __future__ import annotations

import hashlib
import io
import json
import logging
import os

import numpy as np
import pandas as pd

from . import centrality, coxph, events, graph, ingest, sim, survival
from .config import TOKEN_ENV_VAR, canonical_json
from .errors import ConfigError, FitError, PipelineError
from .events import CovariateSpec, SpellMatrix
from .model import CorpusStore
from .report import build_report

log = logging.getLogger("citerate")

ARTIFACTS = ("corpus", "dag", "katz", "spells", "km", "fits", "report")


def _sha_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _sha_text(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def _clean_provenance(obj):
    """Drop wall-clock fields so artifacts stay reproducible."""
    if isinstance(obj, dict):
        return {k: _clean_provenance(v) for k, v in obj.items()
                if k != "ingested_at"}
    if isinstance(obj, list):
        return [_clean_provenance(v) for v in obj]
    return obj


def _log_stage(stage: str, status: str, **fields) -> None:
    payload = {"event": "stage", "stage": stage, "status": status}
    payload.update(fields)
    log.info(json.dumps(payload, sort_keys=True))


class Pipeline:
    """Runs stages in dependency order, reusing cached artifacts."""

    def __init__(self, cfg: dict, outdir: str, seed: int | None = None):
        self.cfg = cfg
        self.outdir = outdir
        self.seed = seed
        os.makedirs(outdir, exist_ok=True)
        self._manifest = self._load_manifest()
        self._store: CorpusStore | None = None
        self._truth: dict | None = None
        self._dag: graph.TemporalDag | None = None
        self._katz: centrality.YearlyKatz | None = None
        self._spells: SpellMatrix | None = None
        self._curves: dict[str, survival.KMCurve] | None = None
        self._fits: dict[str, coxph.FitResult] | None = None
        self._lr: dict[str, coxph.LRResult] | None = None
        self._zph: dict[str, coxph.ZphResult] | None = None
        self._conc: dict[str, coxph.ConcordanceResult] | None = None

    # -- manifest plumbing ------------------------------------------------

    def _manifest_path(self) -> str:
        return os.path.join(self.outdir, "manifest.json")

    def _load_manifest(self) -> dict:
        path = self._manifest_path()
        if os.path.exists(path):
            with open(path, encoding="utf-8") as f:
                return json.load(f)
        return {"version": 1, "stages": {}}

    def _save_manifest(self) -> None:
        text = json.dumps(self._manifest, sort_keys=True, indent=2) + "\n"
        with open(self._manifest_path(), "w", encoding="utf-8") as f:
            f.write(text)

    def _path(self, rel: str) -> str:
        return os.path.join(self.outdir, rel)

    def _stage_entry(self, stage: str) -> dict | None:
        return self._manifest["stages"].get(stage)

    def _cache_ok(self, stage: str, key: str) -> bool:
        entry = self._stage_entry(stage)
        if entry is None or entry.get("key") != key:
            return False
        for rel, digest in entry["files"].items():
            path = self._path(rel)
            if not os.path.exists(path) or _sha_file(path) != digest:
                return False
        return True

    def _record_stage(self, stage: str, key: str, rel_files: list[str]) -> None:
        files = {rel: _sha_file(self._path(rel)) for rel in rel_files}
        self._manifest["stages"][stage] = {"key": key, "files": files}
        self._save_manifest()

    def stage_digest(self, stage: str) -> str:
        entry = self._stage_entry(stage)
        if entry is None:
            raise PipelineError(f"stage {stage!r} has not produced artifacts")
        lines = sorted(f"{rel}:{sha}" for rel, sha in entry["files"].items())
        return _sha_text("\n".join(lines))

    def _key(self, payload) -> str:
        return _sha_text(canonical_json(payload))

    def _ensure_dir(self, name: str) -> str:
        path = self._path(name)
        os.makedirs(path, exist_ok=True)
        return path

    # -- corpus ------------------------------------------------------------

    def _sim_config(self) -> sim.SimConfig:
        payload = dict(self.cfg.get("simulate") or {})
        if self.seed is not None:
            payload["seed"] = self.seed
        return sim.SimConfig.from_dict(payload)

    def corpus(self) -> CorpusStore:
        if self._store is not None:
            return self._store
        ingest_cfg = self.cfg.get("ingest")
        sim_cfg = self.cfg.get("simulate")
        if ingest_cfg is None and sim_cfg is None:
            entry = self._stage_entry("corpus")
            if entry is not None and self._cache_ok("corpus", entry["key"]):
                self._load_corpus()
                _log_stage("corpus", "cached", patents=len(self._store.patents))
                return self._store
            raise PipelineError(
                "no corpus source configured and no corpus artifact found; "
                "run 'ingest' or 'simulate' first")

        if sim_cfg is not None:
            simcfg = self._sim_config()
            key = self._key({"simulate": simcfg.__dict__})
        else:
            key = self._key({"ingest": ingest_cfg})
        if self._cache_ok("corpus", key):
            self._load_corpus()
            _log_stage("corpus", "cached", patents=len(self._store.patents))
            return self._store

        rel_files = []
        self._ensure_dir("corpus")
        if sim_cfg is not None:
            result = sim.simulate(simcfg)
            self._store, self._truth = result.store, result.truth
        else:
            self._store, raw_rel = self._ingest(ingest_cfg)
            rel_files.extend(raw_rel)
            self._truth = None

        ingest.write_csv(self._store, self._path("corpus/patents.csv"),
                         self._path("corpus/edges.csv"))
        meta = {
            "self_citations": self._store.self_citations,
            "skipped_records": self._store.skipped_records,
            "unresolved_edges": sorted(self._store.unresolved_edges),
            "provenance": _clean_provenance(self._store.provenance),
            "truth": self._truth,
        }
        with open(self._path("corpus/meta.json"), "w", encoding="utf-8") as f:
            json.dump(meta, f, sort_keys=True, indent=2)
            f.write("\n")
        rel_files += ["corpus/patents.csv", "corpus/edges.csv",
                      "corpus/meta.json"]
        self._record_stage("corpus", key, rel_files)
        _log_stage("corpus", "computed", patents=len(self._store.patents),
                   edges=len(self._store.edges))
        return self._store

    def _ingest(self, ingest_cfg: dict) -> tuple[CorpusStore, list[str]]:
        if "jsonl" in ingest_cfg:
            return ingest.parse_jsonl(ingest_cfg["jsonl"]), []
        if "patents_csv" in ingest_cfg:
            return ingest.parse_csv_edges(ingest_cfg["patents_csv"],
                                          ingest_cfg["edges_csv"]), []
        api = ingest_cfg["api"]
        token = os.environ.get(TOKEN_ENV_VAR)
        if not token:
            raise ConfigError(
                f"API ingestion needs the {TOKEN_ENV_VAR} environment "
                "variable; it is never read from the config file")
        from .fetch import fetch_scroll, write_jsonl

        result = fetch_scroll(api["endpoint"], api["query"], token,
                              include=api.get("include"))
        raw_path = self._path("corpus/raw.jsonl")
        write_jsonl(result.records, raw_path)
        return ingest.parse_jsonl(raw_path), ["corpus/raw.jsonl"]

    def _load_corpus(self) -> None:
        store = ingest.parse_csv_edges(self._path("corpus/patents.csv"),
                                       self._path("corpus/edges.csv"))
        with open(self._path("corpus/meta.json"), encoding="utf-8") as f:
            meta = json.load(f)
        store.self_citations = meta.get("self_citations", 0)
        store.skipped_records = meta.get("skipped_records", 0)
        store.provenance = meta.get("provenance", {})
        self._truth = meta.get("truth")
        self._store = store

    # -- dag ----------------------------------------------------------------

    def dag(self) -> graph.TemporalDag:
        if self._dag is not None:
            return self._dag
        store = self.corpus()
        self._dag = graph.build_dag(store)
        key = self._key({"corpus": self.stage_digest("corpus")})
        if self._cache_ok("dag", key):
            _log_stage("dag", "cached", nodes=self._dag.n_nodes)
            return self._dag
        self._ensure_dir("dag")
        graph.write_dag_csv(self._dag, self._path("dag/nodes.csv"),
                            self._path("dag/edges.csv"),
                            self._path("dag/removed.csv"))
        self._record_stage("dag", key, ["dag/nodes.csv", "dag/edges.csv",
                                        "dag/removed.csv"])
        _log_stage("dag", "computed", nodes=self._dag.n_nodes,
                   edges=self._dag.n_edges,
                   removed=len(self._dag.removed_edges))
        return self._dag

    # -- katz ---------------------------------------------------------------

    def katz(self) -> centrality.YearlyKatz:
        if self._katz is not None:
            return self._katz
        dag = self.dag()
        key = self._key({"dag": self.stage_digest("dag"),
                         "katz": self.cfg["katz"]})
        if self._cache_ok("katz", key):
            self._katz = self._load_katz(dag)
            _log_stage("katz", "cached", years=len(self._katz.years))
            return self._katz
        self._katz = centrality.yearly_katz(dag,
                                            years=self.cfg["katz"]["years"],
                                            alpha=self.cfg["katz"]["alpha"])
        self._ensure_dir("katz")
        pd.DataFrame(self._katz.year_summary()).to_csv(
            self._path("katz/summary.csv"), index=False)
        frames = []
        node_ids = np.asarray(dag.node_ids, dtype=object)
        for j, year in enumerate(self._katz.years):
            scores = self._katz.scores[j]
            nz = np.flatnonzero(scores)
            if len(nz):
                frames.append(pd.DataFrame({"year": year,
                                            "id": node_ids[nz],
                                            "score": scores[nz]}))
        if frames:
            scores_df = pd.concat(frames, ignore_index=True)
        else:
            scores_df = pd.DataFrame(columns=["year", "id", "score"])
        scores_df.to_csv(self._path("katz/scores.csv"), index=False)
        self._record_stage("katz", key, ["katz/summary.csv",
                                         "katz/scores.csv"])
        _log_stage("katz", "computed", years=len(self._katz.years))
        return self._katz

    def _load_katz(self, dag: graph.TemporalDag) -> centrality.YearlyKatz:
        summary = pd.read_csv(self._path("katz/summary.csv"),
                              float_precision="round_trip")
        scores_df = pd.read_csv(self._path("katz/scores.csv"),
                                float_precision="round_trip")
        years = summary["year"].astype(int).tolist()
        n_nodes = summary["nodes"].astype(int).tolist()
        scores = []
        grouped = dict(tuple(scores_df.groupby("year"))) if len(scores_df) \
            else {}
        for year, n in zip(years, n_nodes):
            vec = np.zeros(n)
            chunk = grouped.get(year)
            if chunk is not None:
                idx = np.array([dag.index_of[i] for i in chunk["id"]],
                               dtype=np.int64)
                vec[idx] = chunk["score"].to_numpy()
            scores.append(vec)
        return centrality.YearlyKatz(
            dag, years, scores, n_nodes,
            summary["alpha"].astype(float).tolist(),
            summary["max_walk_length"].astype(int).tolist(),
            summary["degenerate"].astype(bool).tolist())

    # -- spells ---------------------------------------------------------------

    def spells(self) -> SpellMatrix:
        if self._spells is not None:
            return self._spells
        dag = self.dag()
        katz = self.katz()
        key = self._key({"dag": self.stage_digest("dag"),
                         "katz": self.stage_digest("katz"),
                         "spells": self.cfg["spells"],
                         "standardize": self.cfg["standardize"]})
        if self._cache_ok("spells", key):
            self._spells = self._load_spells()
            _log_stage("spells", "cached", rows=len(self._spells))
            return self._spells
        store = self.corpus()
        sm = events.build_spells(store, dag, katz,
                                 horizon_day=self.cfg["spells"]["horizon_day"],
                                 days_transform=self.cfg["spells"]["days_transform"])
        if self.cfg["standardize"]:
            sm = events.standardize(sm)
        self._spells = sm
        self._ensure_dir("spells")
        df = pd.DataFrame({
            "cited_id": sm.cited_ids,
            "citing_id": ["" if c is None else c for c in sm.citing_ids],
            "start": sm.start,
            "stop": sm.stop,
            "event": sm.event,
            "is_first": sm.is_first,
        })
        for j, name in enumerate(sm.columns):
            df[name] = sm.X[:, j]
        df.to_csv(self._path("spells/spells.csv"), index=False)
        meta = {
            "columns": sm.columns,
            "specs": [{"name": s.name, "dummy": s.dummy, "mean": s.mean,
                       "sd": s.sd} for s in sm.specs],
            "meta": sm.meta,
            "digest": sm.digest(),
        }
        with open(self._path("spells/meta.json"), "w", encoding="utf-8") as f:
            json.dump(meta, f, sort_keys=True, indent=2)
            f.write("\n")
        self._record_stage("spells", key, ["spells/spells.csv",
                                           "spells/meta.json"])
        _log_stage("spells", "computed", rows=len(sm), events=sm.n_events)
        return self._spells

    def _load_spells(self) -> SpellMatrix:
        with open(self._path("spells/meta.json"), encoding="utf-8") as f:
            meta = json.load(f)
        df = pd.read_csv(self._path("spells/spells.csv"),
                         keep_default_na=False,
                         dtype={"cited_id": str, "citing_id": str},
                         float_precision="round_trip")
        columns = meta["columns"]
        X = np.column_stack([df[name].to_numpy(dtype=np.float64)
                             for name in columns]) if columns else \
            np.empty((len(df), 0))
        cited = df["cited_id"].tolist()
        cluster, _ = events._factorize(np.asarray(cited, dtype=object))
        sm = SpellMatrix(
            cited_ids=cited,
            citing_ids=[c if c else None for c in df["citing_id"]],
            start=df["start"].to_numpy(dtype=np.int64),
            stop=df["stop"].to_numpy(dtype=np.int64),
            event=df["event"].to_numpy(dtype=np.int8),
            is_first=df["is_first"].map(
                {"True": True, "False": False, True: True,
                 False: False}).to_numpy(dtype=bool),
            cluster=cluster,
            columns=columns,
            X=X,
            specs=[CovariateSpec(s["name"], s["dummy"], s["mean"], s["sd"])
                   for s in meta["specs"]],
            meta=meta["meta"],
        )
        if sm.digest() != meta["digest"]:
            raise PipelineError("spell artifact does not round-trip; "
                                "delete the spells directory and rerun")
        return sm

    # -- km ----------------------------------------------------------------

    def km(self) -> dict[str, survival.KMCurve]:
        if self._curves is not None:
            return self._curves
        sm = self.spells()
        key = self._key({"spells": self.stage_digest("spells"),
                         "km": self.cfg["km"]})
        if self._cache_ok("km", key):
            self._curves = self._load_km()
            _log_stage("km", "cached", groups=len(self._curves))
            return self._curves
        self._curves = survival.km_by_group(
            sm, first_only=self.cfg["km"]["first_only"])
        self._ensure_dir("km")
        rows = []
        for name, curve in self._curves.items():
            for i in range(len(curve.times)):
                rows.append({"group": name,
                             "time": curve.times[i],
                             "n_risk": curve.n_risk[i],
                             "n_event": curve.n_event[i],
                             "survival": curve.survival[i]})
        pd.DataFrame(rows, columns=["group", "time", "n_risk", "n_event",
                                    "survival"]).to_csv(
            self._path("km/curves.csv"), index=False)
        from .report import km_section

        km_section(self._curves).to_csv(self._path("km/summary.csv"),
                                        index=False)
        self._record_stage("km", key, ["km/curves.csv", "km/summary.csv"])
        _log_stage("km", "computed", groups=len(self._curves))
        return self._curves

    def _load_km(self) -> dict[str, survival.KMCurve]:
        curves_df = pd.read_csv(self._path("km/curves.csv"),
                                float_precision="round_trip")
        summary = pd.read_csv(self._path("km/summary.csv"),
                              float_precision="round_trip")
        out: dict[str, survival.KMCurve] = {}
        for _, row in summary.iterrows():
            name = row["group"]
            chunk = curves_df[curves_df["group"] == name]
            out[name] = survival.KMCurve(
                label=name,
                times=chunk["time"].to_numpy(dtype=np.float64),
                n_risk=chunk["n_risk"].to_numpy(dtype=np.int64),
                n_event=chunk["n_event"].to_numpy(dtype=np.int64),
                survival=chunk["survival"].to_numpy(dtype=np.float64),
                n_total=int(row["spells"]),
                n_events_total=int(row["events"]),
            )
        return out

    # -- fits ----------------------------------------------------------------

    def fits(self) -> dict[str, coxph.FitResult]:
        if self._fits is not None:
            return self._fits
        sm = self.spells()
        key = self._key({"spells": self.stage_digest("spells"),
                         "models": self.cfg["models"],
                         "comparisons": self.cfg["comparisons"],
                         "diagnostics": self.cfg["diagnostics"]})
        if self._cache_ok("fits", key):
            self._load_fits()
            _log_stage("fits", "cached", models=len(self._fits))
            return self._fits

        self._fits = {}
        self._zph = {}
        self._conc = {}
        diagnostics: dict[str, dict] = {}
        for name, spec in self.cfg["models"].items():
            fit = coxph.fit_cox(sm, spec["covariates"],
                                ties=spec.get("ties", "efron"))
            self._fits[name] = fit
            diag: dict = {}
            try:
                zph = coxph.schoenfeld_test(
                    sm, fit, transform=self.cfg["diagnostics"]["transform"])
                self._zph[name] = zph
                diag["zph"] = {"transform": zph.transform, "rows": zph.rows,
                               "global_chi2": zph.global_chi2,
                               "global_df": zph.global_df,
                               "global_pvalue": zph.global_pvalue}
            except FitError as exc:
                diag["zph_error"] = str(exc)
            if self.cfg["diagnostics"].get("concordance", True):
                conc = coxph.concordance(sm, fit)
                self._conc[name] = conc
                diag["concordance"] = {
                    "value": conc.value, "concordant": conc.concordant,
                    "discordant": conc.discordant,
                    "tied_score": conc.tied_score,
                    "comparable": conc.comparable, "caveat": conc.caveat}
            diagnostics[name] = diag

        self._lr = {}
        lr_payload = {}
        for comp in self.cfg["comparisons"]:
            res = coxph.lr_test(self._fits[comp["full"]],
                                self._fits[comp["reduced"]],
                                allow_quasi=comp.get("allow_quasi", False))
            self._lr[comp["name"]] = res
            lr_payload[comp["name"]] = {
                "full": comp["full"], "reduced": comp["reduced"],
                "statistic": res.statistic, "df": res.df,
                "pvalue": res.pvalue, "quasi": res.quasi}

        self._ensure_dir("fits")
        rel_files = []
        for name, fit in self._fits.items():
            rel = f"fits/{name}.json"
            with open(self._path(rel), "w", encoding="utf-8") as f:
                json.dump(fit.to_dict(), f, sort_keys=True, indent=2)
                f.write("\n")
            rel_files.append(rel)
        for rel, payload in (("fits/lr.json", lr_payload),
                             ("fits/diagnostics.json", diagnostics)):
            with open(self._path(rel), "w", encoding="utf-8") as f:
                json.dump(payload, f, sort_keys=True, indent=2)
                f.write("\n")
            rel_files.append(rel)
        self._record_stage("fits", key, rel_files)
        _log_stage("fits", "computed", models=len(self._fits))
        return self._fits

    def _load_fits(self) -> None:
        self._fits = {}
        for name in self.cfg["models"]:
            with open(self._path(f"fits/{name}.json"), encoding="utf-8") as f:
                self._fits[name] = coxph.FitResult.from_dict(json.load(f))
        with open(self._path("fits/lr.json"), encoding="utf-8") as f:
            lr_payload = json.load(f)
        self._lr = {name: coxph.LRResult(v["statistic"], v["df"],
                                         v["pvalue"], v["quasi"])
                    for name, v in lr_payload.items()}
        with open(self._path("fits/diagnostics.json"), encoding="utf-8") as f:
            diagnostics = json.load(f)
        self._zph = {}
        self._conc = {}
        for name, diag in diagnostics.items():
            if "zph" in diag:
                z = diag["zph"]
                self._zph[name] = coxph.ZphResult(
                    z["transform"], z["rows"], z["global_chi2"],
                    z["global_df"], z["global_pvalue"])
            if "concordance" in diag:
                c = diag["concordance"]
                self._conc[name] = coxph.ConcordanceResult(
                    c["value"], c["concordant"], c["discordant"],
                    c["tied_score"], c["comparable"], c["caveat"])

    # -- report ---------------------------------------------------------------

    def report(self) -> str:
        curves = self.km()
        fits = self.fits()
        key = self._key({s: self.stage_digest(s)
                         for s in ("corpus", "dag", "katz", "spells", "km",
                                   "fits")})
        if self._cache_ok("report", key):
            _log_stage("report", "cached")
            return self._path("report/report.md")
        rep = build_report(self.corpus(), self.dag(), self.katz(),
                           self.spells(), curves, fits,
                           lr_results=self._lr, zph_results=self._zph,
                           concordances=self._conc)
        written = rep.write(self._path("report"))
        rel = [os.path.relpath(p, self.outdir) for p in written]
        self._record_stage("report", key, sorted(rel))
        _log_stage("report", "computed", sections=len(rep.sections))
        return self._path("report/report.md")

    def run_all(self) -> None:
        self.corpus()
        self.dag()
        self.katz()
        self.spells()
        self.km()
        self.fits()
        self.report()
