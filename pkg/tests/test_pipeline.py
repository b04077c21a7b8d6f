from __future__ import annotations

import copy
import hashlib
import io
import json
import logging
import os

import numpy as np
import pytest

from citerate import cli, ingest
from citerate.config import DEFAULTS, load_config
from citerate.errors import ConfigError, PipelineError
from citerate.pipeline import ARTIFACTS, Pipeline
from citerate.sim import SimConfig, simulate

SIM = {
    "seed": 2024,
    "n_seeds": 40,
    "horizon_years": 6.0,
    "start_year": 1995,
    "base_rates": {"storage": 0.55, "distribution": 0.45,
                   "production": 0.5, "fuel_cells": 0.5},
    "beta_cpc": 0.25,
}


def _cfg(**overrides) -> dict:
    cfg = copy.deepcopy(DEFAULTS)
    cfg["simulate"] = dict(SIM)
    cfg.update(overrides)
    return cfg


def _tree_hashes(root) -> dict[str, str]:
    out = {}
    for dirpath, _, files in os.walk(root):
        for name in files:
            path = os.path.join(dirpath, name)
            rel = os.path.relpath(path, root)
            with open(path, "rb") as f:
                out[rel] = hashlib.sha256(f.read()).hexdigest()
    return out


def _run_cli(argv) -> tuple[int, list[dict]]:
    """Run the CLI with a captured log stream; returns (exit code, log
    records parsed as JSON objects)."""
    logger = logging.getLogger("citerate")
    stream = io.StringIO()
    handler = logging.StreamHandler(stream)
    handler.setFormatter(logging.Formatter("%(message)s"))
    old_handlers = logger.handlers[:]
    logger.handlers = [handler]
    logger.setLevel(logging.INFO)
    logger.propagate = False
    try:
        code = cli.main(argv)
    finally:
        logger.handlers = old_handlers
    lines = [json.loads(ln) for ln in stream.getvalue().splitlines() if ln]
    return code, lines


# ---------------------------------------------------------------------------
# full runs and caching


def test_run_all_materializes_every_artifact(tmp_path):
    out = str(tmp_path / "run")
    Pipeline(_cfg(), out).run_all()
    for artifact in ARTIFACTS:
        assert os.path.isdir(os.path.join(out, artifact)), artifact
    with open(os.path.join(out, "manifest.json"), encoding="utf-8") as f:
        manifest = json.load(f)
    assert set(manifest["stages"]) == set(ARTIFACTS)
    report_md = os.path.join(out, "report", "report.md")
    with open(report_md, encoding="utf-8") as f:
        text = f.read()
    assert "## model_comparison" in text
    assert "## km" in text


def test_second_run_is_served_from_cache(tmp_path):
    out = str(tmp_path / "run")
    Pipeline(_cfg(), out).run_all()
    before = _tree_hashes(out)
    pipeline = Pipeline(_cfg(), out)
    pipeline.run_all()
    after = _tree_hashes(out)
    assert before == after


def test_fresh_directories_agree_byte_for_byte(tmp_path):
    a = str(tmp_path / "a")
    b = str(tmp_path / "b")
    Pipeline(_cfg(), a).run_all()
    Pipeline(_cfg(), b).run_all()
    assert _tree_hashes(a) == _tree_hashes(b)


def test_seed_override_changes_the_corpus_key(tmp_path):
    a = str(tmp_path / "a")
    b = str(tmp_path / "b")
    Pipeline(_cfg(), a, seed=1).run_all()
    Pipeline(_cfg(), b, seed=2).run_all()
    with open(os.path.join(a, "manifest.json"), encoding="utf-8") as f:
        ma = json.load(f)
    with open(os.path.join(b, "manifest.json"), encoding="utf-8") as f:
        mb = json.load(f)
    assert ma["stages"]["corpus"]["key"] != mb["stages"]["corpus"]["key"]


def test_config_change_invalidates_downstream_stages(tmp_path):
    out = str(tmp_path / "run")
    Pipeline(_cfg(), out).run_all()
    with open(os.path.join(out, "manifest.json"), encoding="utf-8") as f:
        before = json.load(f)["stages"]
    cfg = _cfg(km={"first_only": True})
    Pipeline(cfg, out).run_all()
    with open(os.path.join(out, "manifest.json"), encoding="utf-8") as f:
        after = json.load(f)["stages"]
    assert before["corpus"]["key"] == after["corpus"]["key"]
    assert before["spells"]["key"] == after["spells"]["key"]
    assert before["km"]["key"] != after["km"]["key"]
    assert before["report"]["key"] != after["report"]["key"]


# ---------------------------------------------------------------------------
# artifact round trips


def test_cached_stages_round_trip_exactly(tmp_path):
    out = str(tmp_path / "run")
    first = Pipeline(_cfg(), out)
    first.run_all()
    second = Pipeline(_cfg(), out)
    katz_a, katz_b = first.katz(), second.katz()
    assert katz_a.years == katz_b.years
    for sa, sb in zip(katz_a.scores, katz_b.scores):
        assert np.array_equal(sa, sb)
    assert second.spells().digest() == first.spells().digest()
    fits_a, fits_b = first.fits(), second.fits()
    assert set(fits_a) == set(fits_b)
    for name in fits_a:
        assert fits_a[name].to_dict() == fits_b[name].to_dict()
    km_a, km_b = first.km(), second.km()
    for name in km_a:
        assert np.array_equal(km_a[name].survival, km_b[name].survival)


def test_artifacts_carry_no_wall_clock(tmp_path):
    out = str(tmp_path / "run")
    Pipeline(_cfg(), out).run_all()
    for rel, _ in _tree_hashes(out).items():
        path = os.path.join(out, rel)
        with open(path, "rb") as f:
            blob = f.read()
        assert b"ingested_at" not in blob, rel


# ---------------------------------------------------------------------------
# corpus sources


def test_csv_ingest_feeds_the_pipeline(tmp_path):
    res = simulate(SimConfig.from_dict(SIM))
    patents_csv = str(tmp_path / "patents.csv")
    edges_csv = str(tmp_path / "edges.csv")
    ingest.write_csv(res.store, patents_csv, edges_csv)
    cfg = _cfg(simulate=None,
               ingest={"patents_csv": patents_csv, "edges_csv": edges_csv})
    out = str(tmp_path / "run")
    pipeline = Pipeline(cfg, out)
    pipeline.run_all()
    assert pipeline.corpus().same_content(res.store)
    assert os.path.exists(os.path.join(out, "report", "report.md"))


def test_api_source_requires_the_token_env_var(tmp_path, monkeypatch):
    monkeypatch.delenv("CITERATE_TOKEN", raising=False)
    cfg = _cfg(simulate=None,
               ingest={"api": {"endpoint": "https://example.org/api",
                               "query": {"q": "*"}}})
    pipeline = Pipeline(cfg, str(tmp_path / "run"))
    with pytest.raises(ConfigError, match="CITERATE_TOKEN"):
        pipeline.corpus()


def test_no_source_and_no_artifact_is_an_error(tmp_path):
    cfg = _cfg(simulate=None)
    pipeline = Pipeline(cfg, str(tmp_path / "run"))
    with pytest.raises(PipelineError, match="ingest.*simulate"):
        pipeline.corpus()


def test_corpus_artifact_survives_without_a_source(tmp_path):
    out = str(tmp_path / "run")
    Pipeline(_cfg(), out).run_all()
    # a later session can keep analyzing the stored corpus
    cfg = _cfg(simulate=None)
    again = Pipeline(cfg, out)
    store = again.corpus()
    assert len(store.patents) > 0


def test_stage_digest_requires_artifacts(tmp_path):
    pipeline = Pipeline(_cfg(), str(tmp_path / "run"))
    with pytest.raises(PipelineError, match="katz"):
        pipeline.stage_digest("katz")


def test_bad_simulate_settings_are_rejected(tmp_path):
    cfg = _cfg(simulate={"seed": 1, "solar_rate": 2.0})
    pipeline = Pipeline(cfg, str(tmp_path / "run"))
    with pytest.raises(ConfigError, match="solar_rate"):
        pipeline.corpus()


# ---------------------------------------------------------------------------
# command-line interface


def _config_file(tmp_path, cfg) -> str:
    cut = {k: v for k, v in cfg.items() if v != DEFAULTS.get(k)}
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cut), encoding="utf-8")
    return str(path)


def test_cli_run_executes_the_whole_pipeline(tmp_path):
    cfg_path = _config_file(tmp_path, _cfg())
    out = str(tmp_path / "run")
    code, lines = _run_cli(["run", "--config", cfg_path, "--out", out])
    assert code == 0
    stages = [ln["stage"] for ln in lines if ln.get("event") == "stage"]
    assert stages == list(ARTIFACTS)
    assert all(ln["status"] == "computed" for ln in lines
               if ln.get("event") == "stage")
    assert os.path.exists(os.path.join(out, "report", "report.md"))


def test_cli_report_cold_start_builds_upstream_stages(tmp_path):
    cfg_path = _config_file(tmp_path, _cfg())
    out = str(tmp_path / "run")
    code, _ = _run_cli(["report", "--config", cfg_path, "--out", out])
    assert code == 0
    assert os.path.exists(os.path.join(out, "report", "report.md"))


def test_cli_second_run_reports_cached_stages(tmp_path):
    cfg_path = _config_file(tmp_path, _cfg())
    out = str(tmp_path / "run")
    _run_cli(["run", "--config", cfg_path, "--out", out])
    code, lines = _run_cli(["run", "--config", cfg_path, "--out", out])
    assert code == 0
    statuses = {ln["stage"]: ln["status"] for ln in lines
                if ln.get("event") == "stage"}
    assert statuses["corpus"] == "cached"
    assert statuses["fits"] == "cached"
    assert statuses["report"] == "cached"


def test_cli_failure_exits_2_with_a_json_error(tmp_path, monkeypatch):
    monkeypatch.delenv("CITERATE_TOKEN", raising=False)
    cfg = _cfg(simulate=None,
               ingest={"api": {"endpoint": "https://example.org/api",
                               "query": {"q": "*"}}})
    cfg_path = _config_file(tmp_path, cfg)
    out = str(tmp_path / "run")
    code, lines = _run_cli(["ingest", "--config", cfg_path, "--out", out])
    assert code == 2
    errors = [ln for ln in lines if ln.get("event") == "error"]
    assert len(errors) == 1
    assert errors[0]["error"] == "ConfigError"
    assert "CITERATE_TOKEN" in errors[0]["message"]


def test_cli_ingest_accepts_file_overrides(tmp_path):
    res = simulate(SimConfig.from_dict(SIM))
    patents_csv = str(tmp_path / "patents.csv")
    edges_csv = str(tmp_path / "edges.csv")
    ingest.write_csv(res.store, patents_csv, edges_csv)
    out = str(tmp_path / "run")
    code, lines = _run_cli(["ingest", "--out", out,
                            "--patents-csv", patents_csv,
                            "--edges-csv", edges_csv])
    assert code == 0
    assert os.path.exists(os.path.join(out, "corpus", "patents.csv"))


def test_cli_simulate_uses_seed_override(tmp_path):
    out_a = str(tmp_path / "a")
    out_b = str(tmp_path / "b")
    for out, seed in ((out_a, "11"), (out_b, "12")):
        code, _ = _run_cli(["simulate", "--out", out, "--seed", seed])
        assert code == 0
    with open(os.path.join(out_a, "manifest.json"), encoding="utf-8") as f:
        ma = json.load(f)
    with open(os.path.join(out_b, "manifest.json"), encoding="utf-8") as f:
        mb = json.load(f)
    assert ma["stages"]["corpus"]["key"] != mb["stages"]["corpus"]["key"]


def test_cli_rejects_unknown_config(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"mystery": 1}), encoding="utf-8")
    code, lines = _run_cli(["run", "--config", str(path),
                            "--out", str(tmp_path / "run")])
    assert code == 2
    assert any("mystery" in ln.get("message", "") for ln in lines)
