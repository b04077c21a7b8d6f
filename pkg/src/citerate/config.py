"""Run configuration: JSON file -> validated settings dict.

The configuration never carries credentials. API access reads the token
from the CITERATE_TOKEN environment variable at the moment it is needed
and nowhere else.
"""

from __future__ import annotations

import copy
import json

from .errors import ConfigError
from .events import COVARIATE_ORDER

TOKEN_ENV_VAR = "CITERATE_TOKEN"

DEFAULT_MODELS = {
    "base": {
        "covariates": ["storage", "production", "fuel_cells"],
        "ties": "efron",
    },
    "knowledge": {
        "covariates": ["storage", "production", "fuel_cells",
                       "days_after_publication", "total_cpc_classes",
                       "shared_subdomain", "katz"],
        "ties": "efron",
    },
}

DEFAULT_COMPARISONS = [
    {"name": "knowledge_vs_base", "full": "knowledge", "reduced": "base",
     "allow_quasi": False},
]

DEFAULTS = {
    "ingest": None,
    "simulate": None,
    "katz": {"alpha": None, "years": None},
    "spells": {"horizon_day": None, "days_transform": "linear"},
    "standardize": True,
    "km": {"first_only": False},
    "models": DEFAULT_MODELS,
    "comparisons": DEFAULT_COMPARISONS,
    "diagnostics": {"transform": "km", "concordance": True},
}

_TRANSFORMS = ("km", "rank", "identity")
_TIES = ("breslow", "efron")


def load_config(path: str | None) -> dict:
    """Read, merge with defaults, and validate a JSON config file."""
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        try:
            with open(path, encoding="utf-8") as f:
                user = json.load(f)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from None
        if not isinstance(user, dict):
            raise ConfigError("config root must be a JSON object")
        unknown = set(user) - set(DEFAULTS)
        if unknown:
            raise ConfigError("unknown config keys: "
                              + ", ".join(sorted(unknown)))
        for key, value in user.items():
            if key in ("katz", "spells", "km", "diagnostics") \
                    and isinstance(value, dict):
                merged = dict(DEFAULTS[key])
                merged.update(value)
                cfg[key] = merged
            else:
                cfg[key] = value
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict) -> None:
    if cfg.get("ingest") is not None and cfg.get("simulate") is not None:
        raise ConfigError("config declares both 'ingest' and 'simulate'; "
                          "pick one corpus source")
    ingest = cfg.get("ingest")
    if ingest is not None:
        if not isinstance(ingest, dict):
            raise ConfigError("'ingest' must be an object")
        has_csv = "patents_csv" in ingest or "edges_csv" in ingest
        has_jsonl = "jsonl" in ingest
        has_api = "api" in ingest
        if sum([has_csv, has_jsonl, has_api]) != 1:
            raise ConfigError("'ingest' needs exactly one source: "
                              "patents_csv+edges_csv, jsonl, or api")
        if has_csv and not ("patents_csv" in ingest and "edges_csv" in ingest):
            raise ConfigError("CSV ingestion needs both 'patents_csv' and "
                              "'edges_csv'")
        if has_api:
            api = ingest["api"]
            if not isinstance(api, dict) or "endpoint" not in api \
                    or "query" not in api:
                raise ConfigError("'ingest.api' needs 'endpoint' and 'query'")
            if "token" in api:
                raise ConfigError(
                    f"do not put the API token in the config; set the "
                    f"{TOKEN_ENV_VAR} environment variable instead")

    katz = cfg["katz"]
    if katz.get("alpha") is not None:
        alpha = katz["alpha"]
        if not isinstance(alpha, (int, float)) or not 0 < alpha <= 1:
            raise ConfigError("katz.alpha must be in (0, 1]")
    if katz.get("years") is not None:
        years = katz["years"]
        if (not isinstance(years, list)
                or not all(isinstance(y, int) for y in years)
                or sorted(years) != years):
            raise ConfigError("katz.years must be an ascending list of "
                              "integers")

    spells = cfg["spells"]
    if spells.get("days_transform") not in ("linear", "log1p"):
        raise ConfigError("spells.days_transform must be 'linear' or "
                          "'log1p'")

    if not isinstance(cfg.get("standardize"), bool):
        raise ConfigError("'standardize' must be true or false")
    if not isinstance(cfg["km"].get("first_only"), bool):
        raise ConfigError("km.first_only must be true or false")

    models = cfg.get("models")
    if not isinstance(models, dict) or not models:
        raise ConfigError("'models' must be a non-empty object")
    for name, spec in models.items():
        if not isinstance(spec, dict) or "covariates" not in spec:
            raise ConfigError(f"model {name!r} needs a 'covariates' list")
        covs = spec["covariates"]
        if not isinstance(covs, list) or not covs:
            raise ConfigError(f"model {name!r} needs a non-empty "
                              "'covariates' list")
        undeclared = [c for c in covs if c not in COVARIATE_ORDER]
        if undeclared:
            raise ConfigError(
                f"model {name!r} uses undeclared covariates: "
                + ", ".join(undeclared)
                + "; available: " + ", ".join(COVARIATE_ORDER))
        if len(set(covs)) != len(covs):
            raise ConfigError(f"model {name!r} repeats a covariate")
        ties = spec.get("ties", "efron")
        if ties not in _TIES:
            raise ConfigError(f"model {name!r}: ties must be one of "
                              + ", ".join(_TIES))

    comparisons = cfg.get("comparisons", [])
    if not isinstance(comparisons, list):
        raise ConfigError("'comparisons' must be a list")
    seen = set()
    for comp in comparisons:
        if not isinstance(comp, dict):
            raise ConfigError("each comparison must be an object")
        for key in ("name", "full", "reduced"):
            if key not in comp:
                raise ConfigError(f"comparison missing {key!r}")
        if comp["name"] in seen:
            raise ConfigError(f"duplicate comparison name {comp['name']!r}")
        seen.add(comp["name"])
        for side in ("full", "reduced"):
            if comp[side] not in models:
                raise ConfigError(
                    f"comparison {comp['name']!r} references unknown model "
                    f"{comp[side]!r}")

    diag = cfg["diagnostics"]
    if diag.get("transform") not in _TRANSFORMS:
        raise ConfigError("diagnostics.transform must be one of "
                          + ", ".join(_TRANSFORMS))
    if not isinstance(diag.get("concordance", True), bool):
        raise ConfigError("diagnostics.concordance must be true or false")


def canonical_json(obj) -> str:
    """Stable serialization used for cache keys and manifests."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))
