"""citerate: temporal citation graphs and knowledge-production rates.

Turns raw patent-citation records into a time-resolved acyclic citation
graph and estimates how fast knowledge propagates through it: yearly
Katz-centrality snapshots, Kaplan-Meier citation-interval curves, and
proportional-hazards relational event models with cluster-robust
inference, all validated against a built-in event simulator.
"""

from .centrality import KatzResult, YearlyKatz, katz_alpha, katz_scores, yearly_katz
from .coxph import (
    BaselineHazard,
    ConcordanceResult,
    FitResult,
    LRResult,
    ZphResult,
    baseline_hazard,
    concordance,
    fit_cox,
    lr_test,
    schoenfeld_test,
)
from .errors import (
    CiterateError,
    ConfigError,
    FetchError,
    FitError,
    GraphError,
    IngestError,
    PipelineError,
    ReportError,
    SpellError,
)
from .events import CovariateSpec, SpellMatrix, build_spells, standardize
from .fetch import FetchResult, fetch_scroll
from .graph import DagView, TemporalDag, build_dag, degree_stats, snapshot_at
from .ingest import parse_csv_edges, parse_jsonl, write_csv
from .model import SUBDOMAINS, CitationEdge, CorpusStore, Patent
from .report import Report, build_report
from .sim import SimConfig, SimResult, simulate
from .survival import KMCurve, km_by_group, km_fit

__version__ = "0.1.0"

__all__ = [
    "BaselineHazard",
    "CitationEdge",
    "CiterateError",
    "ConcordanceResult",
    "ConfigError",
    "CorpusStore",
    "CovariateSpec",
    "DagView",
    "FetchError",
    "FetchResult",
    "FitError",
    "FitResult",
    "GraphError",
    "IngestError",
    "KMCurve",
    "KatzResult",
    "LRResult",
    "Patent",
    "PipelineError",
    "Report",
    "ReportError",
    "SUBDOMAINS",
    "SimConfig",
    "SimResult",
    "SpellError",
    "SpellMatrix",
    "TemporalDag",
    "YearlyKatz",
    "ZphResult",
    "baseline_hazard",
    "build_dag",
    "build_report",
    "build_spells",
    "concordance",
    "degree_stats",
    "fetch_scroll",
    "fit_cox",
    "katz_alpha",
    "katz_scores",
    "km_by_group",
    "km_fit",
    "lr_test",
    "parse_csv_edges",
    "parse_jsonl",
    "schoenfeld_test",
    "simulate",
    "snapshot_at",
    "standardize",
    "write_csv",
    "yearly_katz",
]
