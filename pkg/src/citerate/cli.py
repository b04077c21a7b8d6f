"""Command-line interface.

Each subcommand runs one stage (plus whatever upstream stages it needs,
served from the artifact cache when their inputs are unchanged); ``run``
executes the whole pipeline. Progress and errors are emitted as one JSON
object per line on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .config import load_config
from .errors import CiterateError
from .pipeline import Pipeline

log = logging.getLogger("citerate")

_STAGE_COMMANDS = ("ingest", "simulate", "graph", "katz", "spells", "km",
                   "fit", "report", "run")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="citerate",
        description="Temporal citation graph and citation-rate estimation",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None,
                        help="JSON config file (defaults are used without it)")
    common.add_argument("--out", required=True,
                        help="output directory for artifacts")
    common.add_argument("--seed", type=int, default=None,
                        help="override the simulator seed")
    common.add_argument("--threads", type=int, default=None,
                        help="thread-count hint exported to BLAS/OpenMP")

    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "ingest": "read a corpus from CSV, JSONL, or the citation API",
        "simulate": "generate a corpus with the branching simulator",
        "graph": "build the temporal citation DAG",
        "katz": "compute yearly Katz centrality snapshots",
        "spells": "assemble the relational event spells",
        "km": "fit Kaplan-Meier citation-interval curves",
        "fit": "fit the proportional-hazards models",
        "report": "assemble the summary report",
        "run": "run every stage in order",
    }
    for name in _STAGE_COMMANDS:
        p = sub.add_parser(name, parents=[common], help=helps[name])
        if name == "ingest":
            p.add_argument("--patents-csv", default=None)
            p.add_argument("--edges-csv", default=None)
            p.add_argument("--jsonl", default=None)
    return parser


def _setup_logging() -> None:
    if not log.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("%(message)s"))
        log.addHandler(handler)
        log.setLevel(logging.INFO)
        log.propagate = False


def _apply_threads(n: int | None) -> None:
    if n is None:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                "MKL_NUM_THREADS"):
        os.environ[var] = str(n)


def _ingest_overrides(cfg: dict, args) -> None:
    given = {k: v for k, v in (("patents_csv", args.patents_csv),
                               ("edges_csv", args.edges_csv),
                               ("jsonl", args.jsonl)) if v is not None}
    if given:
        cfg["ingest"] = given
        cfg["simulate"] = None
    from .config import validate_config

    validate_config(cfg)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging()
    _apply_threads(args.threads)
    try:
        cfg = load_config(args.config)
        if args.command == "ingest":
            _ingest_overrides(cfg, args)
        elif args.command == "simulate":
            cfg["ingest"] = None
            if cfg.get("simulate") is None:
                cfg["simulate"] = {}
        pipeline = Pipeline(cfg, args.out, seed=args.seed)
        if args.command in ("ingest", "simulate"):
            pipeline.corpus()
        elif args.command == "graph":
            pipeline.dag()
        elif args.command == "katz":
            pipeline.katz()
        elif args.command == "spells":
            pipeline.spells()
        elif args.command == "km":
            pipeline.km()
        elif args.command == "fit":
            pipeline.fits()
        elif args.command == "report":
            pipeline.report()
        else:
            pipeline.run_all()
    except CiterateError as exc:
        log.error(json.dumps({"event": "error",
                              "error": type(exc).__name__,
                              "message": str(exc)}, sort_keys=True))
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
