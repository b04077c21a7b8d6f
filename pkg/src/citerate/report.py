"""Tabular summaries of a finished analysis run.

Produces corpus descriptives, spell descriptives, yearly activity and
centrality summaries, survival medians, per-model coefficient tables,
and a side-by-side model comparison with hazard ratios, cluster-robust
standard errors, significance stars and confidence intervals. Models
that omit a covariate get an empty cell, never a zero. Every table is a
plain DataFrame; rendering writes one CSV per section plus a combined
markdown file, with no timestamps so identical inputs give identical
bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .centrality import YearlyKatz
from .coxph import ConcordanceResult, FitResult, LRResult, ZphResult
from .dates import DAYS_PER_YEAR, iso_of
from .errors import ReportError
from .events import SpellMatrix, _years_of_days
from .graph import TemporalDag, degree_stats
from .model import SUBDOMAINS, CorpusStore
from .survival import KMCurve

SECTION_ORDER = (
    "corpus", "yearly", "degrees", "spells", "km",
    "model_comparison", "model_comparison_ci", "lr_tests",
    "proportionality", "concordance",
)


def stars(pvalue: float) -> str:
    """Significance marks: *** at 0.0001, ** at 0.001, * at 0.01."""
    if pvalue <= 1e-4:
        return "***"
    if pvalue <= 1e-3:
        return "**"
    if pvalue <= 1e-2:
        return "*"
    return ""


@dataclass
class Report:
    sections: dict[str, pd.DataFrame]
    notes: list[str] = field(default_factory=list)

    def to_markdown(self) -> str:
        parts = ["# Citation rate analysis", ""]
        for name in SECTION_ORDER:
            if name in self.sections:
                parts.append(f"## {name}")
                parts.append("")
                parts.append(_md_table(self.sections[name]))
                parts.append("")
        for name, df in self.sections.items():
            if name not in SECTION_ORDER:
                parts.append(f"## {name}")
                parts.append("")
                parts.append(_md_table(df))
                parts.append("")
        if self.notes:
            parts.append("## notes")
            parts.append("")
            for note in self.notes:
                parts.append(f"- {note}")
            parts.append("")
        return "\n".join(parts)

    def write(self, outdir) -> list[str]:
        import os

        os.makedirs(outdir, exist_ok=True)
        written = []
        for name, df in self.sections.items():
            path = os.path.join(outdir, f"{name}.csv")
            df.to_csv(path, index=False)
            written.append(path)
        md_path = os.path.join(outdir, "report.md")
        with open(md_path, "w", encoding="utf-8") as f:
            f.write(self.to_markdown())
        written.append(md_path)
        return written


def _fmt(v) -> str:
    if isinstance(v, float):
        if v != v:  # NaN
            return ""
        return f"{v:.6g}"
    if v is None:
        return ""
    return str(v)


def _md_table(df: pd.DataFrame) -> str:
    cols = [str(c) for c in df.columns]
    lines = ["| " + " | ".join(cols) + " |",
             "| " + " | ".join("---" for _ in cols) + " |"]
    for _, row in df.iterrows():
        lines.append("| " + " | ".join(_fmt(v) for v in row) + " |")
    return "\n".join(lines)


def corpus_section(store: CorpusStore, dag: TemporalDag) -> pd.DataFrame:
    stats = degree_stats(dag)
    pub = dag.pub_day
    cpc = np.array([p.total_cpc_classes for p in store.patents.values()])
    rows: list[tuple[str, object]] = [
        ("patents", dag.n_nodes),
        ("citations_kept", dag.n_edges),
        ("citations_removed", len(dag.removed_edges)),
        ("self_citations", store.self_citations),
        ("unresolved_citations", len(store.unresolved_edges)),
        ("skipped_records", store.skipped_records),
        ("first_publication", iso_of(int(pub[0])) if len(pub) else ""),
        ("median_publication",
         iso_of(int(np.median(pub))) if len(pub) else ""),
        ("last_publication", iso_of(int(pub[-1])) if len(pub) else ""),
        ("in_degree_max", int(stats.in_degree.max()) if len(pub) else 0),
        ("in_degree_mean", float(stats.in_degree.mean()) if len(pub) else 0.0),
        ("out_degree_max", int(stats.out_degree.max()) if len(pub) else 0),
        ("out_degree_mean",
         float(stats.out_degree.mean()) if len(pub) else 0.0),
    ]
    for name in SUBDOMAINS:
        count = sum(1 for p in store.patents.values()
                    if getattr(p, f"is_{name}"))
        rows.append((f"{name}_patents", count))
    if len(cpc):
        rows += [
            ("total_cpc_min", int(cpc.min())),
            ("total_cpc_median", float(np.median(cpc))),
            ("total_cpc_max", int(cpc.max())),
            ("total_cpc_mean", float(cpc.mean())),
            ("total_cpc_sd", float(cpc.std(ddof=0))),
        ]
    return pd.DataFrame(rows, columns=["statistic", "value"])


def yearly_section(dag: TemporalDag, katz: YearlyKatz) -> pd.DataFrame:
    pub_years = _years_of_days(dag.pub_day)
    cite_years = _years_of_days(dag.citation_day)
    rows = []
    for j, year in enumerate(katz.years):
        s = katz.scores[j]
        rows.append({
            "year": year,
            "patents_published": int((pub_years == year).sum()),
            "citations": int((cite_years == year).sum()),
            "cum_patents": katz.n_nodes[j],
            "katz_alpha": katz.alphas[j],
            "katz_mean": float(s.mean()) if len(s) else 0.0,
            "katz_max": float(s.max()) if len(s) else 0.0,
            "max_walk_length": katz.max_walk_lengths[j],
            "degenerate": katz.degenerate[j],
        })
    return pd.DataFrame(rows)


def degree_section(dag: TemporalDag) -> pd.DataFrame:
    stats = degree_stats(dag)
    rows = [{"direction": "in", "degree": d, "count": c}
            for d, c in stats.in_hist]
    rows += [{"direction": "out", "degree": d, "count": c}
             for d, c in stats.out_hist]
    return pd.DataFrame(rows, columns=["direction", "degree", "count"])


def spells_section(sm: SpellMatrix) -> pd.DataFrame:
    rows = []
    durations = sm.durations.astype(np.float64)
    rows.append({"covariate": "duration_days",
                 "mean": float(durations.mean()),
                 "median": float(np.median(durations)),
                 "sd": float(durations.std(ddof=0)),
                 "min": float(durations.min()),
                 "max": float(durations.max())})
    for j, name in enumerate(sm.columns):
        col = sm.X[:, j]
        rows.append({"covariate": name,
                     "mean": float(col.mean()),
                     "median": float(np.median(col)),
                     "sd": float(col.std(ddof=0)),
                     "min": float(col.min()),
                     "max": float(col.max())})
    return pd.DataFrame(rows, columns=["covariate", "mean", "median", "sd",
                                       "min", "max"])


def km_section(curves: dict[str, KMCurve]) -> pd.DataFrame:
    rows = []
    for name, curve in curves.items():
        median = curve.median
        rows.append({
            "group": name,
            "spells": curve.n_total,
            "events": curve.n_events_total,
            "censored": curve.n_censored_total,
            "median_days": median,
            "median_years": (median / DAYS_PER_YEAR
                             if median is not None else None),
            "median_defined": curve.median_defined,
        })
    return pd.DataFrame(rows, columns=["group", "spells", "events",
                                       "censored", "median_days",
                                       "median_years", "median_defined"])


def fit_section(fit: FitResult) -> pd.DataFrame:
    ci = fit.conf_int()
    rows = []
    for j, name in enumerate(fit.covariates):
        rows.append({
            "covariate": name,
            "coef": float(fit.beta[j]),
            "hazard_ratio": float(np.exp(fit.beta[j])),
            "se": float(fit.se[j]),
            "robust_se": float(fit.robust_se[j]),
            "z": float(fit.zvalues[j]),
            "pvalue": float(fit.pvalues[j]),
            "stars": stars(float(fit.pvalues[j])),
            "hr_ci_low": float(ci[j, 0]),
            "hr_ci_high": float(ci[j, 1]),
        })
    return pd.DataFrame(rows, columns=["covariate", "coef", "hazard_ratio",
                                       "se", "robust_se", "z", "pvalue",
                                       "stars", "hr_ci_low", "hr_ci_high"])


def comparison_sections(
        fits: dict[str, FitResult]) -> tuple[pd.DataFrame, pd.DataFrame]:
    """Wide model tables: cell = "HR stars (robust SE)"; second table
    carries the hazard-ratio confidence interval. Absent covariates stay
    blank."""
    digests = {fit.data_digest for fit in fits.values()}
    if len(digests) > 1:
        raise ReportError(
            "model fits were estimated on different spell matrices; "
            "side-by-side comparison would be misleading")
    order: list[str] = []
    for fit in fits.values():
        for name in fit.covariates:
            if name not in order:
                order.append(name)
    main_rows, ci_rows = [], []
    for name in order:
        main = {"covariate": name}
        ci_row = {"covariate": name}
        for model, fit in fits.items():
            if name in fit.covariates:
                j = fit.covariates.index(name)
                hr = float(np.exp(fit.beta[j]))
                mark = stars(float(fit.pvalues[j]))
                main[model] = f"{hr:.3f}{mark} ({fit.robust_se[j]:.3f})"
                lo, hi = fit.conf_int()[j]
                ci_row[model] = f"[{lo:.3f}, {hi:.3f}]"
            else:
                main[model] = ""
                ci_row[model] = ""
        main_rows.append(main)
        ci_rows.append(ci_row)
    for label, attr in (("observations", "n_obs"), ("events", "n_events"),
                        ("clusters", "n_clusters"),
                        ("log_likelihood", "llf")):
        row = {"covariate": label}
        for model, fit in fits.items():
            value = getattr(fit, attr)
            row[model] = f"{value:.2f}" if isinstance(value, float) else str(value)
        main_rows.append(row)
    cols = ["covariate"] + list(fits)
    return (pd.DataFrame(main_rows, columns=cols),
            pd.DataFrame(ci_rows, columns=cols))


def build_report(store: CorpusStore | None,
                 dag: TemporalDag | None,
                 katz: YearlyKatz | None,
                 sm: SpellMatrix | None,
                 curves: dict[str, KMCurve] | None,
                 fits: dict[str, FitResult] | None,
                 lr_results: dict[str, LRResult] | None = None,
                 zph_results: dict[str, ZphResult] | None = None,
                 concordances: dict[str, ConcordanceResult] | None = None,
                 ) -> Report:
    for value, label, stage in ((store, "corpus", "ingest"),
                                (dag, "graph", "graph"),
                                (katz, "centrality table", "katz"),
                                (sm, "spell matrix", "spells"),
                                (curves, "survival curves", "km"),
                                (fits, "model fits", "fit")):
        if not value:
            raise ReportError(
                f"{label} is missing; run the {stage!r} stage first")

    notes: list[str] = []
    sections: dict[str, pd.DataFrame] = {
        "corpus": corpus_section(store, dag),
        "yearly": yearly_section(dag, katz),
        "degrees": degree_section(dag),
        "spells": spells_section(sm),
        "km": km_section(curves),
    }
    for name, curve in curves.items():
        if not curve.median_defined:
            notes.append(f"KM median for group {name!r} is undefined "
                         "(curve never reaches one half)")
    for model, fit in fits.items():
        sections[f"fit_{model}"] = fit_section(fit)
        if not fit.converged:
            notes.append(f"model {model!r} did not converge in "
                         f"{fit.iterations} iterations")
    main, ci = comparison_sections(fits)
    sections["model_comparison"] = main
    sections["model_comparison_ci"] = ci

    if lr_results:
        rows = [{"comparison": name, "statistic": res.statistic,
                 "df": res.df, "pvalue": res.pvalue, "quasi": res.quasi}
                for name, res in lr_results.items()]
        sections["lr_tests"] = pd.DataFrame(
            rows, columns=["comparison", "statistic", "df", "pvalue",
                           "quasi"])
        for name, res in lr_results.items():
            if res.quasi:
                notes.append(f"LR comparison {name!r} is quasi-nested; "
                             "interpret with care")
    if zph_results:
        rows = []
        for model, res in zph_results.items():
            for row in res.rows:
                rows.append({"model": model, "covariate": row["name"],
                             "chi2": row["chi2"], "df": row["df"],
                             "pvalue": row["pvalue"],
                             "transform": res.transform})
            rows.append({"model": model, "covariate": "GLOBAL",
                         "chi2": res.global_chi2, "df": res.global_df,
                         "pvalue": res.global_pvalue,
                         "transform": res.transform})
        sections["proportionality"] = pd.DataFrame(
            rows, columns=["model", "covariate", "chi2", "df", "pvalue",
                           "transform"])
    if concordances:
        rows = []
        for model, res in concordances.items():
            rows.append({"model": model, "concordance": res.value,
                         "comparable": res.comparable,
                         "caveat": res.caveat or ""})
            if res.caveat:
                notes.append(f"model {model!r}: {res.caveat}")
        sections["concordance"] = pd.DataFrame(
            rows, columns=["model", "concordance", "comparable", "caveat"])
    return Report(sections, notes)
