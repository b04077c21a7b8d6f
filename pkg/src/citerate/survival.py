"""Kaplan-Meier estimation of citation-interval survival.

Operates on gap durations (spell stop minus start). At tied times the
convention is the usual one: a unit censored at t is still at risk for
an event at t, so ties resolve events first. The reported median is the
smallest observed event time where the survival curve reaches one half;
when the curve never gets there the median is undefined and flagged
rather than guessed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SpellError
from .events import SpellMatrix
from .model import SUBDOMAINS


@dataclass
class KMCurve:
    label: str
    times: np.ndarray       # unique event times, ascending
    n_risk: np.ndarray
    n_event: np.ndarray
    survival: np.ndarray    # S(t) just after each event time
    n_total: int
    n_events_total: int

    @property
    def n_censored_total(self) -> int:
        return self.n_total - self.n_events_total

    @property
    def median_defined(self) -> bool:
        return bool(len(self.survival)) and bool(self.survival[-1] <= 0.5)

    @property
    def median(self) -> float | None:
        """Smallest event time t with S(t) <= 1/2 (left edge of any
        plateau); None when the curve never falls that far."""
        if not self.median_defined:
            return None
        return float(self.times[np.argmax(self.survival <= 0.5)])

    def survival_at(self, t) -> np.ndarray | float:
        """Step-function lookup, right-continuous; S = 1 before the
        first event time."""
        t = np.asarray(t, dtype=np.float64)
        idx = np.searchsorted(self.times, t, side="right") - 1
        out = np.where(idx >= 0, np.concatenate([[1.0], self.survival])[idx + 1], 1.0)
        return float(out) if out.ndim == 0 else out


def km_fit(durations, events, label: str = "") -> KMCurve:
    """Product-limit estimate S(t) = prod over event times <= t of
    (1 - d_i / n_i), with n_i the count still at risk (duration >= t_i)."""
    durations = np.asarray(durations, dtype=np.float64)
    events = np.asarray(events).astype(bool)
    if durations.shape != events.shape:
        raise SpellError("durations and events must be the same length")
    if len(durations) == 0:
        raise SpellError("no observations")
    if np.any(durations < 0):
        raise SpellError("negative duration")

    sorted_durs = np.sort(durations)
    n = len(sorted_durs)
    times, d = np.unique(durations[events], return_counts=True)
    n_risk = n - np.searchsorted(sorted_durs, times, side="left")
    survival = np.cumprod(1.0 - d / n_risk)
    return KMCurve(label, times, n_risk, d, survival, n, int(events.sum()))


def km_by_group(sm: SpellMatrix, first_only: bool = False) -> dict[str, KMCurve]:
    """One curve per subdomain plus the pooled corpus.

    Grouping is by the cited patent's membership flags, so a patent in
    two subdomains contributes its spells to both curves. ``first_only``
    restricts to the interval that starts at publication.
    """
    durations = sm.durations.astype(np.float64)
    events = sm.event.astype(bool)
    base = sm.is_first if first_only else np.ones(len(sm), dtype=bool)
    curves = {"all": km_fit(durations[base], events[base], "all")}
    for name in SUBDOMAINS:
        mask = base & (sm.select([name])[:, 0] > 0.5)
        if not mask.any():
            continue
        curves[name] = km_fit(durations[mask], events[mask], name)
    return curves
