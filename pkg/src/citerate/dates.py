"""Calendar handling.

All dates are stored internally as integer day numbers relative to
1841-01-01 (day 0), the earliest publication the engine is designed to
carry. Durations are therefore plain integer day differences.
"""

from __future__ import annotations

import datetime

EPOCH = datetime.date(1841, 1, 1)
_EPOCH_ORD = EPOCH.toordinal()

DAYS_PER_YEAR = 365.25


def parse_date(text: str) -> datetime.date:
    """Parse an ISO-8601 calendar date (YYYY-MM-DD)."""
    return datetime.date.fromisoformat(text.strip())


def day_of(d: datetime.date) -> int:
    return d.toordinal() - _EPOCH_ORD


def date_of(day: int) -> datetime.date:
    return datetime.date.fromordinal(day + _EPOCH_ORD)


def day_of_str(text: str) -> int:
    return day_of(parse_date(text))


def iso_of(day: int) -> str:
    return date_of(day).isoformat()


def year_of(day: int) -> int:
    return date_of(day).year


def year_end_day(year: int) -> int:
    """Day number of December 31 of `year`."""
    return day_of(datetime.date(year, 12, 31))


def years_of_days(days) -> float:
    return days / DAYS_PER_YEAR
