from __future__ import annotations

import datetime

import pytest

from citerate import dates


def test_epoch_is_day_zero():
    assert dates.day_of(datetime.date(1841, 1, 1)) == 0
    assert dates.date_of(0) == datetime.date(1841, 1, 1)


def test_day_of_and_date_of_round_trip():
    for d in (datetime.date(1841, 1, 2), datetime.date(1900, 2, 28),
              datetime.date(2000, 2, 29), datetime.date(2013, 8, 7),
              datetime.date(2021, 12, 31)):
        day = dates.day_of(d)
        assert dates.date_of(day) == d
        assert dates.day_of_str(d.isoformat()) == day
        assert dates.iso_of(day) == d.isoformat()


def test_day_differences_are_durations():
    a = dates.day_of_str("2000-01-01")
    b = dates.day_of_str("2000-12-31")
    assert b - a == 365  # 2000 is a leap year; Jan 1 to Dec 31 spans 365 days


def test_parse_date_accepts_iso_and_strips_whitespace():
    assert dates.parse_date(" 2013-08-07 ") == datetime.date(2013, 8, 7)


@pytest.mark.parametrize("bad", ["2013/08/07", "20130807", "not a date", ""])
def test_parse_date_rejects_non_iso(bad):
    with pytest.raises(ValueError):
        dates.parse_date(bad)


def test_year_of_matches_calendar():
    assert dates.year_of(dates.day_of_str("1999-12-31")) == 1999
    assert dates.year_of(dates.day_of_str("2000-01-01")) == 2000


def test_year_end_day_is_december_31():
    day = dates.year_end_day(2010)
    assert dates.iso_of(day) == "2010-12-31"
    # Every day of 2010 is on or before the year-end day.
    assert dates.day_of_str("2010-01-01") <= day
    assert dates.day_of_str("2010-12-31") == day
    assert dates.day_of_str("2011-01-01") == day + 1


def test_years_of_days_uses_julian_year():
    assert dates.DAYS_PER_YEAR == 365.25
    assert dates.years_of_days(365.25) == 1.0
    assert dates.years_of_days(730.5) == 2.0
