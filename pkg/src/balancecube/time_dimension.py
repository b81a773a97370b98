"""Calendar dimension: per-day period attributes and last-day-of-period flags.

One record per day. Weeks are ISO-8601 (Monday through Sunday) and form
their own hierarchy because they do not nest inside months; the calendar
hierarchy is year > semester > quarter > month > day.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path
from typing import Iterator, Sequence

MIN_YEAR = 1900
MAX_YEAR = 2199

_ONE_DAY = timedelta(days=1)


class TimeRangeError(ValueError):
    """Date outside the supported 1900-2199 range, or an inverted span."""


@dataclass(frozen=True, slots=True)
class TimeRecord:
    date: date
    iso_week_year: int
    iso_week_no: int
    month: int
    quarter: int
    semester: int
    year: int
    is_last_day_of_week: bool
    is_last_day_of_month: bool
    is_last_day_of_quarter: bool
    is_last_day_of_semester: bool
    is_last_day_of_year: bool


def time_attributes(day: date) -> TimeRecord:
    """Compute all period attributes and end-of-period flags for one day."""
    if not MIN_YEAR <= day.year <= MAX_YEAR:
        raise TimeRangeError(f"date {day.isoformat()} outside supported years {MIN_YEAR}-{MAX_YEAR}")
    iso_year, iso_week, _ = day.isocalendar()
    month = day.month
    quarter = (month + 2) // 3
    semester = 1 if month <= 6 else 2
    next_day = day + _ONE_DAY
    eom = next_day.month != month
    return TimeRecord(
        date=day,
        iso_week_year=iso_year,
        iso_week_no=iso_week,
        month=month,
        quarter=quarter,
        semester=semester,
        year=day.year,
        is_last_day_of_week=day.weekday() == 6,
        is_last_day_of_month=eom,
        is_last_day_of_quarter=eom and month % 3 == 0,
        is_last_day_of_semester=eom and month in (6, 12),
        is_last_day_of_year=eom and month == 12,
    )


class TimeTable:
    """Gap-free, ascending sequence of TimeRecord between two dates."""

    def __init__(self, records: Sequence[TimeRecord]):
        if not records:
            raise ValueError("time table must not be empty")
        prev = None
        for rec in records:
            if prev is not None and rec.date != prev + _ONE_DAY:
                raise ValueError(f"time table has a gap or disorder at {rec.date.isoformat()}")
            prev = rec.date
        self._records: tuple[TimeRecord, ...] = tuple(records)
        self._pos = {rec.date: i for i, rec in enumerate(self._records)}

    @property
    def records(self) -> tuple[TimeRecord, ...]:
        return self._records

    @property
    def first_date(self) -> date:
        return self._records[0].date

    @property
    def last_date(self) -> date:
        return self._records[-1].date

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[TimeRecord]:
        return iter(self._records)

    def __contains__(self, day: date) -> bool:
        return day in self._pos

    def index_of(self, day: date) -> int:
        return self._pos[day]

    def get(self, day: date) -> TimeRecord:
        return self._records[self._pos[day]]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TimeTable):
            return NotImplemented
        return self._records == other._records


def time_table_for_range(first_day: date, last_day: date) -> TimeTable:
    """Build a table over an arbitrary contiguous day span."""
    if first_day > last_day:
        raise TimeRangeError(f"inverted range {first_day.isoformat()}..{last_day.isoformat()}")
    records = []
    day = first_day
    while day <= last_day:
        records.append(time_attributes(day))
        day += _ONE_DAY
    return TimeTable(records)


def build_time_table(first_year: int, last_year: int) -> TimeTable:
    """One record per day from Jan 1 of first_year through Dec 31 of last_year."""
    if first_year > last_year:
        raise TimeRangeError(f"inverted year range {first_year}..{last_year}")
    return time_table_for_range(date(first_year, 1, 1), date(last_year, 12, 31))


def extend_time_table(table: TimeTable, new_last_year: int) -> TimeTable:
    """Append whole years up to Dec 31 of new_last_year.

    Existing records are reused untouched; extending to the current last
    year (or earlier) is a no-op returning the table itself.
    """
    if new_last_year <= table.last_date.year:
        return table
    records = list(table.records)
    day = table.last_date + _ONE_DAY
    end = date(new_last_year, 12, 31)
    while day <= end:
        records.append(time_attributes(day))
        day += _ONE_DAY
    return TimeTable(records)


TIME_TABLE_HEADER = [
    "date", "iso_week_year", "iso_week_no", "month", "quarter", "semester", "year",
    "eow", "eom", "eoq", "eos", "eoy",
]


def save_time_table(table: TimeTable, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(TIME_TABLE_HEADER)
        for r in table:
            w.writerow([
                r.date.isoformat(), r.iso_week_year, r.iso_week_no, r.month,
                r.quarter, r.semester, r.year,
                int(r.is_last_day_of_week), int(r.is_last_day_of_month),
                int(r.is_last_day_of_quarter), int(r.is_last_day_of_semester),
                int(r.is_last_day_of_year),
            ])


def load_time_table(path: str | Path) -> TimeTable:
    records = []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != TIME_TABLE_HEADER:
            raise ValueError(f"{path}: unexpected time table header {header!r}")
        for row in reader:
            if not row:
                continue
            records.append(TimeRecord(
                date=date.fromisoformat(row[0]),
                iso_week_year=int(row[1]),
                iso_week_no=int(row[2]),
                month=int(row[3]),
                quarter=int(row[4]),
                semester=int(row[5]),
                year=int(row[6]),
                is_last_day_of_week=row[7] == "1",
                is_last_day_of_month=row[8] == "1",
                is_last_day_of_quarter=row[9] == "1",
                is_last_day_of_semester=row[10] == "1",
                is_last_day_of_year=row[11] == "1",
            ))
    return TimeTable(records)
