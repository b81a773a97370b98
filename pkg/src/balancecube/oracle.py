"""Reference pivot evaluator: a direct full scan over fact rows.

Same query contract as the cube engine, but no snapshots, no numpy, no
member indexes — every lookup is a linear scan and every cell is computed
by filtering the row list again. Exists as the second, independent route
to the same answers; keep it free of any code shared with cube.py beyond
the public query/result/error types.
"""

from __future__ import annotations

import itertools
from datetime import date
from typing import Iterable, Optional, Sequence

from .cube import (
    AGGREGATORS,
    AVERAGE,
    MEASURES,
    SUM_CLOSING,
    TIME_GRAINS,
    CubeQueryError,
    PivotQuery,
    PivotResult,
)
from .money import div_round_half_even
from .star_schema import Dimensions, FactAccountBalance
from .time_dimension import TimeTable

_TIME_LEVELS = ("year", "semester", "quarter", "month", "week", "day", "iso_week_year")
_ACCOUNT_LEVELS = ("company_country", "company", "bank_country", "bank", "currency", "account")
_ALL_LEVELS = _ACCOUNT_LEVELS + _TIME_LEVELS

_HIERARCHIES = (
    ("CompanyGeo", ("company_country", "company", "account")),
    ("BankGeo", ("bank_country", "bank", "account")),
    ("Currency", ("currency", "account")),
)


def _hierarchy_of(level: str, context: Sequence[str]) -> str:
    candidates = [name for name, levels in _HIERARCHIES if level in levels]
    if len(candidates) > 1:
        for name, levels in _HIERARCHIES:
            if name in candidates and any(o != level and o in levels for o in context):
                return name
    return candidates[0]


def _find(records, key, value):
    for rec in records:
        if getattr(rec, key) == value:
            return rec
    raise CubeQueryError("UNKNOWN_MEMBER", f"no record with {key}={value!r}")


def _time_label(rec, level: str) -> str:
    if level == "day":
        return rec.date.isoformat()
    if level == "week":
        return "%d-W%02d" % (rec.iso_week_year, rec.iso_week_no)
    if level == "month":
        return "%d-%02d" % (rec.year, rec.month)
    if level == "quarter":
        return "%d-Q%d" % (rec.year, rec.quarter)
    if level == "semester":
        return "%d-S%d" % (rec.year, rec.semester)
    if level == "year":
        return str(rec.year)
    return str(rec.iso_week_year)


def _closing_flag(rec, grain: str) -> bool:
    if grain == "day":
        return True
    if grain == "week":
        return rec.is_last_day_of_week
    if grain == "month":
        return rec.is_last_day_of_month
    if grain == "quarter":
        return rec.is_last_day_of_quarter
    if grain == "semester":
        return rec.is_last_day_of_semester
    return rec.is_last_day_of_year


def _derive(fact: FactAccountBalance, dimensions: Dimensions, time_table: TimeTable) -> dict:
    """All member codes of one fact row, found by scanning the dimension lists."""
    account = _find(dimensions.accounts, "account_id", fact.account_id)
    company = _find(dimensions.companies, "company_id", account.company_id)
    bank = _find(dimensions.banks, "bank_id", account.bank_id)
    rec = None
    for candidate in time_table:
        if candidate.date == fact.value_date:
            rec = candidate
            break
    if rec is None:
        raise CubeQueryError("BAD_RANGE", f"fact date {fact.value_date} not in the time table")
    row = {
        "account": account.account_id,
        "company": company.company_id,
        "bank": bank.bank_id,
        "currency": account.currency_code,
        "company_country": company.country_code,
        "bank_country": bank.country_code,
    }
    for level in _TIME_LEVELS:
        row[level] = _time_label(rec, level)
    row["__flags__"] = {g: _closing_flag(rec, g) for g in TIME_GRAINS}
    return row


def _validate(
    fact_rows: Sequence[FactAccountBalance],
    query: PivotQuery,
    dimensions: Dimensions,
    time_table: TimeTable,
) -> tuple[date, date]:
    if query.measure not in MEASURES:
        raise CubeQueryError("UNKNOWN_MEASURE", f"unknown measure {query.measure!r}")
    if query.aggregator not in AGGREGATORS:
        raise CubeQueryError("UNKNOWN_AGGREGATOR", f"unknown aggregator {query.aggregator!r}")
    if query.time_grain not in TIME_GRAINS:
        raise CubeQueryError("UNKNOWN_GRAIN", f"unknown time grain {query.time_grain!r}")

    seen: list[str] = []
    time_levels: list[str] = []
    for level in query.row_levels + query.col_levels:
        if level not in _ALL_LEVELS:
            raise CubeQueryError("UNKNOWN_LEVEL", f"unknown level {level!r}")
        if level in seen:
            raise CubeQueryError("DUPLICATE_LEVEL", f"level {level!r} used twice")
        seen.append(level)
        if level in _TIME_LEVELS:
            time_levels.append(level)
    if len(time_levels) > 1:
        raise CubeQueryError("MULTIPLE_TIME_LEVELS",
                             f"more than one time level on the axes: {time_levels}")
    if time_levels and time_levels[0] != query.time_grain:
        raise CubeQueryError(
            "TIME_GRAIN_MISMATCH",
            f"axis time level {time_levels[0]!r} does not match grain {query.time_grain!r}",
        )

    for level, members in query.filters:
        if level not in _ALL_LEVELS:
            raise CubeQueryError("UNKNOWN_LEVEL", f"unknown filter level {level!r}")
        if level in _TIME_LEVELS:
            universe = {_time_label(rec, level) for rec in time_table}
        else:
            universe = set()
            for fact in fact_rows:
                account = _find(dimensions.accounts, "account_id", fact.account_id)
                company = _find(dimensions.companies, "company_id", account.company_id)
                bank = _find(dimensions.banks, "bank_id", account.bank_id)
                universe.add({
                    "account": account.account_id,
                    "company": company.company_id,
                    "bank": bank.bank_id,
                    "currency": account.currency_code,
                    "company_country": company.country_code,
                    "bank_country": bank.country_code,
                }[level])
        for member in members:
            if member not in universe:
                raise CubeQueryError("UNKNOWN_MEMBER",
                                     f"{member!r} is not a member of level {level!r}")

    first, last = time_table.first_date, time_table.last_date
    date_from = query.date_from if query.date_from is not None else first
    date_to = query.date_to if query.date_to is not None else last
    if date_from > date_to:
        raise CubeQueryError("BAD_RANGE", f"date_from {date_from} after date_to {date_to}")
    if date_from < first or date_to > last:
        raise CubeQueryError("BAD_RANGE",
                             f"range {date_from}..{date_to} outside table {first}..{last}")
    return date_from, date_to


def _headers_for_axis(levels: tuple[str, ...], rows: list[dict]) -> list[tuple[str, ...]]:
    """Observed chains per hierarchy, cross product across hierarchies."""
    account_levels = [l for l in levels if l in _ACCOUNT_LEVELS]
    units: list[list[str]] = []
    unit_names: list[str] = []
    for level in levels:
        if level in _TIME_LEVELS:
            units.append([level])
            unit_names.append("__time__")
        else:
            name = _hierarchy_of(level, account_levels)
            if name in unit_names:
                units[unit_names.index(name)].append(level)
            else:
                units.append([level])
                unit_names.append(name)

    chains_per_unit: list[list[tuple[str, ...]]] = []
    for unit_levels in units:
        chains: list[tuple[str, ...]] = []
        for row in rows:
            chain = tuple(row[l] for l in unit_levels)
            if chain not in chains:
                chains.append(chain)
        chains_per_unit.append(sorted(chains))

    headers: list[tuple[str, ...]] = []
    for combo in itertools.product(*chains_per_unit):
        members = {}
        for unit_levels, chain in zip(units, combo):
            for level, member in zip(unit_levels, chain):
                members[level] = member
        headers.append(tuple(members[l] for l in levels))
    return sorted(headers)


def _matches(row: dict, levels: tuple[str, ...], header: tuple[str, ...]) -> bool:
    for level, member in zip(levels, header):
        if row[level] != member:
            return False
    return True


def _aggregate(pairs: list[tuple[dict, int]], aggregator: str, grain: str) -> Optional[int]:
    """pairs: (derived row, measure value) already restricted to a scope."""
    if not pairs:
        return None
    if aggregator == AVERAGE:
        days: list[str] = []
        total = 0
        for row, value in pairs:
            total += value
            if row["day"] not in days:
                days.append(row["day"])
        return div_round_half_even(total, len(days))
    closing: Optional[str] = None
    for row, _ in pairs:
        if row["__flags__"][grain] and (closing is None or row["day"] > closing):
            closing = row["day"]
    if closing is None:
        return None
    return sum(value for row, value in pairs if row["day"] == closing)


def reference_evaluator(
    fact_rows: Iterable[FactAccountBalance],
    query: PivotQuery,
    dimensions: Dimensions,
    time_table: TimeTable,
) -> PivotResult:
    facts = list(fact_rows)
    date_from, date_to = _validate(facts, query, dimensions, time_table)
    grain = query.time_grain

    derived = [(_derive(f, dimensions, time_table), f) for f in facts]

    # account-dimension filters decide the currency scope before any dates do
    acc_filtered: list[str] = []
    for row, fact in derived:
        ok = all(
            row[level] in members
            for level, members in query.filters
            if level in _ACCOUNT_LEVELS
        )
        if ok and row["account"] not in acc_filtered:
            acc_filtered.append(row["account"])
    currencies: list[str] = []
    for row, fact in derived:
        if row["account"] in acc_filtered and row["currency"] not in currencies:
            currencies.append(row["currency"])
    currencies.sort()
    if query.measure.endswith("_eur"):
        currency_code = "EUR"
    else:
        if len(currencies) > 1:
            raise CubeQueryError(
                "MIXED_CURRENCY",
                f"{query.measure} over accounts in {currencies}; filter to one currency",
            )
        currency_code = currencies[0] if currencies else ""

    scope: list[tuple[dict, int]] = []
    for row, fact in derived:
        if not (date_from <= fact.value_date <= date_to):
            continue
        if not all(row[level] in members for level, members in query.filters):
            continue
        scope.append((row, getattr(fact, query.measure).amount_minor))

    scope_rows = [row for row, _ in scope]
    row_headers = _headers_for_axis(query.row_levels, scope_rows) if scope else []
    col_headers = _headers_for_axis(query.col_levels, scope_rows) if scope else []

    cells: list[tuple[Optional[int], ...]] = []
    for rh in row_headers:
        line: list[Optional[int]] = []
        for ch in col_headers:
            matched = [
                (row, value) for row, value in scope
                if _matches(row, query.row_levels, rh) and _matches(row, query.col_levels, ch)
            ]
            line.append(_aggregate(matched, query.aggregator, grain))
        cells.append(tuple(line))

    row_totals = tuple(
        _aggregate([(r, v) for r, v in scope if _matches(r, query.row_levels, rh)],
                   query.aggregator, grain)
        for rh in row_headers
    )
    col_totals = tuple(
        _aggregate([(r, v) for r, v in scope if _matches(r, query.col_levels, ch)],
                   query.aggregator, grain)
        for ch in col_headers
    )
    grand_total = _aggregate(scope, query.aggregator, grain) if row_headers and col_headers else None

    return PivotResult(
        measure=query.measure, aggregator=query.aggregator, time_grain=grain,
        currency_code=currency_code,
        row_levels=query.row_levels, col_levels=query.col_levels,
        row_headers=tuple(row_headers), col_headers=tuple(col_headers),
        cells=tuple(cells),
        row_totals=row_totals, col_totals=col_totals, grand_total=grand_total,
    )
