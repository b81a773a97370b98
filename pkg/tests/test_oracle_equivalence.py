"""Every query answered two ways — indexed engine vs. linear full scan —
must agree bit for bit: headers, cells, totals, currency and error codes."""

from __future__ import annotations

from datetime import date

import pytest

from balancecube.cube import AVERAGE, SUM_CLOSING, CubeQueryError, PivotQuery, query_pivot
from balancecube.oracle import reference_evaluator

TIME_AXES = ("day", "week", "month", "quarter", "semester", "year")

AXIS_SHAPES = (
    # "T" stands for the time level matching the query grain
    ((), ()),
    (("account",), ()),
    (("T",), ()),
    (("company",), ("T",)),
    (("T",), ("bank",)),
    (("company_country", "company"), ("T",)),
    (("company", "bank"), ()),
)

FILTER_RANGE_CASES = (
    ((), (None, None)),
    ((("company", ("C1",)),), (None, None)),
    ((("week", ("2015-W53",)),), (date(2015, 11, 10), date(2015, 12, 20))),
    ((), (date(2015, 12, 15), None)),
)


def build_queries() -> list[PivotQuery]:
    queries: list[PivotQuery] = []
    for grain in TIME_AXES:
        for aggregator in (SUM_CLOSING, AVERAGE):
            for rows, cols in AXIS_SHAPES:
                rows = tuple(grain if lv == "T" else lv for lv in rows)
                cols = tuple(grain if lv == "T" else lv for lv in cols)
                for filters, (lo, hi) in FILTER_RANGE_CASES:
                    measure = "balance_eur" if len(queries) % 2 else "working_eur"
                    queries.append(PivotQuery(
                        measure=measure, aggregator=aggregator,
                        row_levels=rows, col_levels=cols, filters=filters,
                        date_from=lo, date_to=hi, time_grain=grain,
                    ))
    # original-currency measures need a single-currency scope
    for aggregator in (SUM_CLOSING, AVERAGE):
        for currency in ("EUR", "USD"):
            queries.append(PivotQuery(
                measure="balance_orig", aggregator=aggregator,
                row_levels=("account",), col_levels=("month",),
                filters={"currency": (currency,)}, time_grain="month",
            ))
    return queries


QUERIES = build_queries()

BAD_QUERIES = (
    PivotQuery("net_worth", SUM_CLOSING),
    PivotQuery("balance_eur", "MODE"),
    PivotQuery("balance_eur", SUM_CLOSING, time_grain="fortnight"),
    PivotQuery("balance_eur", SUM_CLOSING, row_levels=("floor",)),
    PivotQuery("balance_eur", SUM_CLOSING, row_levels=("bank",), col_levels=("bank",)),
    PivotQuery("balance_eur", SUM_CLOSING, row_levels=("month",),
               col_levels=("year",), time_grain="month"),
    PivotQuery("balance_eur", SUM_CLOSING, row_levels=("week",), time_grain="day"),
    PivotQuery("balance_eur", SUM_CLOSING, filters={"bank": ("B7",)}),
    PivotQuery("balance_eur", SUM_CLOSING, filters={"quarter": ("1999-Q1",)}),
    PivotQuery("balance_eur", SUM_CLOSING,
               date_from=date(2016, 1, 1), date_to=date(2015, 11, 1)),
    PivotQuery("balance_eur", SUM_CLOSING, date_to=date(2017, 1, 1)),
    PivotQuery("working_orig", AVERAGE, row_levels=("company",)),   # mixed currencies
)


def test_enumeration_is_large_enough():
    assert len(QUERIES) >= 200


@pytest.mark.parametrize(
    "query", QUERIES,
    ids=[f"{i:03d}-{q.aggregator[:3]}-{q.time_grain}" for i, q in enumerate(QUERIES)],
)
def test_engine_matches_full_scan(fixture_env, query):
    fast = query_pivot(fixture_env["cube"], query)
    slow = reference_evaluator(fixture_env["store"], query,
                               fixture_env["dimensions"], fixture_env["time_table"])
    assert fast == slow


@pytest.mark.parametrize(
    "query", BAD_QUERIES,
    ids=[f"bad-{i:02d}" for i in range(len(BAD_QUERIES))],
)
def test_both_routes_reject_identically(fixture_env, query):
    with pytest.raises(CubeQueryError) as fast:
        query_pivot(fixture_env["cube"], query)
    with pytest.raises(CubeQueryError) as slow:
        reference_evaluator(fixture_env["store"], query,
                            fixture_env["dimensions"], fixture_env["time_table"])
    assert fast.value.code == slow.value.code
