from __future__ import annotations

from dataclasses import replace
from datetime import date

import pytest

from balancecube.cube import (
    AVERAGE,
    SUM_CLOSING,
    CubeError,
    CubeQueryError,
    Dice,
    DrillDown,
    PivotQuery,
    PivotSwap,
    RollUp,
    Slice,
    build_cube,
    query_pivot,
    transform_query,
)
from balancecube.money import MoneyMinor, div_round_half_even
from balancecube.star_schema import FactStore
from balancecube.time_dimension import time_table_for_range

from conftest import FIXTURE_LAST


def q(**kwargs) -> PivotQuery:
    kwargs.setdefault("measure", "balance_eur")
    kwargs.setdefault("aggregator", SUM_CLOSING)
    return PivotQuery(**kwargs)


def month_key(d: date) -> str:
    return f"{d.year}-{d.month:02d}"


# --- building ---------------------------------------------------------------

def test_empty_store_queries_return_empty_grids(fixture_env):
    cube = build_cube(FactStore(), fixture_env["dimensions"], fixture_env["time_table"])
    result = query_pivot(cube, q(row_levels=("account",), col_levels=("month",),
                                 aggregator=AVERAGE, time_grain="month"))
    assert result.row_headers == () and result.col_headers == ()
    assert result.cells == () and result.grand_total is None
    assert result.row_totals == () and result.col_totals == ()


def test_partial_account_coverage_is_rejected(fixture_env):
    facts = fixture_env["store"].facts_sorted()
    store = FactStore(facts[1:])     # drop one day of one account
    with pytest.raises(CubeError) as err:
        build_cube(store, fixture_env["dimensions"], fixture_env["time_table"])
    assert err.value.code == "SPARSE_STORE"


def test_magnitude_guard(fixture_env):
    dims = fixture_env["dimensions"]
    table = time_table_for_range(date(2016, 1, 1), date(2016, 1, 3))
    base = fixture_env["store"].facts_sorted()[0]
    facts = [replace(base, value_date=rec.date, balance_eur=MoneyMinor(2**61, "EUR"))
             for rec in table]
    with pytest.raises(CubeError) as err:
        build_cube(FactStore(facts), dims, table)
    assert err.value.code == "OVERFLOW"


def test_member_lists_come_from_dimensions_and_table(fixture_env):
    cube = fixture_env["cube"]
    assert cube.members("bank") == ("B1", "B2")
    assert cube.members("company") == ("C1", "C2")
    assert cube.members("currency") == ("EUR", "USD")
    assert cube.members("company_country") == ("ES", "PT")
    assert cube.members("month") == ("2015-11", "2015-12", "2016-01")
    assert cube.members("year") == ("2015", "2016")
    assert cube.members("semester") == ("2015-S2", "2016-S1")
    assert len(cube.members("day")) == 62
    with pytest.raises(CubeQueryError):
        cube.members("galaxy")


def test_rebuild_after_single_fact_change_moves_one_cell(fixture_env):
    base_query = q(row_levels=("account",), col_levels=("month",),
                   aggregator=AVERAGE, time_grain="month")
    before = query_pivot(fixture_env["cube"], base_query)

    store = fixture_env["store"].copy()
    target = store.get((date(2015, 11, 15), "A1"))
    bumped = replace(target, balance_eur=MoneyMinor(
        target.balance_eur.amount_minor + 123456, "EUR"))
    store.put(bumped)
    after = query_pivot(
        build_cube(store, fixture_env["dimensions"], fixture_env["time_table"]),
        base_query,
    )

    row = before.row_headers.index(("A1",))
    col = before.col_headers.index(("2015-11",))
    for i in range(len(before.row_headers)):
        for j in range(len(before.col_headers)):
            if (i, j) == (row, col):
                assert after.cells[i][j] != before.cells[i][j]
            else:
                assert after.cells[i][j] == before.cells[i][j]
    assert after.row_totals[row] != before.row_totals[row]
    assert after.col_totals[col] != before.col_totals[col]
    assert after.grand_total != before.grand_total


# --- queries against hand-computed values ------------------------------------

def test_monthly_average_matches_brute_force(fixture_env):
    by_month: dict[str, list[int]] = {}
    for f in fixture_env["store"]:
        if f.account_id == "A1":
            by_month.setdefault(month_key(f.value_date), []).append(
                f.balance_eur.amount_minor)
    expected = {k: div_round_half_even(sum(v), len(v)) for k, v in by_month.items()}

    result = query_pivot(fixture_env["cube"], q(
        row_levels=("month",), aggregator=AVERAGE, time_grain="month",
        filters={"account": ("A1",)},
    ))
    assert result.row_headers == (("2015-11",), ("2015-12",), ("2016-01",))
    got = {h[0]: result.cells[i][0] for i, h in enumerate(result.row_headers)}
    assert got == expected


def test_yearly_closing_is_december_31(fixture_env):
    dec31 = sum(f.balance_eur.amount_minor for f in fixture_env["store"]
                if f.value_date == date(2015, 12, 31))
    result = query_pivot(fixture_env["cube"], q(row_levels=("year",), time_grain="year"))
    assert result.row_headers == (("2015",), ("2016",))
    assert result.cells[0][0] == dec31
    assert result.cells[1][0] is None     # Jan 1 is not a year end


def test_closing_sums_add_across_accounts(fixture_env):
    by_account = query_pivot(fixture_env["cube"], q(
        row_levels=("account",), filters={"company": ("C1",)}))
    by_company = query_pivot(fixture_env["cube"], q(row_levels=("company",)))
    company_row = by_company.row_headers.index(("C1",))
    assert by_company.cells[company_row][0] == sum(r[0] for r in by_account.cells)


def test_no_levels_collapses_to_grand_total(fixture_env):
    result = query_pivot(fixture_env["cube"], q(aggregator=AVERAGE))
    total = sum(f.balance_eur.amount_minor for f in fixture_env["store"])
    want = div_round_half_even(total, 62)
    assert result.row_headers == ((),) and result.col_headers == ((),)
    assert result.cells == ((want,),)
    assert result.grand_total == want
    assert result.cell_money(0, 0) == MoneyMinor(want, "EUR")


def test_single_day_range(fixture_env):
    day = date(2015, 12, 31)
    result = query_pivot(fixture_env["cube"], q(
        row_levels=("account",), date_from=day, date_to=day))
    values = {f.account_id: f.balance_eur.amount_minor
              for f in fixture_env["store"] if f.value_date == day}
    got = {h[0]: result.cells[i][0] for i, h in enumerate(result.row_headers)}
    assert got == values


def test_same_hierarchy_axis_shows_observed_chains_only(fixture_env):
    result = query_pivot(fixture_env["cube"], q(
        row_levels=("company_country", "company")))
    assert result.row_headers == (("ES", "C2"), ("PT", "C1"))


def test_cross_hierarchy_axis_crosses_units(fixture_env):
    result = query_pivot(fixture_env["cube"], q(row_levels=("company", "bank")))
    assert result.row_headers == (
        ("C1", "B1"), ("C1", "B2"), ("C2", "B1"), ("C2", "B2"),
    )
    empty_row = result.row_headers.index(("C2", "B2"))   # no account lives there
    assert all(v is None for v in result.cells[empty_row])
    assert result.row_totals[empty_row] is None


def test_time_filter_masks_days(fixture_env):
    result = query_pivot(fixture_env["cube"], q(
        col_levels=("day",), time_grain="day", filters={"week": ("2015-W53",)}))
    assert [h[0] for h in result.col_headers] == [
        "2015-12-28", "2015-12-29", "2015-12-30", "2015-12-31", "2016-01-01"]
    narrowed = query_pivot(fixture_env["cube"], q(
        col_levels=("day",), time_grain="day", filters={"week": ("2015-W53",)},
        date_from=date(2015, 12, 30)))
    assert len(narrowed.col_headers) == 3


def test_row_totals_merge_the_time_axis(fixture_env):
    result = query_pivot(fixture_env["cube"], q(
        row_levels=("account",), col_levels=("month",), time_grain="month"))
    # merged range closes on 2015-12-31, i.e. the December column
    dec = result.col_headers.index(("2015-12",))
    for i in range(len(result.row_headers)):
        assert result.row_totals[i] == result.cells[i][dec]


def test_empty_account_scope_yields_empty_grid(fixture_env):
    result = query_pivot(fixture_env["cube"], q(
        measure="balance_orig",
        row_levels=("account",),
        filters={"company": ("C2",), "currency": ("EUR",)},   # conjunction: empty
    ))
    assert result.row_headers == () and result.cells == ()
    assert result.currency_code == ""


# --- currency guard ----------------------------------------------------------

def test_original_measure_over_mixed_currencies_is_rejected(fixture_env):
    with pytest.raises(CubeQueryError) as err:
        query_pivot(fixture_env["cube"], q(measure="working_orig", row_levels=("account",)))
    assert err.value.code == "MIXED_CURRENCY"


def test_original_measure_in_single_currency_scope(fixture_env):
    result = query_pivot(fixture_env["cube"], q(
        measure="balance_orig", row_levels=("account",), filters={"currency": ("USD",)}))
    assert result.currency_code == "USD"
    assert result.row_headers == (("A2",),)


def test_eur_measures_ignore_currency_mix(fixture_env):
    result = query_pivot(fixture_env["cube"], q(row_levels=("account",)))
    assert result.currency_code == "EUR"
    assert len(result.row_headers) == 3


# --- validation errors --------------------------------------------------------

@pytest.mark.parametrize("query,code", [
    (q(measure="profit"), "UNKNOWN_MEASURE"),
    (q(aggregator="MEDIAN"), "UNKNOWN_AGGREGATOR"),
    (q(time_grain="decade"), "UNKNOWN_GRAIN"),
    (q(row_levels=("region",)), "UNKNOWN_LEVEL"),
    (q(row_levels=("company",), col_levels=("company",)), "DUPLICATE_LEVEL"),
    (q(row_levels=("month",), col_levels=("year",), time_grain="month"),
     "MULTIPLE_TIME_LEVELS"),
    (q(row_levels=("year",), time_grain="month"), "TIME_GRAIN_MISMATCH"),
    (q(filters={"region": ("north",)}), "UNKNOWN_LEVEL"),
    (q(filters={"company": ("C9",)}), "UNKNOWN_MEMBER"),
    (q(filters={"month": ("2019-01",)}), "UNKNOWN_MEMBER"),
    (q(date_from=date(2015, 12, 1), date_to=date(2015, 11, 1)), "BAD_RANGE"),
    (q(date_from=date(2014, 1, 1)), "BAD_RANGE"),
    (q(date_to=date(2016, 6, 1)), "BAD_RANGE"),
])
def test_query_validation(fixture_env, query, code):
    with pytest.raises(CubeQueryError) as err:
        query_pivot(fixture_env["cube"], query)
    assert err.value.code == code


def test_filter_forms_normalize_identically():
    a = q(filters={"account": ["A3", "A1", "A1"]})
    b = q(filters=[("account", ("A1", "A3"))])
    assert a == b


# --- navigation ---------------------------------------------------------------

def test_drilldown_time_year_to_semester(fixture_env):
    start = q(col_levels=("year",), time_grain="year")
    finer = transform_query(start, DrillDown("col"))
    assert finer.col_levels == ("semester",) and finer.time_grain == "semester"
    result = query_pivot(fixture_env["cube"], finer)
    assert result.col_headers == (("2015-S2",), ("2016-S1",))


def test_rollup_time_month_to_quarter():
    start = q(row_levels=("month",), time_grain="month")
    coarser = transform_query(start, RollUp("row"))
    assert coarser.row_levels == ("quarter",) and coarser.time_grain == "quarter"


def test_day_rolls_up_to_month_and_week_is_a_dead_end():
    by_day = q(col_levels=("day",), time_grain="day")
    assert transform_query(by_day, RollUp("col")).time_grain == "month"

    weekly = q(col_levels=("week",), time_grain="week")
    assert transform_query(weekly, DrillDown("col")).time_grain == "day"
    with pytest.raises(CubeQueryError) as err:
        transform_query(weekly, RollUp("col"))
    assert err.value.code == "INAPPLICABLE_OP"


@pytest.mark.parametrize("query,op", [
    (q(row_levels=("year",), time_grain="year"), RollUp("row")),
    (q(row_levels=("day",), time_grain="day"), DrillDown("row")),
    (q(row_levels=("company_country",)), RollUp("row")),
    (q(row_levels=("account",)), DrillDown("row")),
    (q(), RollUp("row")),                                     # empty axis
    (q(row_levels=("company",), col_levels=("account",)), DrillDown("row")),
])
def test_inapplicable_navigation(query, op):
    with pytest.raises(CubeQueryError) as err:
        transform_query(query, op)
    assert err.value.code == "INAPPLICABLE_OP"


def test_account_rollup_follows_axis_context():
    assert transform_query(q(row_levels=("account",)), RollUp("row")).row_levels == ("company",)
    assert transform_query(q(row_levels=("bank",)), RollUp("row")).row_levels == ("bank_country",)
    assert transform_query(q(row_levels=("bank",)), DrillDown("row")).row_levels == ("account",)
    # parent already shown: the innermost level is dropped instead
    nested = q(row_levels=("company_country", "company"))
    assert transform_query(nested, RollUp("row")).row_levels == ("company_country",)
    banked = q(row_levels=("bank", "account"))
    assert transform_query(banked, RollUp("row")).row_levels == ("bank",)


def test_bad_axis_is_rejected():
    with pytest.raises(CubeQueryError) as err:
        transform_query(q(row_levels=("company",)), RollUp("diagonal"))
    assert err.value.code == "BAD_OP"


def test_pivot_swap_is_an_involution_and_transposes(fixture_env):
    base = q(row_levels=("company",), col_levels=("month",), time_grain="month",
             aggregator=AVERAGE)
    swapped = transform_query(base, PivotSwap())
    assert transform_query(swapped, PivotSwap()) == base

    straight = query_pivot(fixture_env["cube"], base)
    crossed = query_pivot(fixture_env["cube"], swapped)
    assert crossed.row_headers == straight.col_headers
    assert crossed.col_headers == straight.row_headers
    assert crossed.row_totals == straight.col_totals
    assert crossed.col_totals == straight.row_totals
    assert crossed.grand_total == straight.grand_total
    for i in range(len(straight.row_headers)):
        for j in range(len(straight.col_headers)):
            assert crossed.cells[j][i] == straight.cells[i][j]


def test_slice_and_dice_equal_manual_filters(fixture_env):
    base = q(row_levels=("account",), col_levels=("month",), time_grain="month")
    sliced = transform_query(base, Slice("company", "C1"))
    assert query_pivot(fixture_env["cube"], sliced) == query_pivot(
        fixture_env["cube"], q(row_levels=("account",), col_levels=("month",),
                               time_grain="month", filters={"company": ("C1",)}))
    diced = transform_query(base, Dice("account", ("A1", "A2")))
    assert query_pivot(fixture_env["cube"], diced) == query_pivot(
        fixture_env["cube"], q(row_levels=("account",), col_levels=("month",),
                               time_grain="month", filters={"account": ("A1", "A2")}))


# --- aggregation invariants ----------------------------------------------------

def test_company_cells_are_sums_of_account_cells(fixture_env):
    months = q(col_levels=("month",), time_grain="month")
    by_company = query_pivot(fixture_env["cube"], replace(months, row_levels=("company",)))
    by_account = query_pivot(fixture_env["cube"], replace(months, row_levels=("account",)))
    children = {"C1": ("A1", "A3"), "C2": ("A2",)}
    for i, (company,) in enumerate(by_company.row_headers):
        rows = [by_account.row_headers.index((a,)) for a in children[company]]
        for j in range(len(by_company.col_headers)):
            parts = [by_account.cells[r][j] for r in rows]
            if by_company.cells[i][j] is None:
                assert all(p is None for p in parts)
            else:
                assert by_company.cells[i][j] == sum(parts)


def test_year_cell_equals_december_cell(fixture_env):
    yearly = query_pivot(fixture_env["cube"], q(
        row_levels=("year",), time_grain="year", date_to=date(2015, 12, 31)))
    monthly = query_pivot(fixture_env["cube"], q(
        row_levels=("month",), time_grain="month", date_to=date(2015, 12, 31)))
    assert yearly.cells[0][0] == monthly.cells[monthly.row_headers.index(("2015-12",))][0]


def test_average_is_linear_within_rounding(fixture_env):
    merged = query_pivot(fixture_env["cube"], q(aggregator=AVERAGE)).grand_total
    per_account = query_pivot(fixture_env["cube"], q(
        row_levels=("account",), aggregator=AVERAGE))
    assert abs(merged - sum(r[0] for r in per_account.cells)) <= len(per_account.cells)


def test_filters_commute(fixture_env):
    base = q(row_levels=("account",))
    one_way = transform_query(transform_query(base, Slice("company", "C1")),
                              Slice("currency", "EUR"))
    other_way = transform_query(transform_query(base, Slice("currency", "EUR")),
                                Slice("company", "C1"))
    assert query_pivot(fixture_env["cube"], one_way) == query_pivot(
        fixture_env["cube"], other_way)


def test_range_end_is_inclusive(fixture_env):
    full = query_pivot(fixture_env["cube"], q(row_levels=("account",)))
    explicit = query_pivot(fixture_env["cube"], q(
        row_levels=("account",), date_to=FIXTURE_LAST))
    assert full == explicit
