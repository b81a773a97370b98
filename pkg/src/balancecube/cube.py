"""In-memory OLAP engine over the fact store.

A cube is an immutable snapshot: dense per-measure matrices shaped
(account, day) plus per-level member codes for every hierarchy level.
Queries partition the matrices into cells along row/column headers and
aggregate with semi-additive semantics — AVERAGE is the mean over the
cell's days of the per-day sum, SUM_CLOSING is the sum across accounts
on the cell period's flagged last day. All arithmetic is exact integer
minor units; rounding (half-even) happens once per reported value.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from datetime import date
from typing import Mapping, Optional, Sequence

import numpy as np

from .money import MoneyMinor, div_round_half_even
from .star_schema import Dimensions, FactStore, validate_star
from .time_dimension import TimeRecord, TimeTable

MEASURES = ("balance_orig", "balance_eur", "working_orig", "working_eur")
SUM_CLOSING = "SUM_CLOSING"
AVERAGE = "AVERAGE"
AGGREGATORS = (SUM_CLOSING, AVERAGE)
TIME_GRAINS = ("day", "week", "month", "quarter", "semester", "year")

ROW = "row"
COL = "col"


@dataclass(frozen=True)
class CubeSchema:
    """Hierarchy layout: which levels exist and how they nest."""

    account_hierarchies: tuple[tuple[str, tuple[str, ...]], ...]
    time_hierarchies: tuple[tuple[str, tuple[str, ...]], ...]
    measures: tuple[str, ...] = MEASURES
    aggregators: tuple[str, ...] = AGGREGATORS
    time_grains: tuple[str, ...] = TIME_GRAINS

    @property
    def account_levels(self) -> tuple[str, ...]:
        seen: list[str] = []
        for _, levels in self.account_hierarchies:
            for level in levels:
                if level not in seen:
                    seen.append(level)
        return tuple(seen)

    @property
    def time_levels(self) -> tuple[str, ...]:
        seen: list[str] = []
        for _, levels in self.time_hierarchies:
            for level in levels:
                if level not in seen:
                    seen.append(level)
        return tuple(seen)

    @property
    def levels(self) -> tuple[str, ...]:
        return self.account_levels + self.time_levels

    def is_time_level(self, level: str) -> bool:
        return level in self.time_levels

    def hierarchy_for(self, level: str, context: Sequence[str] = ()) -> str:
        """Hierarchy a level navigates in; context levels break ties for
        levels that belong to several hierarchies (the account leaf)."""
        candidates = [name for name, levels in self.account_hierarchies if level in levels]
        if not candidates:
            candidates = [name for name, levels in self.time_hierarchies if level in levels]
        if not candidates:
            raise CubeQueryError("UNKNOWN_LEVEL", f"unknown level {level!r}")
        if len(candidates) > 1:
            table = dict(self.account_hierarchies + self.time_hierarchies)
            for name in candidates:
                if any(other != level and other in table[name] for other in context):
                    return name
        return candidates[0]

    def parent_of(self, level: str, context: Sequence[str] = ()) -> Optional[str]:
        name = self.hierarchy_for(level, context)
        levels = dict(self.account_hierarchies + self.time_hierarchies)[name]
        idx = levels.index(level)
        return levels[idx - 1] if idx > 0 else None

    def child_of(self, level: str, context: Sequence[str] = ()) -> Optional[str]:
        name = self.hierarchy_for(level, context)
        levels = dict(self.account_hierarchies + self.time_hierarchies)[name]
        idx = levels.index(level)
        return levels[idx + 1] if idx + 1 < len(levels) else None


DEFAULT_SCHEMA = CubeSchema(
    account_hierarchies=(
        ("CompanyGeo", ("company_country", "company", "account")),
        ("BankGeo", ("bank_country", "bank", "account")),
        ("Currency", ("currency", "account")),
    ),
    time_hierarchies=(
        ("Calendar", ("year", "semester", "quarter", "month", "day")),
        ("Weekly", ("iso_week_year", "week", "day")),
    ),
)


class CubeError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


class CubeQueryError(CubeError):
    """Query rejected: unknown name, bad range, inapplicable operation..."""


def _normalize_filters(filters) -> tuple[tuple[str, tuple[str, ...]], ...]:
    if isinstance(filters, Mapping):
        pairs = filters.items()
    else:
        pairs = filters
    return tuple((level, tuple(sorted(set(members)))) for level, members in pairs)


@dataclass(frozen=True)
class PivotQuery:
    measure: str
    aggregator: str
    row_levels: tuple[str, ...] = ()
    col_levels: tuple[str, ...] = ()
    filters: tuple[tuple[str, tuple[str, ...]], ...] = ()
    date_from: Optional[date] = None   # None: clamp to the table edge
    date_to: Optional[date] = None
    time_grain: str = "day"

    def __post_init__(self):
        object.__setattr__(self, "row_levels", tuple(self.row_levels))
        object.__setattr__(self, "col_levels", tuple(self.col_levels))
        object.__setattr__(self, "filters", _normalize_filters(self.filters))


@dataclass(frozen=True)
class PivotResult:
    measure: str
    aggregator: str
    time_grain: str
    currency_code: str
    row_levels: tuple[str, ...]
    col_levels: tuple[str, ...]
    row_headers: tuple[tuple[str, ...], ...]
    col_headers: tuple[tuple[str, ...], ...]
    cells: tuple[tuple[Optional[int], ...], ...]
    row_totals: tuple[Optional[int], ...]
    col_totals: tuple[Optional[int], ...]
    grand_total: Optional[int]

    def cell_money(self, i: int, j: int) -> Optional[MoneyMinor]:
        value = self.cells[i][j]
        return None if value is None else MoneyMinor(value, self.currency_code)


# pivot operations for transform_query
@dataclass(frozen=True)
class RollUp:
    axis: str = ROW


@dataclass(frozen=True)
class DrillDown:
    axis: str = ROW


@dataclass(frozen=True)
class Slice:
    level: str
    member: str


@dataclass(frozen=True)
class Dice:
    level: str
    members: tuple[str, ...]


@dataclass(frozen=True)
class PivotSwap:
    pass


def time_level_label(rec: TimeRecord, level: str) -> str:
    """Member code of a day at a time level; codes sort chronologically."""
    if level == "day":
        return rec.date.isoformat()
    if level == "week":
        return f"{rec.iso_week_year}-W{rec.iso_week_no:02d}"
    if level == "month":
        return f"{rec.year}-{rec.month:02d}"
    if level == "quarter":
        return f"{rec.year}-Q{rec.quarter}"
    if level == "semester":
        return f"{rec.year}-S{rec.semester}"
    if level == "year":
        return str(rec.year)
    if level == "iso_week_year":
        return str(rec.iso_week_year)
    raise CubeQueryError("UNKNOWN_LEVEL", f"unknown time level {level!r}")


_GRAIN_FLAG_ATTR = {
    "week": "is_last_day_of_week",
    "month": "is_last_day_of_month",
    "quarter": "is_last_day_of_quarter",
    "semester": "is_last_day_of_semester",
    "year": "is_last_day_of_year",
}


@dataclass(frozen=True)
class CubeSnapshot:
    schema: CubeSchema
    dimensions: Dimensions
    time_table: TimeTable
    digest: str
    account_ids: tuple[str, ...]
    account_currencies: tuple[str, ...]
    dates: tuple[date, ...]
    measures: Mapping[str, np.ndarray]           # (accounts, days) int64
    acc_codes: Mapping[str, np.ndarray]          # level -> int32 per account
    acc_members: Mapping[str, tuple[str, ...]]   # level -> sorted member codes
    day_codes: Mapping[str, np.ndarray]          # time level -> int32 per day
    day_members: Mapping[str, tuple[str, ...]]
    day_flags: Mapping[str, np.ndarray]          # grain -> closing-day flag per day

    @property
    def n_accounts(self) -> int:
        return len(self.account_ids)

    @property
    def n_days(self) -> int:
        return len(self.dates)

    def members(self, level: str) -> tuple[str, ...]:
        if level in self.acc_members:
            return self.acc_members[level]
        if level in self.day_members:
            return self.day_members[level]
        raise CubeQueryError("UNKNOWN_LEVEL", f"unknown level {level!r}")


def account_level_members(dimensions: Dimensions, account_id: str) -> dict[str, str]:
    """Member code of one account at every account-dimension level."""
    account = dimensions.accounts_by_id[account_id]
    company = dimensions.companies_by_id[account.company_id]
    bank = dimensions.banks_by_id[account.bank_id]
    return {
        "account": account.account_id,
        "company": account.company_id,
        "bank": account.bank_id,
        "currency": account.currency_code,
        "company_country": company.country_code,
        "bank_country": bank.country_code,
    }


def build_cube(
    store: FactStore,
    dimensions: Dimensions,
    time_table: TimeTable,
    schema: CubeSchema = DEFAULT_SCHEMA,
) -> CubeSnapshot:
    """Snapshot the store into dense matrices plus member indexes.

    Accounts with no facts are left out (an empty store yields a cube whose
    every query returns an empty grid); accounts that do appear must be
    dense over the whole table.
    """
    report = validate_star(dimensions, store, time_table)
    if not report.ok:
        head = "; ".join(f"{v.kind}: {v.detail}" for v in report.violations[:5])
        raise CubeError("STAR_INVALID", f"{len(report.violations)} violation(s): {head}")

    dates = tuple(rec.date for rec in time_table)
    date_pos = {d: i for i, d in enumerate(dates)}
    n_days = len(dates)

    present: dict[str, int] = {}
    for fact in store:
        present[fact.account_id] = present.get(fact.account_id, 0) + 1
    account_ids = tuple(sorted(present))
    for account_id, count in present.items():
        if count != n_days:
            raise CubeError(
                "SPARSE_STORE",
                f"account {account_id!r} has {count} facts for a {n_days}-day table",
            )
    acc_pos = {a: i for i, a in enumerate(account_ids)}
    n_accounts = len(account_ids)

    measures = {m: np.zeros((n_accounts, n_days), dtype=np.int64) for m in MEASURES}
    for fact in store:
        a = acc_pos[fact.account_id]
        d = date_pos[fact.value_date]
        measures["balance_orig"][a, d] = fact.balance_orig.amount_minor
        measures["balance_eur"][a, d] = fact.balance_eur.amount_minor
        measures["working_orig"][a, d] = fact.working_orig.amount_minor
        measures["working_eur"][a, d] = fact.working_eur.amount_minor

    cells = max(1, n_accounts * n_days)
    for name, arr in measures.items():
        if arr.size and int(np.abs(arr).max()) > (2**62) // cells:
            raise CubeError("OVERFLOW", f"measure {name} too large for exact aggregation")

    acc_codes: dict[str, np.ndarray] = {}
    acc_members: dict[str, tuple[str, ...]] = {}
    per_account = [account_level_members(dimensions, a) for a in account_ids]
    for level in schema.account_levels:
        values = [row[level] for row in per_account]
        members = tuple(sorted(set(values)))
        index = {m: i for i, m in enumerate(members)}
        acc_members[level] = members
        acc_codes[level] = np.array([index[v] for v in values], dtype=np.int32)

    day_codes: dict[str, np.ndarray] = {}
    day_members: dict[str, tuple[str, ...]] = {}
    for level in schema.time_levels:
        labels = [time_level_label(rec, level) for rec in time_table]
        members = tuple(sorted(set(labels)))
        index = {m: i for i, m in enumerate(members)}
        day_members[level] = members
        day_codes[level] = np.array([index[v] for v in labels], dtype=np.int32)

    day_flags: dict[str, np.ndarray] = {"day": np.ones(n_days, dtype=bool)}
    for grain, attr in _GRAIN_FLAG_ATTR.items():
        day_flags[grain] = np.array([getattr(rec, attr) for rec in time_table], dtype=bool)

    return CubeSnapshot(
        schema=schema,
        dimensions=dimensions,
        time_table=time_table,
        digest=store.digest(),
        account_ids=account_ids,
        account_currencies=tuple(dimensions.accounts_by_id[a].currency_code for a in account_ids),
        dates=dates,
        measures=measures,
        acc_codes=acc_codes,
        acc_members=acc_members,
        day_codes=day_codes,
        day_members=day_members,
        day_flags=day_flags,
    )


def validate_query(cube: CubeSnapshot, query: PivotQuery) -> tuple[date, date]:
    """Reject malformed queries; returns the resolved inclusive date range."""
    schema = cube.schema
    if query.measure not in schema.measures:
        raise CubeQueryError("UNKNOWN_MEASURE", f"unknown measure {query.measure!r}")
    if query.aggregator not in schema.aggregators:
        raise CubeQueryError("UNKNOWN_AGGREGATOR", f"unknown aggregator {query.aggregator!r}")
    if query.time_grain not in schema.time_grains:
        raise CubeQueryError("UNKNOWN_GRAIN", f"unknown time grain {query.time_grain!r}")

    seen: set[str] = set()
    time_axis_levels: list[str] = []
    for level in query.row_levels + query.col_levels:
        if level not in schema.levels:
            raise CubeQueryError("UNKNOWN_LEVEL", f"unknown level {level!r}")
        if level in seen:
            raise CubeQueryError("DUPLICATE_LEVEL", f"level {level!r} used twice")
        seen.add(level)
        if schema.is_time_level(level):
            time_axis_levels.append(level)
    if len(time_axis_levels) > 1:
        raise CubeQueryError(
            "MULTIPLE_TIME_LEVELS",
            f"more than one time level on the axes: {time_axis_levels}",
        )
    if time_axis_levels and time_axis_levels[0] != query.time_grain:
        raise CubeQueryError(
            "TIME_GRAIN_MISMATCH",
            f"axis time level {time_axis_levels[0]!r} does not match grain {query.time_grain!r}",
        )

    for level, members in query.filters:
        if level not in schema.levels:
            raise CubeQueryError("UNKNOWN_LEVEL", f"unknown filter level {level!r}")
        universe = cube.members(level)
        for member in members:
            if member not in universe:
                raise CubeQueryError(
                    "UNKNOWN_MEMBER", f"{member!r} is not a member of level {level!r}"
                )

    first, last = cube.time_table.first_date, cube.time_table.last_date
    date_from = query.date_from if query.date_from is not None else first
    date_to = query.date_to if query.date_to is not None else last
    if date_from > date_to:
        raise CubeQueryError("BAD_RANGE", f"date_from {date_from} after date_to {date_to}")
    if date_from < first or date_to > last:
        raise CubeQueryError(
            "BAD_RANGE",
            f"range {date_from}..{date_to} outside table {first}..{last}",
        )
    return date_from, date_to


@dataclass
class _AxisPlan:
    levels: tuple[str, ...]
    headers: list[tuple[str, ...]]
    acc_bucket: np.ndarray       # per masked account: raw combo contribution
    time_stride: int             # stride of the time coordinate (0 if no time level)
    n_parts: int                 # time parts on this axis (1 if none)
    inv_perm: np.ndarray         # raw combo index -> sorted header index
    header_part: np.ndarray      # sorted header index -> time part (0 if none)
    holds_time: bool


def _plan_axis(
    cube: CubeSnapshot,
    levels: tuple[str, ...],
    acc_sel: np.ndarray,
    part_labels: list[str],
) -> _AxisPlan:
    """Headers and bucket arithmetic for one axis.

    Levels of one hierarchy contribute their observed chains; distinct
    hierarchies (and the time level) multiply as a cross product, so
    combinations with no facts become empty cells.
    """
    schema = cube.schema
    account_levels = [l for l in levels if not schema.is_time_level(l)]
    holds_time = any(schema.is_time_level(l) for l in levels)

    # group account levels by the hierarchy they navigate
    group_names: list[str] = []
    grouped: dict[str, list[str]] = {}
    for level in account_levels:
        name = schema.hierarchy_for(level, account_levels)
        if name not in grouped:
            grouped[name] = []
            group_names.append(name)
        grouped[name].append(level)

    # ordered units of the cross product: account groups and the time level,
    # in order of first appearance on the axis
    units: list[tuple[str, list[str]]] = []
    added: set[str] = set()
    for level in levels:
        if schema.is_time_level(level):
            units.append(("__time__", [level]))
        else:
            name = schema.hierarchy_for(level, account_levels)
            if name not in added:
                added.add(name)
                units.append((name, grouped[name]))

    n_masked = len(acc_sel)
    unit_sizes: list[int] = []
    unit_acc_idx: list[Optional[np.ndarray]] = []   # per masked account
    unit_chains: list[list[tuple[str, ...]]] = []
    for name, unit_levels in units:
        if name == "__time__":
            unit_sizes.append(len(part_labels))
            unit_acc_idx.append(None)
            unit_chains.append([(label,) for label in part_labels])
            continue
        codes = [cube.acc_codes[l][acc_sel] for l in unit_levels]
        members = [cube.acc_members[l] for l in unit_levels]
        tuples = [
            tuple(members[k][codes[k][i]] for k in range(len(unit_levels)))
            for i in range(n_masked)
        ]
        chains = sorted(set(tuples))
        chain_idx = {c: i for i, c in enumerate(chains)}
        unit_sizes.append(len(chains))
        unit_acc_idx.append(np.array([chain_idx[t] for t in tuples], dtype=np.int64))
        unit_chains.append(chains)

    # raw combo index = sum of unit indexes weighted by row-major strides
    strides = [0] * len(units)
    acc = 1
    for k in range(len(units) - 1, -1, -1):
        strides[k] = acc
        acc *= unit_sizes[k]
    n_raw = acc if units else 1

    acc_bucket = np.zeros(n_masked, dtype=np.int64)
    time_stride = 0
    for k, (name, _) in enumerate(units):
        if name == "__time__":
            time_stride = strides[k]
        else:
            acc_bucket += unit_acc_idx[k] * strides[k]

    # assemble headers in axis-level order, then sort them
    position_of = {}
    for k, (_, unit_levels) in enumerate(units):
        for within, level in enumerate(unit_levels):
            position_of[level] = (k, within)
    raw_headers: list[tuple[str, ...]] = []
    raw_parts: list[int] = []
    for combo in itertools.product(*(range(s) for s in unit_sizes)):
        header = tuple(
            unit_chains[position_of[level][0]][combo[position_of[level][0]]][position_of[level][1]]
            for level in levels
        )
        raw_headers.append(header)
        part = 0
        for k, (name, _) in enumerate(units):
            if name == "__time__":
                part = combo[k]
        raw_parts.append(part)

    if n_raw == 0 or n_masked == 0:
        # a unit with no chains (or no accounts at all): nothing to show
        return _AxisPlan(levels, [], np.zeros(0, dtype=np.int64), 0, max(1, len(part_labels)),
                         np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), holds_time)

    order = sorted(range(n_raw), key=lambda i: raw_headers[i])
    inv_perm = np.zeros(n_raw, dtype=np.int64)
    for sorted_idx, raw_idx in enumerate(order):
        inv_perm[raw_idx] = sorted_idx
    headers = [raw_headers[i] for i in order]
    header_part = np.array([raw_parts[i] for i in order], dtype=np.int64)

    return _AxisPlan(
        levels, headers, acc_bucket, time_stride,
        len(part_labels) if holds_time else 1,
        inv_perm, header_part, holds_time,
    )


def _bucket_matrix(plan: _AxisPlan, day_part: np.ndarray) -> np.ndarray:
    """(masked accounts, masked days) -> sorted header index."""
    raw = plan.acc_bucket[:, None] + (plan.time_stride * day_part)[None, :]
    return plan.inv_perm[raw]


def _aggregate(
    vals: np.ndarray,
    R: np.ndarray,
    C: np.ndarray,
    n_rows: int,
    n_cols: int,
    cell_part: np.ndarray,
    day_part: np.ndarray,
    n_parts: int,
    flags_sel: np.ndarray,
    aggregator: str,
) -> list[list[Optional[int]]]:
    """Shared cell arithmetic for the grid, the totals and the grand total.

    ``cell_part`` maps each (row, col) cell to its time part; merged axes
    pass a single all-days part so totals re-aggregate the merged scope.
    """
    size = n_rows * n_cols
    if size == 0:
        return [[] for _ in range(n_rows)]
    sums = np.zeros(size, dtype=np.int64)
    grid: list[list[Optional[int]]] = [[None] * n_cols for _ in range(n_rows)]
    if vals.size == 0:
        return grid

    if aggregator == AVERAGE:
        flat = R * n_cols + C
        np.add.at(sums, flat, vals)
        contribs = np.zeros(size, dtype=np.int64)
        np.add.at(contribs, flat, 1)
        days_per_part = np.bincount(day_part, minlength=n_parts)
        for i in range(n_rows):
            base = i * n_cols
            for j in range(n_cols):
                if contribs[base + j]:
                    grid[i][j] = div_round_half_even(
                        int(sums[base + j]), int(days_per_part[cell_part[i, j]])
                    )
        return grid

    # SUM_CLOSING: per time part, the latest flagged day in scope
    closing = np.full(n_parts, -1, dtype=np.int64)
    flagged = np.nonzero(flags_sel)[0]
    if flagged.size:
        np.maximum.at(closing, day_part[flagged], flagged)
    counts = np.zeros(size, dtype=np.int64)
    for part in range(n_parts):
        c = int(closing[part])
        if c < 0:
            continue
        flat_t = R[:, c] * n_cols + C[:, c]
        np.add.at(sums, flat_t, vals[:, c])
        np.add.at(counts, flat_t, 1)
    for i in range(n_rows):
        base = i * n_cols
        for j in range(n_cols):
            if counts[base + j]:
                grid[i][j] = int(sums[base + j])
    return grid


def query_pivot(cube: CubeSnapshot, query: PivotQuery) -> PivotResult:
    date_from, date_to = validate_query(cube, query)
    schema = cube.schema
    grain = query.time_grain

    # account scope: every account-dimension filter must pass
    acc_mask = np.ones(cube.n_accounts, dtype=bool)
    day_mask = np.zeros(cube.n_days, dtype=bool)
    lo = cube.time_table.index_of(date_from)
    hi = cube.time_table.index_of(date_to)
    day_mask[lo:hi + 1] = True
    for level, members in query.filters:
        if schema.is_time_level(level):
            universe = cube.day_members[level]
            codes = {universe.index(m) for m in members}
            day_mask &= np.isin(cube.day_codes[level], list(codes))
        else:
            universe = cube.acc_members[level]
            codes = {universe.index(m) for m in members}
            acc_mask &= np.isin(cube.acc_codes[level], list(codes))

    acc_sel = np.nonzero(acc_mask)[0]
    day_sel = np.nonzero(day_mask)[0]

    currencies = sorted({cube.account_currencies[i] for i in acc_sel})
    if query.measure.endswith("_eur"):
        currency_code = "EUR"
    else:
        if len(currencies) > 1:
            raise CubeQueryError(
                "MIXED_CURRENCY",
                f"{query.measure} over accounts in {currencies}; filter to one currency",
            )
        currency_code = currencies[0] if currencies else ""

    empty_scope = acc_sel.size == 0 or day_sel.size == 0

    # time parts over the masked days at the query grain
    if empty_scope:
        part_labels: list[str] = []
        day_part = np.zeros(day_sel.size, dtype=np.int64)
    else:
        grain_codes = cube.day_codes[grain][day_sel]
        unique_codes = np.unique(grain_codes)
        part_labels = [cube.day_members[grain][c] for c in unique_codes]
        day_part = np.searchsorted(unique_codes, grain_codes)

    row_plan = _plan_axis(cube, query.row_levels, acc_sel, part_labels)
    col_plan = _plan_axis(cube, query.col_levels, acc_sel, part_labels)
    if empty_scope:
        row_plan.headers = []
        col_plan.headers = []

    n_rows = len(row_plan.headers)
    n_cols = len(col_plan.headers)
    vals = cube.measures[query.measure][np.ix_(acc_sel, day_sel)]
    flags_sel = cube.day_flags[grain][day_sel]
    merged_part = np.zeros(day_sel.size, dtype=np.int64)
    no_parts = np.zeros((1, 1), dtype=np.int64)

    def empty_result() -> PivotResult:
        return PivotResult(
            measure=query.measure, aggregator=query.aggregator, time_grain=grain,
            currency_code=currency_code,
            row_levels=query.row_levels, col_levels=query.col_levels,
            row_headers=tuple(row_plan.headers), col_headers=tuple(col_plan.headers),
            cells=tuple(tuple(row) for row in [[None] * n_cols for _ in range(n_rows)]),
            row_totals=(None,) * n_rows, col_totals=(None,) * n_cols, grand_total=None,
        )

    if n_rows == 0 or n_cols == 0 or empty_scope:
        return empty_result()

    n_parts = max(1, len(part_labels))
    R = _bucket_matrix(row_plan, day_part)
    C = _bucket_matrix(col_plan, day_part)
    zeros_like_R = np.zeros_like(R)

    # without a time level on an axis every cell spans the whole masked range
    if row_plan.holds_time:
        cell_part = np.broadcast_to(row_plan.header_part[:, None], (n_rows, n_cols))
        cell_day_part, cell_n_parts = day_part, n_parts
    elif col_plan.holds_time:
        cell_part = np.broadcast_to(col_plan.header_part[None, :], (n_rows, n_cols))
        cell_day_part, cell_n_parts = day_part, n_parts
    else:
        cell_part = np.zeros((n_rows, n_cols), dtype=np.int64)
        cell_day_part, cell_n_parts = merged_part, 1

    cells = _aggregate(vals, R, C, n_rows, n_cols, cell_part, cell_day_part,
                       cell_n_parts, flags_sel, query.aggregator)

    # totals re-aggregate the merged scope (semi-additive: not a sum of cells)
    if row_plan.holds_time:
        rt = _aggregate(vals, R, zeros_like_R, n_rows, 1,
                        row_plan.header_part[:, None], day_part, n_parts,
                        flags_sel, query.aggregator)
    else:
        rt = _aggregate(vals, R, zeros_like_R, n_rows, 1,
                        np.zeros((n_rows, 1), dtype=np.int64), merged_part, 1,
                        flags_sel, query.aggregator)
    row_totals = tuple(row[0] for row in rt)

    if col_plan.holds_time:
        ct = _aggregate(vals, zeros_like_R, C, 1, n_cols,
                        col_plan.header_part[None, :], day_part, n_parts,
                        flags_sel, query.aggregator)
    else:
        ct = _aggregate(vals, zeros_like_R, C, 1, n_cols,
                        np.zeros((1, n_cols), dtype=np.int64), merged_part, 1,
                        flags_sel, query.aggregator)
    col_totals = tuple(ct[0])

    gt = _aggregate(vals, zeros_like_R, zeros_like_R, 1, 1, no_parts, merged_part, 1,
                    flags_sel, query.aggregator)
    grand_total = gt[0][0]

    return PivotResult(
        measure=query.measure, aggregator=query.aggregator, time_grain=grain,
        currency_code=currency_code,
        row_levels=query.row_levels, col_levels=query.col_levels,
        row_headers=tuple(row_plan.headers), col_headers=tuple(col_plan.headers),
        cells=tuple(tuple(row) for row in cells),
        row_totals=row_totals, col_totals=col_totals, grand_total=grand_total,
    )


_GRAIN_PARENT = {"day": "month", "month": "quarter", "quarter": "semester",
                 "semester": "year", "year": None, "week": None}
_GRAIN_CHILD = {"year": "semester", "semester": "quarter", "quarter": "month",
                "month": "day", "week": "day", "day": None}


def _axis_levels(query: PivotQuery, axis: str) -> tuple[str, ...]:
    if axis == ROW:
        return query.row_levels
    if axis == COL:
        return query.col_levels
    raise CubeQueryError("BAD_OP", f"axis must be 'row' or 'col', got {axis!r}")


def _with_axis(query: PivotQuery, axis: str, levels: tuple[str, ...], grain: str) -> PivotQuery:
    if axis == ROW:
        return replace(query, row_levels=levels, time_grain=grain)
    return replace(query, col_levels=levels, time_grain=grain)


def transform_query(query: PivotQuery, op, schema: CubeSchema = DEFAULT_SCHEMA) -> PivotQuery:
    """Navigation steps expressed as query rewrites."""
    if isinstance(op, PivotSwap):
        return replace(query, row_levels=query.col_levels, col_levels=query.row_levels)

    if isinstance(op, Slice):
        if op.level not in schema.levels:
            raise CubeQueryError("UNKNOWN_LEVEL", f"unknown level {op.level!r}")
        return replace(query, filters=query.filters + ((op.level, (op.member,)),))

    if isinstance(op, Dice):
        if op.level not in schema.levels:
            raise CubeQueryError("UNKNOWN_LEVEL", f"unknown level {op.level!r}")
        return replace(query, filters=query.filters + ((op.level, tuple(op.members)),))

    if isinstance(op, (RollUp, DrillDown)):
        levels = list(_axis_levels(query, op.axis))
        if not levels:
            raise CubeQueryError("INAPPLICABLE_OP", f"{op.axis} axis has no levels")
        inner = levels[-1]
        used = set(query.row_levels) | set(query.col_levels)
        if schema.is_time_level(inner):
            step = _GRAIN_PARENT if isinstance(op, RollUp) else _GRAIN_CHILD
            target = step.get(inner)
            if target is None:
                edge = "coarsest" if isinstance(op, RollUp) else "finest"
                raise CubeQueryError("INAPPLICABLE_OP", f"{inner!r} is already the {edge} time level")
            levels[-1] = target
            return _with_axis(query, op.axis, tuple(levels), target)
        if isinstance(op, RollUp):
            parent = schema.parent_of(inner, levels)
            if parent is None:
                raise CubeQueryError("INAPPLICABLE_OP", f"{inner!r} is a hierarchy root")
            if parent in used:
                levels.pop()
            else:
                levels[-1] = parent
        else:
            child = schema.child_of(inner, levels)
            if child is None:
                raise CubeQueryError("INAPPLICABLE_OP", f"{inner!r} is a leaf level")
            if child in used:
                raise CubeQueryError("INAPPLICABLE_OP", f"{child!r} already on an axis")
            levels[-1] = child
        return _with_axis(query, op.axis, tuple(levels), query.time_grain)

    raise CubeQueryError("BAD_OP", f"unsupported operation {op!r}")
