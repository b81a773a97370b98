"""Timing harness: cube refresh-and-read vs. recomputing from raw files.

Two modalities are timed per query scope. Modality I refreshes the cube
from the committed fact store and reads the pivot off the fresh snapshot —
the refresh is the real cost of that workflow and is independent of the
query window. Modality II re-derives daily balances from the movement CSV
(phase 1), then round-trips them through a CSV export and aggregates the
rows column by column (phase 2), the way a prepared spreadsheet would;
its cost tracks the amount of data the query asks for. Both must return
the identical grid — only the time may differ.
"""

from __future__ import annotations

import csv
import io
import math
import statistics
import time
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path
from typing import Mapping, Optional

from .configfile import as_float, as_int, parse_kv_file
from .cube import AVERAGE, SUM_CLOSING, PivotQuery, PivotResult, build_cube, query_pivot
from .money import convert_minor, div_round_half_even, format_minor, format_rate, parse_amount, parse_rate
from .star_schema import Dimensions, FactStore
from .time_dimension import TimeTable, build_time_table, save_time_table

DOT = "DOT"
COMMA = "COMMA"
LOCALES = (DOT, COMMA)

CRIT95_DF4 = 2.776
CRIT99_DF4 = 4.604

_COUNTRY_POOL = (
    ("PT", "Portugal"), ("ES", "Spain"), ("FR", "France"), ("DE", "Germany"),
    ("IT", "Italy"), ("NL", "Netherlands"), ("BE", "Belgium"), ("IE", "Ireland"),
)
_CURRENCY_NAMES = {
    "EUR": "Euro", "USD": "US Dollar", "GBP": "Pound Sterling",
    "CHF": "Swiss Franc", "JPY": "Japanese Yen", "SEK": "Swedish Krona",
}


class BenchError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


# --- deterministic dataset generation ----------------------------------------

@dataclass(frozen=True)
class GeneratorParams:
    seed: int = 1
    n_companies: int = 3
    n_banks: int = 4
    n_accounts: int = 10
    first_year: int = 2015
    last_year: int = 2015
    movements_per_account_day: float = 2.0
    forecast_fraction: float = 0.35
    currency_mix: tuple[tuple[str, float], ...] = (("EUR", 0.7), ("USD", 0.3))

    def __post_init__(self):
        for name in ("n_companies", "n_banks", "n_accounts"):
            if getattr(self, name) < 0:
                raise BenchError("BAD_PARAMS", f"{name} must be >= 0")
        if self.last_year < self.first_year:
            raise BenchError("BAD_PARAMS", "last_year before first_year")
        if not 0.0 <= self.forecast_fraction <= 1.0:
            raise BenchError("BAD_PARAMS", "forecast_fraction outside [0, 1]")
        if self.movements_per_account_day < 0:
            raise BenchError("BAD_PARAMS", "movements_per_account_day must be >= 0")
        if self.n_accounts and (self.n_companies == 0 or self.n_banks == 0):
            raise BenchError("BAD_PARAMS", "accounts need at least one company and bank")
        if not self.currency_mix or any(w <= 0 for _, w in self.currency_mix):
            raise BenchError("BAD_PARAMS", "currency_mix needs positive weights")

    @classmethod
    def from_file(cls, path: str | Path) -> "GeneratorParams":
        raw = parse_kv_file(path)
        kwargs: dict = {}
        for key in ("seed", "n_companies", "n_banks", "n_accounts", "first_year", "last_year"):
            if key in raw:
                kwargs[key] = as_int(raw.pop(key), key)
        for key in ("movements_per_account_day", "forecast_fraction"):
            if key in raw:
                kwargs[key] = as_float(raw.pop(key), key)
        if "currency_mix" in raw:
            pairs = []
            for item in raw.pop("currency_mix").split(","):
                code, _, weight = item.partition(":")
                pairs.append((code.strip(), float(weight)))
            kwargs["currency_mix"] = tuple(pairs)
        if raw:
            raise BenchError("BAD_PARAMS", f"unknown keys: {sorted(raw)}")
        return cls(**kwargs)


@dataclass(frozen=True)
class GeneratedDataset:
    dataset_dir: Path
    n_movements: int
    n_forecasts: int
    forecasts_by_month: Mapping[str, int]


def _poisson(rng, lam: float) -> int:
    if lam <= 0:
        return 0
    if lam > 500:
        raise BenchError("BAD_PARAMS", "movement rate too high to sample")
    limit = math.exp(-lam)
    k, p = 0, 1.0
    while True:
        p *= rng.random()
        if p <= limit:
            return k
        k += 1


def generate_dataset(params: GeneratorParams, out_dir: str | Path) -> GeneratedDataset:
    """Write the full CSV input set; byte-identical for a given seed."""
    import random

    rng = random.Random(params.seed)
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)

    n_countries = min(len(_COUNTRY_POOL), max(params.n_companies, params.n_banks, 1))
    countries = _COUNTRY_POOL[:n_countries]
    first_day = date(params.first_year, 1, 1)
    last_day = date(params.last_year, 12, 31)

    def write(name: str, header: list[str], rows) -> None:
        with open(root / f"{name}.csv", "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(header)
            w.writerows(rows)

    write("countries", ["country_code", "name"], countries)
    companies = [(f"C{i:03d}", f"Company {i:03d}", countries[i % n_countries][0])
                 for i in range(params.n_companies)]
    write("companies", ["company_id", "name", "country_code"], companies)
    banks = [(f"B{i:03d}", f"Bank {i:03d}", countries[(i + 1) % n_countries][0])
             for i in range(params.n_banks)]
    write("banks", ["bank_id", "name", "country_code"], banks)

    codes = [c for c, _ in params.currency_mix]
    weights = [w for _, w in params.currency_mix]
    currency_rows = sorted({c for c in codes} | {"EUR"})
    write("currencies", ["currency_code", "name"],
          [(c, _CURRENCY_NAMES.get(c, c)) for c in currency_rows])

    accounts = []
    for i in range(params.n_accounts):
        accounts.append((
            f"A{i:04d}",
            companies[i % len(companies)][0],
            banks[i % len(banks)][0],
            rng.choices(codes, weights)[0],
            f"account {i}",
        ))
    write("accounts", ["account_id", "company_id", "bank_id", "currency_code", "label"],
          accounts)

    write("opening_balances", ["account_id", "as_of_date", "amount", "currency_code"],
          [(a[0], first_day.isoformat(), format_minor(rng.randrange(0, 10_000_001)), a[3])
           for a in accounts])

    rate_rows = [("EUR", first_day.isoformat(), format_rate(10**6))]
    for code in sorted(set(codes) - {"EUR"}):
        micro = rng.randrange(500_000, 1_500_001)
        day = first_day - timedelta(days=3)
        while day <= last_day:
            rate_rows.append((code, day.isoformat(), format_rate(micro)))
            micro = max(10_000, micro + rng.randrange(-15_000, 15_001))
            day += timedelta(days=7)
    write("exchange_rates", ["currency_code", "rate_date", "rate_to_eur"], rate_rows)

    n_movements = n_forecasts = 0
    by_month: dict[str, int] = {}
    with open(root / "movements.csv", "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["account_id", "value_date", "amount", "currency_code", "kind", "description"])
        for account_id, _c, _b, currency, _label in accounts:
            day = first_day
            while day <= last_day:
                for _ in range(_poisson(rng, params.movements_per_account_day)):
                    amount = rng.randrange(-500_000, 500_001)
                    kind = "FORECAST" if rng.random() < params.forecast_fraction else "ACTUAL"
                    w.writerow([account_id, day.isoformat(), format_minor(amount),
                                currency, kind, f"m{n_movements}"])
                    n_movements += 1
                    if kind == "FORECAST":
                        n_forecasts += 1
                        key = f"{day.year}-{day.month:02d}"
                        by_month[key] = by_month.get(key, 0) + 1
                day += timedelta(days=1)

    save_time_table(build_time_table(params.first_year, params.last_year),
                    root / "time_table.csv")
    return GeneratedDataset(root, n_movements, n_forecasts, by_month)


# --- timing primitives --------------------------------------------------------

@dataclass(frozen=True)
class TimingSample:
    durations_ms: tuple[float, float, float]

    def __post_init__(self):
        if len(self.durations_ms) != 3:
            raise BenchError("BAD_SAMPLE", f"need exactly 3 durations, got {len(self.durations_ms)}")
        if any(d <= 0 for d in self.durations_ms):
            raise BenchError("BAD_SAMPLE", "durations must be positive")


@dataclass(frozen=True)
class BenchRow:
    label: str
    mean_s: float
    std_s: float


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: int
    crit95: float
    crit99: float
    significant95: bool
    significant99: bool


@dataclass(frozen=True)
class TimeBenefit:
    per_day_min: float
    per_month_min: float
    per_year_hours: float


def summarize(sample: TimingSample, label: str = "") -> BenchRow:
    seconds = [d / 1000.0 for d in sample.durations_ms]
    return BenchRow(label, statistics.fmean(seconds), statistics.stdev(seconds))


def pooled_t(mean1: float, std1: float, n1: int,
             mean2: float, std2: float, n2: int) -> TTestResult:
    """Pooled-variance two-sample t statistic with df = n1 + n2 - 2."""
    if n1 < 2 or n2 < 2:
        raise BenchError("BAD_SAMPLE", "each group needs at least 2 observations")
    if std1 < 0 or std2 < 0:
        raise BenchError("BAD_SAMPLE", "standard deviations must be >= 0")
    df = n1 + n2 - 2
    sp2 = ((n1 - 1) * std1**2 + (n2 - 1) * std2**2) / df
    if sp2 == 0:
        t = 0.0 if mean1 == mean2 else math.copysign(math.inf, mean2 - mean1)
    else:
        t = (mean2 - mean1) / (math.sqrt(sp2) * math.sqrt(1 / n1 + 1 / n2))
    return TTestResult(
        t=t, df=df, crit95=CRIT95_DF4, crit99=CRIT99_DF4,
        significant95=abs(t) > CRIT95_DF4, significant99=abs(t) > CRIT99_DF4,
    )


def time_benefit(mean_cube_s: float, mean_naive_s: float) -> TimeBenefit:
    """Signed time difference (cube minus naive): negative means time saved."""
    per_day = (mean_cube_s - mean_naive_s) / 60.0
    return TimeBenefit(per_day, per_day * 22, per_day * 264 / 60.0)


def _timed(fn) -> tuple[TimingSample, object]:
    """One discarded warm-up, then three measured runs (monotonic clock)."""
    result = fn()
    durations = []
    for _ in range(3):
        t0 = time.perf_counter()
        result = fn()
        durations.append(max((time.perf_counter() - t0) * 1000.0, 1e-3))
    return TimingSample(tuple(durations)), result


def time_modality_cube(store: FactStore, dimensions: Dimensions, time_table: TimeTable,
                       query: PivotQuery) -> tuple[TimingSample, PivotResult]:
    """Refresh the cube from the committed store, then read the pivot.

    The rebuild dominates and scales with the store, not the query window;
    the read off the fresh snapshot adds microseconds.
    """
    def refresh_and_read() -> PivotResult:
        return query_pivot(build_cube(store, dimensions, time_table), query)

    sample, result = _timed(refresh_and_read)
    return sample, result


# --- modality II: recompute from raw files ------------------------------------

@dataclass(frozen=True)
class NaiveRun:
    phase1: TimingSample
    phase2: TimingSample
    result: PivotResult


def _read_rows(path: Path) -> list[list[str]]:
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.reader(f))[1:]


def _naive_daily_rows(dataset_dir: Path, date_from: date, date_to: date):
    """Recompute per-day EUR balances for the range from the raw CSVs.

    Deliberately index-free: full movement scan, per-account sort, pointer
    walks for movements and rate quotes."""
    account_currency = {r[0]: r[3] for r in _read_rows(dataset_dir / "accounts.csv")}
    openings = {r[0]: parse_amount(r[2]) for r in _read_rows(dataset_dir / "opening_balances.csv")}

    quotes: dict[str, list[tuple[date, int]]] = {}
    for code, day_text, rate_text in _read_rows(dataset_dir / "exchange_rates.csv"):
        quotes.setdefault(code, []).append((date.fromisoformat(day_text), parse_rate(rate_text)))
    for series in quotes.values():
        series.sort()

    movements: dict[str, list[tuple[date, int, str]]] = {a: [] for a in account_currency}
    with open(dataset_dir / "movements.csv", newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        next(reader)
        for account_id, day_text, amount_text, _currency, kind, _desc in reader:
            movements[account_id].append(
                (date.fromisoformat(day_text), parse_amount(amount_text), kind))

    rows = []   # (day, account_id, balance_eur_minor, working_eur_minor)
    n_days = (date_to - date_from).days + 1
    for account_id in sorted(account_currency):
        items = sorted(movements[account_id], key=lambda m: m[0])
        currency = account_currency[account_id]
        series = quotes.get(currency, [])
        real = openings.get(account_id, 0)
        forecast = 0
        idx = 0
        rate_idx = -1
        rate_micro = 10**6
        day = date_from
        # fold everything dated before the window into the running totals
        while idx < len(items) and items[idx][0] < date_from:
            _d, amount, kind = items[idx]
            if kind == "ACTUAL":
                real += amount
            else:
                forecast += amount
            idx += 1
        for _ in range(n_days):
            while idx < len(items) and items[idx][0] == day:
                _d, amount, kind = items[idx]
                if kind == "ACTUAL":
                    real += amount
                else:
                    forecast += amount
                idx += 1
            if currency != "EUR":
                while rate_idx + 1 < len(series) and series[rate_idx + 1][0] <= day:
                    rate_idx += 1
                if rate_idx < 0:
                    raise BenchError("NO_RATE", f"no {currency} quote on or before {day}")
                rate_micro = series[rate_idx][1]
            rows.append((day, account_id,
                         convert_minor(real, rate_micro),
                         convert_minor(real + forecast, rate_micro)))
            day += timedelta(days=1)
    return rows


def _month_end(day: date) -> bool:
    return (day + timedelta(days=1)).month != day.month


def _naive_aggregate(csv_text: str, query: PivotQuery) -> PivotResult:
    """Parse the exported rows back and fill the grid one column at a time,
    scanning the whole export per column the way sheet formulas do."""
    if (query.row_levels, query.col_levels, query.time_grain) != (("account",), ("month",), "month") \
            or query.filters or not query.measure.endswith("_eur"):
        raise BenchError("UNSUPPORTED_QUERY", "naive path only covers the bench query shapes")
    value_col = 2 if query.measure == "balance_eur" else 3

    parsed = []
    reader = csv.reader(io.StringIO(csv_text))
    next(reader)
    for day_text, account_id, balance_text, working_text in reader:
        parsed.append((date.fromisoformat(day_text), account_id,
                       int(balance_text), int(working_text)))

    accounts = sorted({p[1] for p in parsed})
    months = sorted({f"{p[0].year}-{p[0].month:02d}" for p in parsed})
    acc_index = {a: i for i, a in enumerate(accounts)}
    cells: list[list[Optional[int]]] = [[None] * len(months) for _ in accounts]

    if query.aggregator == SUM_CLOSING:
        for j, month in enumerate(months):
            closing: Optional[date] = None
            for p in parsed:
                if f"{p[0].year}-{p[0].month:02d}" == month and _month_end(p[0]):
                    if closing is None or p[0] > closing:
                        closing = p[0]
            if closing is None:
                continue
            for p in parsed:
                if p[0] == closing:
                    i = acc_index[p[1]]
                    cells[i][j] = (cells[i][j] or 0) + p[value_col]

        def merged(rows) -> Optional[int]:
            closing = None
            for p in rows:
                if _month_end(p[0]) and (closing is None or p[0] > closing):
                    closing = p[0]
            if closing is None:
                return None
            return sum(p[value_col] for p in rows if p[0] == closing)
    else:
        for j, month in enumerate(months):
            sums = [0] * len(accounts)
            hit = [False] * len(accounts)
            days = set()
            for p in parsed:
                if f"{p[0].year}-{p[0].month:02d}" == month:
                    i = acc_index[p[1]]
                    sums[i] += p[value_col]
                    hit[i] = True
                    days.add(p[0])
            for i in range(len(accounts)):
                if hit[i]:
                    cells[i][j] = div_round_half_even(sums[i], len(days))

        def merged(rows) -> Optional[int]:
            days = {p[0] for p in rows}
            if not days:
                return None
            return div_round_half_even(sum(p[value_col] for p in rows), len(days))

    by_account = {a: [p for p in parsed if p[1] == a] for a in accounts}
    by_month = {m: [p for p in parsed if f"{p[0].year}-{p[0].month:02d}" == m] for m in months}
    return PivotResult(
        measure=query.measure, aggregator=query.aggregator, time_grain=query.time_grain,
        currency_code="EUR",
        row_levels=query.row_levels, col_levels=query.col_levels,
        row_headers=tuple((a,) for a in accounts),
        col_headers=tuple((m,) for m in months),
        cells=tuple(tuple(row) for row in cells),
        row_totals=tuple(merged(by_account[a]) for a in accounts),
        col_totals=tuple(merged(by_month[m]) for m in months),
        grand_total=merged(parsed),
    )


def time_modality_naive(dataset_dir: str | Path, query: PivotQuery,
                        time_table_bounds: tuple[date, date]) -> NaiveRun:
    dataset_dir = Path(dataset_dir)
    first, last = time_table_bounds
    date_from = query.date_from if query.date_from is not None else first
    date_to = query.date_to if query.date_to is not None else last

    phase1, rows = _timed(lambda: _naive_daily_rows(dataset_dir, date_from, date_to))

    def export_and_aggregate() -> PivotResult:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["value_date", "account_id", "balance_eur", "working_eur"])
        for day, account_id, balance, working in rows:
            writer.writerow([day.isoformat(), account_id, balance, working])
        return _naive_aggregate(out.getvalue(), query)

    phase2, result = _timed(export_and_aggregate)
    return NaiveRun(phase1, phase2, result)


# --- full harness run ----------------------------------------------------------

ROW_CUBE = "Refresh"
ROW_PHASE1 = "Get daily balances from operational application"
ROW_PHASE2 = "Export data to CSV"
ROW_TOTAL = "Total"


@dataclass(frozen=True)
class ScopeReport:
    label: str
    cube: BenchRow
    phase1: BenchRow
    phase2: BenchRow
    total: BenchRow
    benefit: TimeBenefit
    ttest: TTestResult
    n_forecasts: int

    @property
    def rows(self) -> tuple[BenchRow, ...]:
        return (self.cube, self.phase1, self.phase2, self.total)


@dataclass(frozen=True)
class UseCaseReport:
    title: str
    scopes: tuple[ScopeReport, ...]


@dataclass(frozen=True)
class BenchReport:
    seed: int
    use_cases: tuple[UseCaseReport, ...]


def _scope_forecasts(dataset: GeneratedDataset, date_from: date, date_to: date) -> int:
    total = 0
    for key, count in dataset.forecasts_by_month.items():
        year, month = int(key[:4]), int(key[5:])
        if (date_from.year, date_from.month) <= (year, month) <= (date_to.year, date_to.month):
            total += count
    return total


def _run_scope(warehouse: tuple[FactStore, Dimensions, TimeTable],
               dataset: GeneratedDataset, label: str,
               query: PivotQuery, bounds: tuple[date, date]) -> ScopeReport:
    cube_sample, expected = time_modality_cube(*warehouse, query)
    naive = time_modality_naive(dataset.dataset_dir, query, bounds)
    if naive.result != expected:
        raise BenchError("RESULT_MISMATCH",
                         f"naive grid differs from cube grid for scope {label!r}")
    cube_row = summarize(cube_sample, ROW_CUBE)
    phase1 = summarize(naive.phase1, ROW_PHASE1)
    phase2 = summarize(naive.phase2, ROW_PHASE2)
    total = BenchRow(ROW_TOTAL, phase1.mean_s + phase2.mean_s, phase1.std_s + phase2.std_s)
    lo = query.date_from if query.date_from is not None else bounds[0]
    hi = query.date_to if query.date_to is not None else bounds[1]
    return ScopeReport(
        label=label, cube=cube_row, phase1=phase1, phase2=phase2, total=total,
        benefit=time_benefit(cube_row.mean_s, total.mean_s),
        ttest=pooled_t(cube_row.mean_s, cube_row.std_s, 3, total.mean_s, total.std_s, 3),
        n_forecasts=_scope_forecasts(dataset, lo, hi),
    )


def bench_scopes(params: GeneratorParams) -> dict[str, tuple[date, date]]:
    """Query windows, all ending on the last generated day."""
    last = date(params.last_year, 12, 31)
    return {
        "month": (date(params.last_year, 12, 1), last),
        "year": (date(params.last_year, 1, 1), last),
        "3y": (date(max(params.first_year, params.last_year - 2), 1, 1), last),
    }


def _pivot(measure: str, aggregator: str, window: tuple[date, date]) -> PivotQuery:
    return PivotQuery(
        measure=measure, aggregator=aggregator,
        row_levels=("account",), col_levels=("month",),
        date_from=window[0], date_to=window[1], time_grain="month",
    )


def run_bench(params: GeneratorParams, out_dir: str | Path,
              locale: str = DOT) -> BenchReport:
    """Generate, load, time both modalities, and write the report files."""
    from .etl import EtlConfig, run_etl
    from .star_schema import load_dimensions, load_fact_store
    from .time_dimension import load_time_table

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    dataset = generate_dataset(params, out_dir / "dataset")
    config = EtlConfig.for_dataset_dir(dataset.dataset_dir)
    run_etl(config, mode="full")
    dimensions = load_dimensions(config.companies, config.banks, config.accounts,
                                 config.currencies, config.countries)
    time_table = load_time_table(config.time_table)
    store = load_fact_store(config.store, dimensions.accounts_by_id)
    warehouse = (store, dimensions, time_table)
    bounds = (time_table.first_date, time_table.last_date)
    windows = bench_scopes(params)

    uc1 = UseCaseReport(
        title="Use case I: closing working balances per account and month",
        scopes=tuple(
            _run_scope(warehouse, dataset, label,
                       _pivot("working_eur", SUM_CLOSING, windows[key]), bounds)
            for label, key in (("Month", "month"), ("Year", "year"))
        ),
    )
    uc2 = UseCaseReport(
        title="Use case II: average balances per account and month",
        scopes=tuple(
            _run_scope(warehouse, dataset, label,
                       _pivot("balance_eur", AVERAGE, windows[key]), bounds)
            for label, key in (("Last year", "year"), ("Last 3 years", "3y"))
        ),
    )
    report = BenchReport(seed=params.seed, use_cases=(uc1, uc2))
    text, csv_text = render_report(report, locale)
    (out_dir / "bench_report.txt").write_text(text, encoding="utf-8")
    (out_dir / "bench_report.csv").write_text(csv_text, encoding="utf-8")
    return report


# --- report rendering -----------------------------------------------------------

def _fmt(value: float, locale: str) -> str:
    if math.isinf(value):
        text = "inf" if value > 0 else "-inf"
    else:
        text = f"{value:.3f}"
    return text.replace(".", ",") if locale == COMMA else text


def render_report(report: BenchReport, locale: str = DOT) -> tuple[str, str]:
    """Report text and CSV: per scope, the timing rows, the signed time
    benefits, and the hypothesis test, mirrored into both formats."""
    if locale not in LOCALES:
        raise BenchError("BAD_LOCALE", f"locale must be one of {LOCALES}")

    lines = [f"Benchmark report (seed {report.seed})"]
    csv_out = io.StringIO()
    writer = csv.writer(csv_out, lineterminator="\n")
    writer.writerow(["use_case", "scope", "section", "label", "value", "extra"])

    for case_no, case in enumerate(report.use_cases, start=1):
        lines += ["", f"== {case.title} =="]
        for scope in case.scopes:
            lines += ["", f"-- scope: {scope.label} --"]
            lines.append("1. Through OLAP cube")
            lines.append(f"  {scope.cube.label} *: avg {_fmt(scope.cube.mean_s, locale)}"
                         f"  std {_fmt(scope.cube.std_s, locale)}")
            lines.append("2. By the method previously used")
            for row in (scope.phase1, scope.phase2, scope.total):
                lines.append(f"  {row.label} *: avg {_fmt(row.mean_s, locale)}"
                             f"  std {_fmt(row.std_s, locale)}")
            lines.append("Time benefit differences")
            lines.append(f"  1 day: {_fmt(scope.benefit.per_day_min, locale)} minutes")
            lines.append(f"  1 month = 22 working days: "
                         f"{_fmt(scope.benefit.per_month_min, locale)} minutes")
            lines.append(f"  1 year = 22 working days * 12 months: "
                         f"{_fmt(scope.benefit.per_year_hours, locale)} hours")
            lines.append("Hypothesis testing")
            lines.append(f"  difference in means (t student): {_fmt(scope.ttest.t, locale)}")
            lines.append(f"  t-value (2-tailored 95%): {_fmt(scope.ttest.crit95, locale)}"
                         f"  significant: {'yes' if scope.ttest.significant95 else 'no'}")
            lines.append(f"  t-value (2-tailored 99%): {_fmt(scope.ttest.crit99, locale)}"
                         f"  significant: {'yes' if scope.ttest.significant99 else 'no'}")
            lines.append(f"  degrees of freedom: {scope.ttest.df}")
            lines.append(f"  Number of considered forecasts: {scope.n_forecasts}")

            for row in scope.rows:
                writer.writerow([case_no, scope.label, "timing", row.label,
                                 _fmt(row.mean_s, locale), _fmt(row.std_s, locale)])
            for label, value in (("1 day (minutes)", scope.benefit.per_day_min),
                                 ("1 month (minutes)", scope.benefit.per_month_min),
                                 ("1 year (hours)", scope.benefit.per_year_hours)):
                writer.writerow([case_no, scope.label, "benefit", label,
                                 _fmt(value, locale), ""])
            writer.writerow([case_no, scope.label, "hypothesis", "t",
                             _fmt(scope.ttest.t, locale), f"df={scope.ttest.df}"])
            writer.writerow([case_no, scope.label, "hypothesis", "significant95",
                             "yes" if scope.ttest.significant95 else "no",
                             _fmt(scope.ttest.crit95, locale)])
            writer.writerow([case_no, scope.label, "hypothesis", "significant99",
                             "yes" if scope.ttest.significant99 else "no",
                             _fmt(scope.ttest.crit99, locale)])
            writer.writerow([case_no, scope.label, "forecasts", "count",
                             scope.n_forecasts, ""])

    text = "\n".join(lines) + "\n"
    return text, csv_out.getvalue()
