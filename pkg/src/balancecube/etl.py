"""Batch pipeline: extract movements, openings and exchange rates; clean;
compute sparse daily balances; densify over time x accounts with
carry-forward; convert to EUR; differentially upsert the fact store.

A run is the single exclusive writer. The store files are replaced
atomically at the end, so readers either see the previous snapshot or the
complete new one, never a partial load.
"""

from __future__ import annotations

import csv
from bisect import bisect_right
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .configfile import as_bool, as_int, parse_kv_file
from .money import MoneyMinor, RATE_ONE, convert_minor, format_rate, parse_amount, parse_rate
from .star_schema import (
    AccountRecord,
    Dimensions,
    FactAccountBalance,
    FactStore,
    load_dimensions,
    load_fact_store,
    save_fact_store,
    validate_star,
)
from .time_dimension import TimeTable, load_time_table

ACTUAL = "ACTUAL"
FORECAST = "FORECAST"

# row-level reject reasons
DUPLICATE = "DUPLICATE"
MISSING_FIELD = "MISSING_FIELD"
BAD_AMOUNT = "BAD_AMOUNT"
ZERO_AMOUNT = "ZERO_AMOUNT"
BAD_DATE = "BAD_DATE"
DATE_OUT_OF_RANGE = "DATE_OUT_OF_RANGE"
UNKNOWN_ACCOUNT = "UNKNOWN_ACCOUNT"
CURRENCY_MISMATCH = "CURRENCY_MISMATCH"
BAD_KIND = "BAD_KIND"


class EtlError(Exception):
    """Pipeline-level failure (file structure, rates, star validity)."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


@dataclass(frozen=True, slots=True)
class Movement:
    account_id: str
    value_date: date
    amount: MoneyMinor
    kind: str
    description: str


@dataclass(frozen=True, slots=True)
class OpeningBalance:
    account_id: str
    as_of_date: date
    amount: MoneyMinor


@dataclass(frozen=True, slots=True)
class ExchangeRate:
    currency_code: str
    rate_date: date
    rate_micro: int  # rate_to_eur with exactly 6 fractional digits

    @property
    def rate_to_eur(self) -> str:
        return format_rate(self.rate_micro)


@dataclass(frozen=True, slots=True)
class DailyBalance:
    account_id: str
    date: date
    real_minor: int
    working_minor: int
    currency_code: str


@dataclass(frozen=True, slots=True)
class RejectedRow:
    row: tuple[str, ...]
    reason: str


@dataclass(slots=True)
class UpsertStats:
    inserted: int = 0
    updated: int = 0
    unchanged: int = 0

    @property
    def total(self) -> int:
        return self.inserted + self.updated + self.unchanged


@dataclass
class EtlReport:
    rows_read: int = 0
    rows_rejected: dict[str, int] = field(default_factory=dict)
    balances_computed: int = 0
    facts_inserted: int = 0
    facts_updated: int = 0
    facts_unchanged: int = 0
    store_digest: str = ""

    @property
    def rejected_total(self) -> int:
        return sum(self.rows_rejected.values())

    @property
    def facts_total(self) -> int:
        return self.facts_inserted + self.facts_updated + self.facts_unchanged

    def summary(self) -> dict:
        return {
            "rows_read": self.rows_read,
            "rows_rejected": dict(sorted(self.rows_rejected.items())),
            "balances_computed": self.balances_computed,
            "facts_inserted": self.facts_inserted,
            "facts_updated": self.facts_updated,
            "facts_unchanged": self.facts_unchanged,
            "store_digest": self.store_digest,
        }


MOVEMENTS_HEADER = ["account_id", "value_date", "amount", "currency_code", "kind", "description"]
OPENINGS_HEADER = ["account_id", "as_of_date", "amount", "currency_code"]
RATES_HEADER = ["currency_code", "rate_date", "rate_to_eur"]


def read_movement_rows(path: str | Path) -> Iterator[tuple[str, ...]]:
    """Stream raw movement rows; header is validated, fields are not."""
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != MOVEMENTS_HEADER:
            raise EtlError("BAD_HEADER", f"{path}: expected {MOVEMENTS_HEADER}, got {header}")
        for row in reader:
            if row:
                yield tuple(row)


_MISSING = object()


def clean_movements(
    raw_rows: Iterable[Sequence[str]],
    dimensions: Dimensions,
    time_table: TimeTable,
    *,
    reject_zero_amount: bool = False,
) -> tuple[list[Movement], list[RejectedRow]]:
    """Collapse exact duplicates and reject malformed rows.

    Every input row is accounted for: accepted + rejected = rows read.
    Duplicates keep their first occurrence; later copies are rejected, so
    the outcome is stable for any fixed input order.
    """
    accounts = dimensions.accounts_by_id
    movements: list[Movement] = []
    rejected: list[RejectedRow] = []
    seen: set[tuple[str, ...]] = set()
    date_cache: dict[str, Optional[date]] = {}

    def reject(row: Sequence[str], reason: str) -> None:
        rejected.append(RejectedRow(tuple(row), reason))

    for row in raw_rows:
        key = tuple(row)
        if key in seen:
            reject(row, DUPLICATE)
            continue
        seen.add(key)
        if len(row) != 6:
            reject(row, MISSING_FIELD)
            continue
        account_id, date_text, amount_text, currency_code, kind, description = row
        if not account_id or not date_text or not amount_text:
            reject(row, MISSING_FIELD)
            continue
        try:
            amount_minor = parse_amount(amount_text)
        except ValueError:
            reject(row, BAD_AMOUNT)
            continue
        if reject_zero_amount and amount_minor == 0:
            reject(row, ZERO_AMOUNT)
            continue
        value_date = date_cache.get(date_text, _MISSING)
        if value_date is _MISSING:
            try:
                value_date = date.fromisoformat(date_text)
            except ValueError:
                value_date = None
            date_cache[date_text] = value_date
        if value_date is None:
            reject(row, BAD_DATE)
            continue
        if value_date not in time_table:
            reject(row, DATE_OUT_OF_RANGE)
            continue
        account = accounts.get(account_id)
        if account is None:
            reject(row, UNKNOWN_ACCOUNT)
            continue
        if currency_code != account.currency_code:
            reject(row, CURRENCY_MISMATCH)
            continue
        if kind != ACTUAL and kind != FORECAST:
            reject(row, BAD_KIND)
            continue
        movements.append(Movement(
            account_id=account_id,
            value_date=value_date,
            amount=MoneyMinor(amount_minor, currency_code),
            kind=kind,
            description=description,
        ))
    return movements, rejected


def load_openings(path: str | Path, dimensions: Dimensions) -> dict[str, OpeningBalance]:
    """Opening balances are reference data: any problem is a hard error."""
    accounts = dimensions.accounts_by_id
    openings: dict[str, OpeningBalance] = {}
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != OPENINGS_HEADER:
            raise EtlError("BAD_HEADER", f"{path}: expected {OPENINGS_HEADER}, got {header}")
        for row in reader:
            if not row:
                continue
            if len(row) != 4:
                raise EtlError("BAD_OPENING", f"{path}: malformed row {row!r}")
            account_id, as_of_text, amount_text, currency_code = row
            account = accounts.get(account_id)
            if account is None:
                raise EtlError("BAD_OPENING", f"{path}: unknown account {account_id!r}")
            if currency_code != account.currency_code:
                raise EtlError("BAD_OPENING", f"{path}: currency {currency_code!r} does not match account {account_id!r}")
            if account_id in openings:
                raise EtlError("DUPLICATE_OPENING", f"{path}: more than one opening for account {account_id!r}")
            try:
                amount_minor = parse_amount(amount_text)
                as_of = date.fromisoformat(as_of_text)
            except ValueError as exc:
                raise EtlError("BAD_OPENING", f"{path}: {exc}") from None
            openings[account_id] = OpeningBalance(account_id, as_of, MoneyMinor(amount_minor, currency_code))
    return openings


class RateTable:
    """Exchange rates with latest-on-or-before lookup; EUR is implicitly 1."""

    def __init__(self, rates: Iterable[ExchangeRate] = ()):
        by_currency: dict[str, list[tuple[date, int]]] = {}
        seen: set[tuple[str, date]] = set()
        for rate in rates:
            if (rate.currency_code, rate.rate_date) in seen:
                raise EtlError("DUPLICATE_RATE", f"{rate.currency_code} on {rate.rate_date.isoformat()}")
            seen.add((rate.currency_code, rate.rate_date))
            if rate.rate_micro <= 0:
                raise EtlError("BAD_RATE", f"non-positive rate for {rate.currency_code}")
            if rate.currency_code == "EUR" and rate.rate_micro != RATE_ONE:
                raise EtlError("BAD_RATE", "EUR rate must be exactly 1.000000")
            by_currency.setdefault(rate.currency_code, []).append((rate.rate_date, rate.rate_micro))
        self._dates: dict[str, list[date]] = {}
        self._micros: dict[str, list[int]] = {}
        for currency, pairs in by_currency.items():
            pairs.sort()
            self._dates[currency] = [d for d, _ in pairs]
            self._micros[currency] = [m for _, m in pairs]

    def rate_micro_on_or_before(self, currency_code: str, day: date) -> int:
        if currency_code == "EUR":
            return RATE_ONE
        dates = self._dates.get(currency_code)
        if dates:
            idx = bisect_right(dates, day)
            if idx > 0:
                return self._micros[currency_code][idx - 1]
        raise EtlError("NO_RATE", f"no exchange rate for {currency_code} on or before {day.isoformat()}")


def load_rates(path: str | Path) -> RateTable:
    rates = []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != RATES_HEADER:
            raise EtlError("BAD_HEADER", f"{path}: expected {RATES_HEADER}, got {header}")
        for row in reader:
            if not row:
                continue
            if len(row) != 3:
                raise EtlError("BAD_RATE", f"{path}: malformed row {row!r}")
            try:
                rates.append(ExchangeRate(row[0], date.fromisoformat(row[1]), parse_rate(row[2])))
            except ValueError as exc:
                raise EtlError("BAD_RATE", f"{path}: {exc}") from None
    return RateTable(rates)


def compute_daily_balances(
    movements: Iterable[Movement],
    openings: Iterable[OpeningBalance] | Mapping[str, OpeningBalance],
) -> list[DailyBalance]:
    """Cumulative balances per account on each day that has a movement.

    real(d) = opening + sum of ACTUAL amounts dated <= d;
    working(d) = real(d) + sum of FORECAST amounts dated <= d.
    """
    if isinstance(openings, Mapping):
        opening_map = dict(openings)
    else:
        opening_map = {}
        for opening in openings:
            if opening.account_id in opening_map:
                raise EtlError("DUPLICATE_OPENING", f"account {opening.account_id!r}")
            opening_map[opening.account_id] = opening

    by_account: dict[str, list[Movement]] = {}
    for movement in movements:
        by_account.setdefault(movement.account_id, []).append(movement)

    balances: list[DailyBalance] = []
    for account_id, items in by_account.items():
        items.sort(key=lambda m: m.value_date)
        opening = opening_map.get(account_id)
        if opening is not None and opening.as_of_date > items[0].value_date:
            raise EtlError(
                "BAD_OPENING",
                f"opening for {account_id!r} dated {opening.as_of_date.isoformat()} "
                f"after first movement {items[0].value_date.isoformat()}",
            )
        currency = items[0].amount.currency_code
        real = opening.amount.amount_minor if opening is not None else 0
        forecast_cum = 0
        current_day: Optional[date] = None
        for movement in items:
            if movement.value_date != current_day:
                if current_day is not None:
                    balances.append(DailyBalance(account_id, current_day, real, real + forecast_cum, currency))
                current_day = movement.value_date
            if movement.kind == ACTUAL:
                real += movement.amount.amount_minor
            else:
                forecast_cum += movement.amount.amount_minor
        if current_day is not None:
            balances.append(DailyBalance(account_id, current_day, real, real + forecast_cum, currency))
    return balances


def densify_balances(
    sparse: Iterable[DailyBalance],
    time_table: TimeTable,
    accounts: Iterable[AccountRecord],
    openings: Mapping[str, OpeningBalance] | None = None,
) -> list[DailyBalance]:
    """One record per (account, table day): carry forward the most recent
    balances over movement-free days; before an account's first movement
    the balance is its opening once as_of_date is reached, else zero."""
    openings = openings or {}
    by_account: dict[str, list[DailyBalance]] = {}
    for bal in sparse:
        if bal.date not in time_table:
            raise EtlError("DATE_OUT_OF_RANGE", f"sparse balance {bal.account_id!r}/{bal.date.isoformat()} outside time table")
        by_account.setdefault(bal.account_id, []).append(bal)

    days = [rec.date for rec in time_table]
    dense: list[DailyBalance] = []
    for account in sorted(accounts, key=lambda a: a.account_id):
        account_id = account.account_id
        currency = account.currency_code
        items = sorted(by_account.get(account_id, []), key=lambda b: b.date)
        opening = openings.get(account_id)
        opening_minor = opening.amount.amount_minor if opening is not None else 0
        opening_from = opening.as_of_date if opening is not None else None
        idx = 0
        real = working = 0
        started = False
        for day in days:
            if idx < len(items) and items[idx].date == day:
                real = items[idx].real_minor
                working = items[idx].working_minor
                started = True
                idx += 1
            elif not started:
                value = opening_minor if (opening_from is not None and day >= opening_from) else 0
                real = working = value
            dense.append(DailyBalance(account_id, day, real, working, currency))
    return dense


def convert_to_eur(
    dense: Iterable[DailyBalance],
    rates: RateTable,
    accounts: Mapping[str, AccountRecord],
) -> list[FactAccountBalance]:
    """Fact rows with EUR values under the latest-on-or-before rate rule.

    Both balances of a row use the same day's rate; rounding is half-even
    at minor units, applied exactly once per value.
    """
    facts: list[FactAccountBalance] = []
    for bal in dense:
        if bal.account_id not in accounts:
            raise EtlError("UNKNOWN_ACCOUNT", f"dense balance for unknown account {bal.account_id!r}")
        rate_micro = rates.rate_micro_on_or_before(bal.currency_code, bal.date)
        facts.append(FactAccountBalance(
            value_date=bal.date,
            account_id=bal.account_id,
            balance_orig=MoneyMinor(bal.real_minor, bal.currency_code),
            balance_eur=MoneyMinor(convert_minor(bal.real_minor, rate_micro), "EUR"),
            working_orig=MoneyMinor(bal.working_minor, bal.currency_code),
            working_eur=MoneyMinor(convert_minor(bal.working_minor, rate_micro), "EUR"),
        ))
    return facts


def upsert_facts(store: FactStore, incoming: Iterable[FactAccountBalance]) -> UpsertStats:
    """Differential load: new keys insert; existing keys are overwritten
    only when either EUR value differs, otherwise left untouched."""
    stats = UpsertStats()
    for fact in incoming:
        existing = store.get(fact.key)
        if existing is None:
            store.put(fact)
            stats.inserted += 1
        elif (existing.balance_eur.amount_minor != fact.balance_eur.amount_minor
              or existing.working_eur.amount_minor != fact.working_eur.amount_minor):
            store.put(fact)
            stats.updated += 1
        else:
            stats.unchanged += 1
    return stats


@dataclass
class EtlConfig:
    companies: Path
    banks: Path
    accounts: Path
    currencies: Path
    countries: Path
    movements: Path
    opening_balances: Path
    exchange_rates: Path
    time_table: Path
    store: Path
    revaluation_window_days: int = 5
    reject_zero_amount: bool = False

    _PATH_KEYS = (
        "companies", "banks", "accounts", "currencies", "countries",
        "movements", "opening_balances", "exchange_rates", "time_table", "store",
    )

    @classmethod
    def from_file(cls, path: str | Path) -> "EtlConfig":
        path = Path(path)
        raw = parse_kv_file(path)
        base = path.parent
        kwargs = {}
        for key in cls._PATH_KEYS:
            if key not in raw:
                raise ValueError(f"{path}: missing required key {key!r}")
            kwargs[key] = (base / raw.pop(key)).resolve()
        if "revaluation_window_days" in raw:
            kwargs["revaluation_window_days"] = as_int(raw.pop("revaluation_window_days"), "revaluation_window_days")
        if "reject_zero_amount" in raw:
            kwargs["reject_zero_amount"] = as_bool(raw.pop("reject_zero_amount"), "reject_zero_amount")
        if raw:
            raise ValueError(f"{path}: unknown keys {sorted(raw)}")
        return cls(**kwargs)

    @classmethod
    def for_dataset_dir(cls, dataset_dir: str | Path, store: str | Path | None = None, **options) -> "EtlConfig":
        d = Path(dataset_dir)
        return cls(
            companies=d / "companies.csv",
            banks=d / "banks.csv",
            accounts=d / "accounts.csv",
            currencies=d / "currencies.csv",
            countries=d / "countries.csv",
            movements=d / "movements.csv",
            opening_balances=d / "opening_balances.csv",
            exchange_rates=d / "exchange_rates.csv",
            time_table=d / "time_table.csv",
            store=Path(store) if store is not None else d / "facts.csv",
            **options,
        )


def run_etl(config: EtlConfig, mode: str = "full") -> EtlReport:
    """Execute the whole pipeline and atomically publish the new store.

    ``full`` reconverts every fact; ``incremental`` leaves stored facts
    older than revaluation_window_days (from the table end) untouched,
    bounding how far back a late exchange-rate revision reaches.
    """
    if mode not in ("full", "incremental"):
        raise ValueError(f"unknown ETL mode {mode!r}")

    time_table = load_time_table(config.time_table)
    dimensions = load_dimensions(
        config.companies, config.banks, config.accounts, config.currencies, config.countries,
    )
    accounts_by_id = dimensions.accounts_by_id

    store = FactStore()
    if Path(config.store).exists():
        store = load_fact_store(config.store, accounts_by_id)

    star_report = validate_star(dimensions, store, time_table)
    if not star_report.ok:
        head = "; ".join(f"{v.kind}: {v.detail}" for v in star_report.violations[:5])
        raise EtlError("STAR_INVALID", f"{len(star_report.violations)} violation(s): {head}")

    report = EtlReport()
    rows_read = 0

    def counted(rows: Iterator[tuple[str, ...]]) -> Iterator[tuple[str, ...]]:
        nonlocal rows_read
        for row in rows:
            rows_read += 1
            yield row

    movements, rejected = clean_movements(
        counted(read_movement_rows(config.movements)),
        dimensions,
        time_table,
        reject_zero_amount=config.reject_zero_amount,
    )
    report.rows_read = rows_read
    for rej in rejected:
        report.rows_rejected[rej.reason] = report.rows_rejected.get(rej.reason, 0) + 1

    openings = load_openings(config.opening_balances, dimensions)
    rates = load_rates(config.exchange_rates)

    sparse = compute_daily_balances(movements, openings)
    report.balances_computed = len(sparse)
    dense = densify_balances(sparse, time_table, dimensions.accounts, openings)
    incoming = convert_to_eur(dense, rates, accounts_by_id)

    if mode == "incremental" and len(store):
        # Rate revisions only reach back revaluation_window_days; balance
        # changes (late-arriving movements) always propagate.
        cutoff = time_table.last_date - timedelta(days=config.revaluation_window_days)
        bounded = []
        for fact in incoming:
            old = store.get(fact.key)
            if (old is not None and fact.value_date < cutoff
                    and old.balance_orig.amount_minor == fact.balance_orig.amount_minor
                    and old.working_orig.amount_minor == fact.working_orig.amount_minor):
                bounded.append(old)
            else:
                bounded.append(fact)
        incoming = bounded

    new_store = store.copy()
    stats = upsert_facts(new_store, incoming)
    report.facts_inserted = stats.inserted
    report.facts_updated = stats.updated
    report.facts_unchanged = stats.unchanged
    report.store_digest = save_fact_store(new_store, config.store)
    return report
