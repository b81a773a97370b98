"""Shared fixture: a small seeded dataset — 3 accounts across 2 companies,
2 banks and 2 currencies, a 62-day time table crossing a year boundary,
and ~40 movements including forecasts and one duplicate row."""

from __future__ import annotations

import csv
import random
from datetime import date, timedelta
from pathlib import Path

import pytest

from balancecube.cube import build_cube
from balancecube.etl import EtlConfig, run_etl
from balancecube.money import format_minor
from balancecube.star_schema import load_dimensions, load_fact_store
from balancecube.time_dimension import load_time_table, save_time_table, time_table_for_range

FIXTURE_FIRST = date(2015, 11, 1)
FIXTURE_LAST = date(2016, 1, 1)   # 62 days, spans the 2015/2016 year end
FIXTURE_SEED = 20151101

ACCOUNTS = [
    # account_id, company_id, bank_id, currency_code, label
    ["A1", "C1", "B1", "EUR", "C1 ops EUR"],
    ["A2", "C2", "B1", "USD", "C2 ops USD"],
    ["A3", "C1", "B2", "EUR", "C1 savings"],
]


def write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)


def fixture_movements() -> list[list[str]]:
    """40 pseudo-random movements plus one exact duplicate, seed-stable."""
    rng = random.Random(FIXTURE_SEED)
    n_days = (FIXTURE_LAST - FIXTURE_FIRST).days + 1
    currency = {a[0]: a[3] for a in ACCOUNTS}
    rows = []
    for i in range(40):
        account = rng.choice(["A1", "A2", "A3"])
        day = FIXTURE_FIRST + timedelta(days=rng.randrange(n_days))
        amount_minor = rng.randrange(-500000, 500001)
        kind = "FORECAST" if rng.random() < 0.25 else "ACTUAL"
        rows.append([
            account, day.isoformat(), format_minor(amount_minor),
            currency[account], kind, f"mov {i}",
        ])
    rows.append(list(rows[7]))  # exact duplicate, must be rejected once
    return rows


def fixture_rates() -> list[list[str]]:
    """USD quotes roughly every 5 days, starting before the table."""
    rng = random.Random(FIXTURE_SEED + 1)
    rows = [["EUR", FIXTURE_FIRST.isoformat(), "1.000000"]]
    day = FIXTURE_FIRST - timedelta(days=2)
    while day <= FIXTURE_LAST:
        micro = 900000 + rng.randrange(-15000, 15001)   # around 0.90 EUR/USD
        rows.append(["USD", day.isoformat(), f"{micro / 10**6:.6f}"])
        day += timedelta(days=5)
    return rows


def build_fixture_files(root: Path) -> dict[str, Path]:
    root.mkdir(parents=True, exist_ok=True)
    paths = {
        name: root / f"{name}.csv"
        for name in ("companies", "banks", "accounts", "currencies", "countries",
                     "movements", "opening_balances", "exchange_rates", "time_table")
    }
    write_csv(paths["countries"], ["country_code", "name"],
              [["ES", "Spain"], ["PT", "Portugal"]])
    write_csv(paths["companies"], ["company_id", "name", "country_code"],
              [["C1", "Alfa Group", "PT"], ["C2", "Beta Trading", "ES"]])
    write_csv(paths["banks"], ["bank_id", "name", "country_code"],
              [["B1", "Banco Um", "PT"], ["B2", "Banco Dos", "ES"]])
    write_csv(paths["currencies"], ["currency_code", "name"],
              [["EUR", "Euro"], ["USD", "US Dollar"]])
    write_csv(paths["accounts"],
              ["account_id", "company_id", "bank_id", "currency_code", "label"],
              ACCOUNTS)
    write_csv(paths["opening_balances"], ["account_id", "as_of_date", "amount", "currency_code"],
              [["A1", FIXTURE_FIRST.isoformat(), "1000.00", "EUR"],
               ["A2", FIXTURE_FIRST.isoformat(), "500.00", "USD"]])
    write_csv(paths["movements"],
              ["account_id", "value_date", "amount", "currency_code", "kind", "description"],
              fixture_movements())
    write_csv(paths["exchange_rates"], ["currency_code", "rate_date", "rate_to_eur"],
              fixture_rates())
    save_time_table(time_table_for_range(FIXTURE_FIRST, FIXTURE_LAST), paths["time_table"])
    return paths


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory) -> Path:
    root = tmp_path_factory.mktemp("fixture")
    build_fixture_files(root)
    return root


@pytest.fixture(scope="session")
def fixture_env(fixture_dir):
    """Fixture dataset after one full ETL run, plus the loaded pieces."""
    config = EtlConfig.for_dataset_dir(fixture_dir)
    report = run_etl(config, mode="full")
    dimensions = load_dimensions(
        config.companies, config.banks, config.accounts, config.currencies, config.countries,
    )
    time_table = load_time_table(config.time_table)
    store = load_fact_store(config.store, dimensions.accounts_by_id)
    cube = build_cube(store, dimensions, time_table)
    return {
        "dir": fixture_dir,
        "config": config,
        "report": report,
        "dimensions": dimensions,
        "time_table": time_table,
        "store": store,
        "cube": cube,
    }
