"""Star-schema data model: dimension records, the balance fact store, and
referential-integrity validation.

Dimension identifiers are kept as the opaque strings found in the source
files. Country is a single dimension reached through both company and bank.
Everything is immutable after load; the ETL pipeline is the only writer.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Optional

from .money import MoneyMinor
from .time_dimension import TimeTable


@dataclass(frozen=True, slots=True)
class CompanyRecord:
    company_id: str
    name: str
    country_code: str


@dataclass(frozen=True, slots=True)
class BankRecord:
    bank_id: str
    name: str
    country_code: str


@dataclass(frozen=True, slots=True)
class AccountRecord:
    account_id: str
    company_id: str
    bank_id: str
    currency_code: str
    label: str


@dataclass(frozen=True, slots=True)
class CurrencyRecord:
    currency_code: str
    name: str
    minor_unit_scale: int = 2


@dataclass(frozen=True, slots=True)
class CountryRecord:
    country_code: str
    name: str


@dataclass(frozen=True, slots=True)
class FactAccountBalance:
    """Daily balance snapshot of one account; (value_date, account_id) is the key."""

    value_date: date
    account_id: str
    balance_orig: MoneyMinor
    balance_eur: MoneyMinor
    working_orig: MoneyMinor
    working_eur: MoneyMinor

    @property
    def key(self) -> tuple[date, str]:
        return (self.value_date, self.account_id)


@dataclass
class Dimensions:
    """All dimension rows as loaded, in file order (duplicates preserved
    so validation can report them; keyed views keep the first occurrence)."""

    companies: list[CompanyRecord] = field(default_factory=list)
    banks: list[BankRecord] = field(default_factory=list)
    accounts: list[AccountRecord] = field(default_factory=list)
    currencies: list[CurrencyRecord] = field(default_factory=list)
    countries: list[CountryRecord] = field(default_factory=list)

    @staticmethod
    def _by_id(rows: Iterable, key: str) -> dict:
        out: dict[str, object] = {}
        for row in rows:
            out.setdefault(getattr(row, key), row)
        return out

    @property
    def companies_by_id(self) -> Mapping[str, CompanyRecord]:
        return self._by_id(self.companies, "company_id")

    @property
    def banks_by_id(self) -> Mapping[str, BankRecord]:
        return self._by_id(self.banks, "bank_id")

    @property
    def accounts_by_id(self) -> Mapping[str, AccountRecord]:
        return self._by_id(self.accounts, "account_id")

    @property
    def currencies_by_code(self) -> Mapping[str, CurrencyRecord]:
        return self._by_id(self.currencies, "currency_code")

    @property
    def countries_by_code(self) -> Mapping[str, CountryRecord]:
        return self._by_id(self.countries, "country_code")


class FactStore:
    """Keyed collection of FactAccountBalance with a content digest.

    The digest hashes a canonical, key-sorted serialization, so it is
    stable under any insertion order of identical content.
    """

    def __init__(self, facts: Iterable[FactAccountBalance] = ()):
        self._facts: dict[tuple[date, str], FactAccountBalance] = {}
        for fact in facts:
            if fact.key in self._facts:
                raise ValueError(f"duplicate fact key {fact.key}")
            self._facts[fact.key] = fact

    def __len__(self) -> int:
        return len(self._facts)

    def __iter__(self) -> Iterator[FactAccountBalance]:
        return iter(self._facts.values())

    def __contains__(self, key: tuple[date, str]) -> bool:
        return key in self._facts

    def get(self, key: tuple[date, str]) -> Optional[FactAccountBalance]:
        return self._facts.get(key)

    def put(self, fact: FactAccountBalance) -> None:
        self._facts[fact.key] = fact

    def facts_sorted(self) -> list[FactAccountBalance]:
        return [self._facts[k] for k in sorted(self._facts)]

    def copy(self) -> "FactStore":
        clone = FactStore()
        clone._facts = dict(self._facts)
        return clone

    def digest(self) -> str:
        h = hashlib.sha256()
        for fact in self.facts_sorted():
            line = ",".join((
                fact.value_date.isoformat(),
                fact.account_id,
                str(fact.balance_orig.amount_minor),
                str(fact.balance_eur.amount_minor),
                str(fact.working_orig.amount_minor),
                str(fact.working_eur.amount_minor),
            ))
            h.update(line.encode("utf-8"))
            h.update(b"\n")
        return h.hexdigest()


@dataclass(frozen=True, slots=True)
class Violation:
    kind: str
    detail: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, kind: str, detail: str) -> None:
        self.violations.append(Violation(kind, detail))

    def kinds(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for v in self.violations:
            counts[v.kind] = counts.get(v.kind, 0) + 1
        return counts


DANGLING_FK = "DANGLING_FK"
DUPLICATE_KEY = "DUPLICATE_KEY"
MISSING_DATE = "MISSING_DATE"


def validate_star(
    dimensions: Dimensions,
    fact_store: Iterable[FactAccountBalance],
    time_table: Optional[TimeTable] = None,
) -> ValidationReport:
    """Report every referential-integrity problem in the loaded star.

    Nothing is raised: dangling foreign keys, duplicate primary keys and
    facts dated outside the time table are all collected. The star is
    valid iff the report is empty. Output order is canonical (sorted),
    so permuting input rows yields the same report. Accepts a FactStore
    or any iterable of fact rows (only the latter can carry duplicates).
    """
    report = ValidationReport()
    problems: list[tuple[str, str]] = []

    def check_dups(rows, key, label):
        seen: set[str] = set()
        for row in rows:
            k = getattr(row, key)
            if k in seen:
                problems.append((DUPLICATE_KEY, f"{label} {k!r} defined more than once"))
            seen.add(k)

    check_dups(dimensions.countries, "country_code", "country")
    check_dups(dimensions.currencies, "currency_code", "currency")
    check_dups(dimensions.companies, "company_id", "company")
    check_dups(dimensions.banks, "bank_id", "bank")
    check_dups(dimensions.accounts, "account_id", "account")

    countries = dimensions.countries_by_code
    currencies = dimensions.currencies_by_code
    companies = dimensions.companies_by_id
    banks = dimensions.banks_by_id
    accounts = dimensions.accounts_by_id

    for company in dimensions.companies:
        if company.country_code not in countries:
            problems.append((DANGLING_FK, f"company {company.company_id!r} -> country {company.country_code!r}"))
    for bank in dimensions.banks:
        if bank.country_code not in countries:
            problems.append((DANGLING_FK, f"bank {bank.bank_id!r} -> country {bank.country_code!r}"))
    for account in dimensions.accounts:
        if account.company_id not in companies:
            problems.append((DANGLING_FK, f"account {account.account_id!r} -> company {account.company_id!r}"))
        if account.bank_id not in banks:
            problems.append((DANGLING_FK, f"account {account.account_id!r} -> bank {account.bank_id!r}"))
        if account.currency_code not in currencies:
            problems.append((DANGLING_FK, f"account {account.account_id!r} -> currency {account.currency_code!r}"))

    seen_keys: set[tuple[date, str]] = set()
    for fact in fact_store:
        if fact.key in seen_keys:
            problems.append((DUPLICATE_KEY, f"fact key {fact.key} appears more than once"))
        seen_keys.add(fact.key)
        if fact.account_id not in accounts:
            problems.append((DANGLING_FK, f"fact {fact.key} -> account {fact.account_id!r}"))
        if time_table is not None and fact.value_date not in time_table:
            problems.append((MISSING_DATE, f"fact {fact.key} dated outside the time table"))

    for kind, detail in sorted(problems):
        report.add(kind, detail)
    return report


# --- dimension CSV loading ---------------------------------------------------

def _read_csv(path: Path, expected_header: list[str]) -> Iterator[list[str]]:
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != expected_header:
            raise ValueError(f"{path}: expected header {expected_header}, got {header}")
        for row in reader:
            if row:
                yield row


def load_dimensions(
    companies_path: str | Path,
    banks_path: str | Path,
    accounts_path: str | Path,
    currencies_path: str | Path,
    countries_path: str | Path,
) -> Dimensions:
    dims = Dimensions()
    for row in _read_csv(Path(companies_path), ["company_id", "name", "country_code"]):
        dims.companies.append(CompanyRecord(row[0], row[1], row[2]))
    for row in _read_csv(Path(banks_path), ["bank_id", "name", "country_code"]):
        dims.banks.append(BankRecord(row[0], row[1], row[2]))
    for row in _read_csv(Path(accounts_path), ["account_id", "company_id", "bank_id", "currency_code", "label"]):
        dims.accounts.append(AccountRecord(row[0], row[1], row[2], row[3], row[4]))
    for row in _read_csv(Path(currencies_path), ["currency_code", "name"]):
        dims.currencies.append(CurrencyRecord(row[0], row[1]))
    for row in _read_csv(Path(countries_path), ["country_code", "name"]):
        dims.countries.append(CountryRecord(row[0], row[1]))
    return dims


FACTS_HEADER = ["value_date", "account_id", "balance_orig", "balance_eur", "working_orig", "working_eur"]


def save_fact_store(store: FactStore, path: str | Path) -> str:
    """Write facts.csv (amounts as minor-unit integers) plus a digest sidecar.

    Both files are replaced atomically; returns the digest.
    """
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(FACTS_HEADER)
        for fact in store.facts_sorted():
            w.writerow([
                fact.value_date.isoformat(),
                fact.account_id,
                fact.balance_orig.amount_minor,
                fact.balance_eur.amount_minor,
                fact.working_orig.amount_minor,
                fact.working_eur.amount_minor,
            ])
    digest = store.digest()
    digest_path = _digest_path(path)
    digest_tmp = digest_path.with_suffix(digest_path.suffix + ".tmp")
    digest_tmp.write_text(digest + "\n", encoding="utf-8")
    tmp.replace(path)
    digest_tmp.replace(digest_path)
    return digest


def _digest_path(path: Path) -> Path:
    return path.with_name(path.name + ".sha256")


def load_fact_store(path: str | Path, accounts: Mapping[str, AccountRecord]) -> FactStore:
    """Load facts.csv; original-currency codes are resolved via the account
    dimension. Verifies the digest sidecar when present."""
    path = Path(path)
    store = FactStore()
    for row in _read_csv(path, FACTS_HEADER):
        account_id = row[1]
        account = accounts.get(account_id)
        if account is None:
            raise ValueError(f"{path}: fact references unknown account {account_id!r}")
        currency = account.currency_code
        key = (date.fromisoformat(row[0]), account_id)
        if key in store:
            raise ValueError(f"{path}: duplicate fact key {key}")
        store.put(FactAccountBalance(
            value_date=date.fromisoformat(row[0]),
            account_id=account_id,
            balance_orig=MoneyMinor(int(row[2]), currency),
            balance_eur=MoneyMinor(int(row[3]), "EUR"),
            working_orig=MoneyMinor(int(row[4]), currency),
            working_eur=MoneyMinor(int(row[5]), "EUR"),
        ))
    digest_path = _digest_path(path)
    if digest_path.exists():
        recorded = digest_path.read_text(encoding="utf-8").strip()
        actual = store.digest()
        if recorded != actual:
            raise ValueError(f"{path}: content digest mismatch (sidecar {recorded[:12]}.., actual {actual[:12]}..)")
    return store
