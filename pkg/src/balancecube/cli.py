"""Command-line entry points: timegen, etl, query, bench, serve."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from datetime import date
from pathlib import Path
from typing import Optional, Sequence

from .bench import COMMA, DOT, BenchError, GeneratorParams, run_bench
from .cube import (
    DEFAULT_SCHEMA,
    CubeError,
    PivotQuery,
    build_cube,
    query_pivot,
)
from .etl import EtlConfig, EtlError, run_etl
from .render import result_to_csv, result_to_table
from .service import ServiceConfig, ServiceError, run_service
from .star_schema import load_dimensions, load_fact_store
from .time_dimension import (
    TimeRangeError,
    build_time_table,
    extend_time_table,
    load_time_table,
    save_time_table,
)


class UsageError(Exception):
    """Bad command-line input; prints the message plus a usage hint."""

    def __init__(self, message: str, hint: str = ""):
        super().__init__(message)
        self.hint = hint


def _parse_date(text: str, flag: str) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise UsageError(f"{flag}: expected an ISO date (YYYY-MM-DD), got {text!r}") from None


def _parse_levels(text: Optional[str]) -> tuple[str, ...]:
    if not text:
        return ()
    return tuple(part.strip() for part in text.split(",") if part.strip())


def _parse_filters(items: Optional[Sequence[str]]) -> tuple[tuple[str, tuple[str, ...]], ...]:
    filters = []
    for item in items or ():
        level, eq, members = item.partition("=")
        member_list = tuple(m.strip() for m in members.split(",") if m.strip())
        if not eq or not level.strip() or not member_list:
            raise UsageError(
                f"--filter: expected level=member[,member...], got {item!r}")
        filters.append((level.strip(), member_list))
    return tuple(filters)


def _level_hint() -> str:
    return "valid levels: " + ", ".join(DEFAULT_SCHEMA.levels)


def cmd_timegen(args: argparse.Namespace) -> int:
    out = Path(args.out)
    if args.extend:
        if not out.exists():
            raise UsageError(f"--extend needs an existing table at {out}")
        table = extend_time_table(load_time_table(out), args.last)
    else:
        if args.first is None:
            raise UsageError("--first is required unless --extend is given")
        table = build_time_table(args.first, args.last)
    save_time_table(table, out)
    print(f"wrote {len(table)} rows to {out}")
    return 0


def cmd_etl(args: argparse.Namespace) -> int:
    config = EtlConfig.from_file(args.config)
    report = run_etl(config, mode=args.mode)
    for key, value in report.summary().items():
        print(f"{key}: {value}")
    return 0


def cmd_query(args: argparse.Namespace) -> int:
    config = EtlConfig.from_file(args.config)
    dimensions = load_dimensions(config.companies, config.banks, config.accounts,
                                 config.currencies, config.countries)
    time_table = load_time_table(config.time_table)
    store = load_fact_store(config.store, dimensions.accounts_by_id)
    cube = build_cube(store, dimensions, time_table)

    query = PivotQuery(
        measure=args.measure,
        aggregator=args.aggregator,
        row_levels=_parse_levels(args.rows),
        col_levels=_parse_levels(args.cols),
        filters=_parse_filters(args.filter),
        date_from=_parse_date(args.date_from, "--from") if args.date_from else None,
        date_to=_parse_date(args.date_to, "--to") if args.date_to else None,
        time_grain=args.grain,
    )
    result = query_pivot(cube, query)
    if args.format == "csv":
        sys.stdout.write(result_to_csv(result))
    else:
        sys.stdout.write(result_to_table(result))
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    params = GeneratorParams.from_file(args.params) if args.params else GeneratorParams()
    if args.seed is not None:
        params = replace(params, seed=args.seed)
    locale = {"dot": DOT, "comma": COMMA}[args.locale]
    report = run_bench(params, args.out_dir, locale=locale)
    print(f"benchmark complete (seed {report.seed}); report in {args.out_dir}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:   # pragma: no cover - blocks on uvicorn
    config = ServiceConfig.from_file(args.config)
    if args.host:
        config = replace(config, host=args.host)
    if args.port is not None:
        config = replace(config, port=args.port)
    run_service(config)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="balancecube",
                                     description="Daily account-balance warehouse and pivot engine.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("timegen", help="build or extend the time dimension table")
    p.add_argument("--first", type=int, help="first calendar year")
    p.add_argument("--last", type=int, required=True, help="last calendar year")
    p.add_argument("--out", default="time_table.csv", help="output CSV path")
    p.add_argument("--extend", action="store_true",
                   help="extend the existing table at --out through --last")
    p.set_defaults(handler=cmd_timegen)

    p = sub.add_parser("etl", help="run the load pipeline")
    p.add_argument("--config", required=True, help="key = value pipeline config file")
    p.add_argument("--mode", choices=("full", "incremental"), default="full")
    p.set_defaults(handler=cmd_etl)

    p = sub.add_parser("query", help="run one pivot query against the stored facts")
    p.add_argument("--config", required=True, help="key = value pipeline config file")
    p.add_argument("--measure", required=True)
    p.add_argument("--aggregator", required=True)
    p.add_argument("--rows", help="comma-separated row levels")
    p.add_argument("--cols", help="comma-separated column levels")
    p.add_argument("--filter", action="append", metavar="LEVEL=M1[,M2...]",
                   help="restrict a level to the listed members (repeatable)")
    p.add_argument("--from", dest="date_from", help="first day (ISO)")
    p.add_argument("--to", dest="date_to", help="last day (ISO)")
    p.add_argument("--grain", default="day")
    p.add_argument("--format", choices=("table", "csv"), default="table")
    p.set_defaults(handler=cmd_query)

    p = sub.add_parser("bench", help="generate data and run the timing comparison")
    p.add_argument("--params", help="key = value generator parameter file")
    p.add_argument("--seed", type=int, help="override the generator seed")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--locale", choices=("dot", "comma"), default="dot")
    p.set_defaults(handler=cmd_bench)

    p = sub.add_parser("serve", help="start the HTTP query service")
    p.add_argument("--config", required=True, help="service config file")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.set_defaults(handler=cmd_serve)

    return parser


def dispatch(argv: Sequence[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else 1
    try:
        return args.handler(args)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        if err.hint:
            print(f"hint: {err.hint}", file=sys.stderr)
        return 2
    except CubeError as err:
        print(f"error: {err}", file=sys.stderr)
        code = getattr(err, "code", "")
        if code in ("UNKNOWN_LEVEL", "UNKNOWN_GRAIN", "UNKNOWN_MEASURE",
                    "UNKNOWN_AGGREGATOR", "DUPLICATE_LEVEL", "MULTIPLE_TIME_LEVELS",
                    "TIME_GRAIN_MISMATCH"):
            print(f"hint: {_level_hint()}; run 'balancecube query --help' for flags",
                  file=sys.stderr)
        return 2
    except (EtlError, BenchError, ServiceError, TimeRangeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


def main() -> None:   # pragma: no cover - thin shim around dispatch
    raise SystemExit(dispatch(sys.argv[1:]))
