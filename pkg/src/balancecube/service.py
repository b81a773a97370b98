"""HTTP/JSON query service over an immutable cube snapshot.

Requests are answered from whatever snapshot is current when they arrive;
a refresh rebuilds in the background of that snapshot and swaps it in
atomically, so clients observe a monotone sequence of snapshot ids.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Any, Mapping, Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .configfile import as_int, parse_kv_file
from .cube import (
    AGGREGATORS,
    MEASURES,
    TIME_GRAINS,
    CubeError,
    CubeQueryError,
    CubeSnapshot,
    PivotQuery,
    PivotResult,
    build_cube,
    query_pivot,
)
from .etl import EtlConfig, EtlError
from .etl import run_etl as _run_etl
from .star_schema import load_dimensions, load_fact_store
from .time_dimension import load_time_table

# module-level alias so tests can substitute a slowed pipeline
run_etl = _run_etl


class ServiceError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


@dataclass(frozen=True)
class ServiceConfig:
    etl: EtlConfig
    read_token: str
    admin_token: str
    host: str = "127.0.0.1"
    port: int = 8000

    def __post_init__(self):
        if not self.read_token or not self.admin_token:
            raise ServiceError("BAD_CONFIG", "both tokens must be non-empty")
        if self.read_token == self.admin_token:
            raise ServiceError("BAD_CONFIG", "read and admin tokens must differ")

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        path = Path(path)
        raw = parse_kv_file(path)
        try:
            etl_path = raw.pop("etl_config")
            read_token = raw.pop("read_token")
            admin_token = raw.pop("admin_token")
        except KeyError as missing:
            raise ServiceError("BAD_CONFIG", f"missing key {missing.args[0]!r}") from None
        kwargs: dict[str, Any] = {}
        if "host" in raw:
            kwargs["host"] = raw.pop("host")
        if "port" in raw:
            kwargs["port"] = as_int(raw.pop("port"), "port")
        if raw:
            raise ServiceError("BAD_CONFIG", f"unknown keys: {sorted(raw)}")
        etl = EtlConfig.from_file((path.parent / etl_path).resolve())
        return cls(etl=etl, read_token=read_token, admin_token=admin_token, **kwargs)


@dataclass(frozen=True)
class Snapshot:
    id: int
    cube: CubeSnapshot


class _RequestError(Exception):
    """Malformed request body; maps to a 400 with the offending field."""

    def __init__(self, field: str, message: str):
        super().__init__(message)
        self.field = field
        self.message = message


def _want_str_list(body: Mapping, key: str, default: tuple = ()) -> tuple[str, ...]:
    value = body.get(key, list(default))
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise _RequestError(key, f"{key} must be a list of strings")
    return tuple(value)


def _want_date(body: Mapping, key: str) -> Optional[date]:
    value = body.get(key)
    if value is None:
        return None
    if not isinstance(value, str):
        raise _RequestError(key, f"{key} must be an ISO date string or null")
    try:
        return date.fromisoformat(value)
    except ValueError:
        raise _RequestError(key, f"{key} is not a valid ISO date: {value!r}") from None


def parse_pivot_request(body: Any) -> PivotQuery:
    """JSON body -> PivotQuery, rejecting shape problems field by field."""
    if not isinstance(body, Mapping):
        raise _RequestError("body", "request body must be a JSON object")
    for key in ("measure", "aggregator"):
        if not isinstance(body.get(key), str):
            raise _RequestError(key, f"{key} must be a string")
    grain = body.get("time_grain", "day")
    if not isinstance(grain, str):
        raise _RequestError("time_grain", "time_grain must be a string")

    raw_filters = body.get("filters", [])
    filters: list[tuple[str, tuple[str, ...]]] = []
    if isinstance(raw_filters, Mapping):
        raw_filters = [{"level": k, "members": v} for k, v in raw_filters.items()]
    if not isinstance(raw_filters, list):
        raise _RequestError("filters", "filters must be a list or an object")
    for item in raw_filters:
        if (not isinstance(item, Mapping) or not isinstance(item.get("level"), str)
                or not isinstance(item.get("members"), list)
                or not all(isinstance(m, str) for m in item["members"])):
            raise _RequestError("filters", "each filter needs a level and a member list")
        filters.append((item["level"], tuple(item["members"])))

    known = {"measure", "aggregator", "row_levels", "col_levels", "filters",
             "date_from", "date_to", "time_grain"}
    extra = set(body) - known
    if extra:
        raise _RequestError(sorted(extra)[0], f"unknown field {sorted(extra)[0]!r}")

    return PivotQuery(
        measure=body["measure"],
        aggregator=body["aggregator"],
        row_levels=_want_str_list(body, "row_levels"),
        col_levels=_want_str_list(body, "col_levels"),
        filters=tuple(filters),
        date_from=_want_date(body, "date_from"),
        date_to=_want_date(body, "date_to"),
        time_grain=grain,
    )


def query_payload(query: PivotQuery) -> dict:
    return {
        "measure": query.measure,
        "aggregator": query.aggregator,
        "row_levels": list(query.row_levels),
        "col_levels": list(query.col_levels),
        "filters": [{"level": lv, "members": list(ms)} for lv, ms in query.filters],
        "date_from": query.date_from.isoformat() if query.date_from else None,
        "date_to": query.date_to.isoformat() if query.date_to else None,
        "time_grain": query.time_grain,
    }


def result_payload(result: PivotResult) -> dict:
    return {
        "measure": result.measure,
        "aggregator": result.aggregator,
        "time_grain": result.time_grain,
        "currency_code": result.currency_code,
        "row_levels": list(result.row_levels),
        "col_levels": list(result.col_levels),
        "row_headers": [list(h) for h in result.row_headers],
        "col_headers": [list(h) for h in result.col_headers],
        "cells": [list(row) for row in result.cells],
        "row_totals": list(result.row_totals),
        "col_totals": list(result.col_totals),
        "grand_total": result.grand_total,
    }


def result_from_payload(payload: Mapping) -> PivotResult:
    """Inverse of result_payload; lets clients re-render service grids."""
    return PivotResult(
        measure=payload["measure"],
        aggregator=payload["aggregator"],
        time_grain=payload["time_grain"],
        currency_code=payload["currency_code"],
        row_levels=tuple(payload["row_levels"]),
        col_levels=tuple(payload["col_levels"]),
        row_headers=tuple(tuple(h) for h in payload["row_headers"]),
        col_headers=tuple(tuple(h) for h in payload["col_headers"]),
        cells=tuple(tuple(row) for row in payload["cells"]),
        row_totals=tuple(payload["row_totals"]),
        col_totals=tuple(payload["col_totals"]),
        grand_total=payload["grand_total"],
    )


def load_snapshot(config: EtlConfig, snapshot_id: int) -> Snapshot:
    dimensions = load_dimensions(config.companies, config.banks, config.accounts,
                                 config.currencies, config.countries)
    time_table = load_time_table(config.time_table)
    store = load_fact_store(config.store, dimensions.accounts_by_id)
    return Snapshot(id=snapshot_id, cube=build_cube(store, dimensions, time_table))


def _error(status: int, code: str, message: str, **extra) -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"error": code, "message": message, **extra})


def create_app(config: ServiceConfig) -> FastAPI:
    app = FastAPI(title="balancecube", docs_url=None, redoc_url=None)
    state = {"snapshot": load_snapshot(config.etl, 1)}
    refresh_lock = threading.Lock()

    def bearer(request: Request) -> Optional[str]:
        header = request.headers.get("authorization", "")
        scheme, _, token = header.partition(" ")
        if scheme.lower() != "bearer" or not token:
            return None
        return token

    def authorized(request: Request, *, admin: bool) -> Optional[JSONResponse]:
        token = bearer(request)
        allowed = (config.admin_token,) if admin else (config.read_token, config.admin_token)
        if token not in allowed:
            return _error(401, "UNAUTHORIZED", "missing or invalid token")
        return None

    @app.get("/api/health")
    def health() -> dict:
        snapshot: Snapshot = state["snapshot"]
        return {"status": "ok", "snapshot_id": snapshot.id,
                "store_digest": snapshot.cube.digest}

    @app.get("/api/metadata")
    def metadata(request: Request):
        denied = authorized(request, admin=False)
        if denied is not None:
            return denied
        snapshot: Snapshot = state["snapshot"]
        cube = snapshot.cube
        schema = cube.schema
        levels = {}
        for level in schema.levels:
            levels[level] = {
                "dimension": "time" if schema.is_time_level(level) else "account",
                "members": list(cube.members(level)),
            }
        return {
            "snapshot_id": snapshot.id,
            "store_digest": cube.digest,
            "measures": list(MEASURES),
            "aggregators": list(AGGREGATORS),
            "time_grains": list(TIME_GRAINS),
            "hierarchies": {
                "account": [{"name": name, "levels": list(lvls)}
                            for name, lvls in schema.account_hierarchies],
                "time": [{"name": name, "levels": list(lvls)}
                         for name, lvls in schema.time_hierarchies],
            },
            "levels": levels,
            "date_range": {
                "first": cube.time_table.first_date.isoformat(),
                "last": cube.time_table.last_date.isoformat(),
            },
        }

    @app.post("/api/pivot")
    async def pivot(request: Request):
        denied = authorized(request, admin=False)
        if denied is not None:
            return denied
        try:
            body = await request.json()
        except Exception:
            return _error(400, "BAD_REQUEST", "body is not valid JSON", field="body")
        snapshot: Snapshot = state["snapshot"]
        try:
            query = parse_pivot_request(body)
        except _RequestError as err:
            return _error(400, "BAD_REQUEST", err.message, field=err.field)
        try:
            result = query_pivot(snapshot.cube, query)
        except CubeQueryError as err:
            return _error(422, err.code, str(err))
        return {
            "snapshot_id": snapshot.id,
            "query": query_payload(query),
            "result": result_payload(result),
        }

    @app.post("/api/refresh")
    async def refresh(request: Request):
        denied = authorized(request, admin=True)
        if denied is not None:
            return denied
        mode = "full"
        if await request.body():
            try:
                body = await request.json()
            except Exception:
                return _error(400, "BAD_REQUEST", "body is not valid JSON", field="body")
            if body:
                mode = body.get("mode", "full")
                if mode not in ("full", "incremental") or set(body) - {"mode"}:
                    return _error(400, "BAD_REQUEST", "only {'mode': full|incremental} allowed",
                                  field="mode")
        if not refresh_lock.acquire(blocking=False):
            return _error(409, "REFRESH_BUSY", "another refresh is already running")
        try:
            old: Snapshot = state["snapshot"]
            try:
                report = run_etl(config.etl, mode=mode)
                snapshot = load_snapshot(config.etl, old.id + 1)
            except (EtlError, CubeError) as err:
                code = getattr(err, "code", "ETL_FAILED")
                return _error(422, code, str(err), snapshot_id=old.id)
            except (OSError, ValueError) as err:
                return _error(422, "ETL_FAILED", str(err), snapshot_id=old.id)
            state["snapshot"] = snapshot
            return {"snapshot_id": snapshot.id, "etl": report.summary()}
        finally:
            refresh_lock.release()

    return app


def run_service(config: ServiceConfig) -> None:   # pragma: no cover - thin wrapper
    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port, log_level="warning")
