"""Daily account-balance warehouse: star schema, ETL, OLAP cube, bench, service."""

from .bench import BenchReport, GeneratorParams, generate_dataset, pooled_t, run_bench, time_benefit
from .cube import (
    AVERAGE,
    SUM_CLOSING,
    CubeError,
    CubeQueryError,
    CubeSnapshot,
    Dice,
    DrillDown,
    PivotQuery,
    PivotResult,
    PivotSwap,
    RollUp,
    Slice,
    build_cube,
    query_pivot,
    transform_query,
)
from .etl import EtlConfig, EtlReport, run_etl
from .money import MoneyMinor
from .oracle import reference_evaluator
from .render import result_to_csv, result_to_table
from .service import ServiceConfig, create_app
from .star_schema import Dimensions, FactAccountBalance, FactStore, load_dimensions, validate_star
from .time_dimension import TimeTable, build_time_table, extend_time_table, time_table_for_range

__all__ = [
    "AVERAGE",
    "SUM_CLOSING",
    "BenchReport",
    "CubeError",
    "CubeQueryError",
    "CubeSnapshot",
    "Dice",
    "Dimensions",
    "DrillDown",
    "EtlConfig",
    "EtlReport",
    "FactAccountBalance",
    "FactStore",
    "GeneratorParams",
    "MoneyMinor",
    "PivotQuery",
    "PivotResult",
    "PivotSwap",
    "RollUp",
    "ServiceConfig",
    "Slice",
    "TimeTable",
    "build_cube",
    "build_time_table",
    "create_app",
    "extend_time_table",
    "generate_dataset",
    "load_dimensions",
    "pooled_t",
    "query_pivot",
    "reference_evaluator",
    "result_to_csv",
    "result_to_table",
    "run_bench",
    "run_etl",
    "time_benefit",
    "time_table_for_range",
    "transform_query",
    "validate_star",
]
