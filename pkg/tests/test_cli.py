"""Command-line surface: subcommand behaviour and exit codes."""

from __future__ import annotations

from pathlib import Path

import pytest

from balancecube.cli import dispatch
from balancecube.etl import EtlConfig

from conftest import build_fixture_files


def write_etl_conf(dataset: Path, target: Path) -> Path:
    config = EtlConfig.for_dataset_dir(dataset)
    target.write_text(
        "\n".join(f"{key} = {getattr(config, key)}" for key in EtlConfig._PATH_KEYS) + "\n",
        encoding="utf-8",
    )
    return target


@pytest.fixture(scope="module")
def cli_env(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    dataset = root / "data"
    build_fixture_files(dataset)
    conf = write_etl_conf(dataset, root / "etl.conf")
    assert dispatch(["etl", "--config", str(conf)]) == 0
    return {"dataset": dataset, "conf": conf}


# ---------------------------------------------------------------- timegen

def test_timegen_eight_years(tmp_path, capsys):
    out = tmp_path / "time_table.csv"
    code = dispatch(["timegen", "--first", "2009", "--last", "2016", "--out", str(out)])
    assert code == 0
    assert "2922" in capsys.readouterr().out
    assert len(out.read_text(encoding="utf-8").splitlines()) == 2922 + 1  # header


def test_timegen_extend(tmp_path, capsys):
    out = tmp_path / "time_table.csv"
    assert dispatch(["timegen", "--first", "2015", "--last", "2015", "--out", str(out)]) == 0
    assert dispatch(["timegen", "--extend", "--last", "2016", "--out", str(out)]) == 0
    assert len(out.read_text(encoding="utf-8").splitlines()) == 365 + 366 + 1


def test_timegen_requires_first_or_extend(tmp_path, capsys):
    out = tmp_path / "time_table.csv"
    assert dispatch(["timegen", "--last", "2016", "--out", str(out)]) == 2
    assert "--first" in capsys.readouterr().err


def test_timegen_rejects_reversed_years(tmp_path, capsys):
    out = tmp_path / "time_table.csv"
    code = dispatch(["timegen", "--first", "2016", "--last", "2012", "--out", str(out)])
    assert code != 0
    assert "error:" in capsys.readouterr().err


# ---------------------------------------------------------------- etl

def test_etl_prints_summary(cli_env, capsys):
    assert dispatch(["etl", "--config", str(cli_env["conf"]), "--mode", "full"]) == 0
    out = capsys.readouterr().out
    assert "rows_read:" in out and "store_digest:" in out
    assert (cli_env["dataset"] / "facts.csv").exists()


def test_etl_missing_movements_names_the_file(tmp_path, capsys):
    dataset = tmp_path / "data"
    build_fixture_files(dataset)
    (dataset / "movements.csv").unlink()
    conf = write_etl_conf(dataset, tmp_path / "etl.conf")
    code = dispatch(["etl", "--config", str(conf)])
    assert code != 0
    assert "movements.csv" in capsys.readouterr().err


def test_etl_bad_mode_flag(cli_env, capsys):
    assert dispatch(["etl", "--config", str(cli_env["conf"]), "--mode", "fast"]) == 2
    capsys.readouterr()


# ---------------------------------------------------------------- query

def test_query_table_output(cli_env, capsys):
    code = dispatch([
        "query", "--config", str(cli_env["conf"]),
        "--measure", "balance_eur", "--aggregator", "SUM_CLOSING",
        "--rows", "account", "--cols", "month", "--grain", "month",
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert out.startswith("balance_eur SUM_CLOSING by month [EUR]")
    assert "A1" in out and "2015-11" in out


def test_query_csv_output(cli_env, capsys):
    code = dispatch([
        "query", "--config", str(cli_env["conf"]),
        "--measure", "balance_eur", "--aggregator", "AVERAGE",
        "--rows", "company", "--filter", "currency=EUR", "--format", "csv",
    ])
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("row\\col")
    assert lines[-1].startswith("TOTAL")


def test_query_unknown_level_gives_usage_hint(cli_env, capsys):
    code = dispatch([
        "query", "--config", str(cli_env["conf"]),
        "--measure", "balance_eur", "--aggregator", "SUM_CLOSING",
        "--rows", "galaxy",
    ])
    assert code == 2
    err = capsys.readouterr().err
    assert "UNKNOWN_LEVEL" in err
    assert "hint:" in err and "company" in err


def test_query_unknown_member_is_nonzero_without_hint(cli_env, capsys):
    code = dispatch([
        "query", "--config", str(cli_env["conf"]),
        "--measure", "balance_eur", "--aggregator", "SUM_CLOSING",
        "--filter", "company=C9",
    ])
    assert code == 2
    err = capsys.readouterr().err
    assert "UNKNOWN_MEMBER" in err


def test_query_bad_date_flag(cli_env, capsys):
    code = dispatch([
        "query", "--config", str(cli_env["conf"]),
        "--measure", "balance_eur", "--aggregator", "SUM_CLOSING",
        "--from", "next-tuesday",
    ])
    assert code == 2
    assert "--from" in capsys.readouterr().err


def test_query_malformed_filter_flag(cli_env, capsys):
    code = dispatch([
        "query", "--config", str(cli_env["conf"]),
        "--measure", "balance_eur", "--aggregator", "SUM_CLOSING",
        "--filter", "company",
    ])
    assert code == 2
    assert "--filter" in capsys.readouterr().err


# ---------------------------------------------------------------- bench

def test_bench_smoke(tmp_path, capsys):
    params = tmp_path / "params.conf"
    params.write_text(
        "seed = 3\nn_companies = 1\nn_banks = 1\nn_accounts = 2\n"
        "first_year = 2015\nlast_year = 2015\nmovements_per_account_day = 0.5\n",
        encoding="utf-8",
    )
    out_dir = tmp_path / "bench"
    code = dispatch(["bench", "--params", str(params), "--out-dir", str(out_dir)])
    assert code == 0
    assert "seed 3" in capsys.readouterr().out
    report = (out_dir / "bench_report.txt").read_text(encoding="utf-8")
    assert report.startswith("Benchmark report (seed 3)")
    assert (out_dir / "bench_report.csv").exists()


def test_bench_rejects_bad_params(tmp_path, capsys):
    params = tmp_path / "params.conf"
    params.write_text("n_accounts = -5\n", encoding="utf-8")
    code = dispatch(["bench", "--params", str(params), "--out-dir", str(tmp_path / "b")])
    assert code == 1
    assert "error:" in capsys.readouterr().err


# ---------------------------------------------------------------- dispatch

def test_unknown_subcommand(capsys):
    assert dispatch(["frobnicate"]) == 2
    capsys.readouterr()


def test_no_arguments(capsys):
    assert dispatch([]) == 2
    capsys.readouterr()


def test_help_exits_zero(capsys):
    assert dispatch(["--help"]) == 0
    assert "timegen" in capsys.readouterr().out
