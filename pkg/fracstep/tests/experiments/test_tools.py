"""Test the command line entry.
Run this test with command: poetry run pytest fracstep/tests/experiments/test_tools.py
"""
import argparse
import csv
import os

import pytest

from fracstep.entity import InterpKind
from fracstep.exceptions import UsageError
from fracstep.tools import (
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_USAGE,
    build_config,
    main,
    parse_args,
    parse_flag,
    parse_list,
    parse_number,
)


@pytest.mark.parametrize(
    "text, expected",
    [("2^-3", 0.125), ("1e-10", 1e-10), (" 0.5 ", 0.5), ("10^2", 100.0)],
)
def test_parse_number(text, expected):
    assert parse_number(text) == expected


def test_parse_number_rejects_garbage():
    with pytest.raises(UsageError):
        parse_number("half")


@pytest.mark.parametrize(
    "text, expected",
    [
        ("2^-5..2^-9", [2.0**-k for k in range(5, 10)]),
        ("2^-2..2^-1", [0.25, 0.5]),
        ("0.5, 0.8", [0.5, 0.8]),
        ("1e-10,2^-3", [1e-10, 0.125]),
        ("", []),
    ],
)
def test_parse_list(text, expected):
    assert parse_list(text) == expected


@pytest.mark.parametrize("text", ["2^-5..3^-9", "0.1..0.2"])
def test_parse_list_rejects_bad_ranges(text):
    with pytest.raises(UsageError):
        parse_list(text)


def test_build_config(tmp_path):
    argv = ["convergence", "--alpha", "0.8", "--tau", "2^-5..2^-6", "--m", "0,2", "--interp", "linear", "--out", str(tmp_path)]
    config = build_config(parse_args(argparse.ArgumentParser(), argv))
    assert config.name == "convergence"
    assert config.alphas == [0.8]
    assert config.taus == [2.0**-5, 2.0**-6]
    assert config.ms == [0, 2]
    assert config.kind is InterpKind.LINEAR
    assert config.out == str(tmp_path)


def test_flags_override_config_file(tmp_path):
    path = tmp_path / "run.env"
    path.write_text("alpha=0.5\ntau=2^-4\nB=3\nworkers=2\n")
    argv = ["gap", "--config", str(path), "--tau", "0.1", "--out", str(tmp_path)]
    config = build_config(parse_args(argparse.ArgumentParser(), argv))
    assert config.alphas == [0.5]
    assert config.taus == [0.1]
    assert config.Bs == [3]
    assert config.workers == 2


def test_integer_flags(tmp_path):
    argv = ["convergence", "--m", "1.5", "--out", str(tmp_path)]
    with pytest.raises(UsageError):
        build_config(parse_args(argparse.ArgumentParser(), argv))


def test_main_without_command():
    assert main([]) == EXIT_USAGE


def test_main_empty_sweep(tmp_path):
    assert main(["convergence", "--tau", "", "--out", str(tmp_path)]) == EXIT_USAGE


def test_main_bad_choice():
    with pytest.raises(SystemExit) as info:
        main(["convergence", "--interp", "cubic"])
    assert info.value.code == 2


def test_main_numerical_failure(tmp_path):
    # nine correction terms exceed what the starting-weight system supports
    argv = ["convergence", "--alpha", "0.5", "--tau", "0.25", "--m", "9", "--out", str(tmp_path)]
    assert main(argv) == EXIT_NUMERICAL


def test_main_kernel_error(tmp_path):
    argv = [
        "kernel-error", "--alpha", "-0.5", "--tau", "0.1", "--deltaT", "1", "--T", "50",
        "--B", "5", "--eps", "1e-10", "--out", str(tmp_path),
    ]
    assert main(argv) == EXIT_OK
    with open(os.path.join(str(tmp_path), "kernel_error.csv")) as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 1
    assert float(rows[0]["max_rel_error"]) <= 1e-8


def test_main_convergence(tmp_path):
    argv = ["convergence", "--alpha", "0.5", "--tau", "2^-3..2^-4", "--m", "1", "--out", str(tmp_path)]
    assert main(argv) == EXIT_OK
    assert sorted(os.listdir(str(tmp_path))) == ["convergence.csv", "convergence_fit.csv"]


@pytest.mark.slow
def test_main_kernel_error_long_history(tmp_path):
    argv = [
        "kernel-error", "--alpha", "-0.5", "--tau", "0.1", "--deltaT", "1", "--T", "1e4",
        "--B", "2,5,10", "--eps", "1e-10", "--workers", "3", "--out", str(tmp_path),
    ]
    assert main(argv) == EXIT_OK
    with open(os.path.join(str(tmp_path), "kernel_error.csv")) as f:
        rows = list(csv.DictReader(f))
    assert [int(row["B"]) for row in rows] == [2, 5, 10]
    for row in rows:
        assert float(row["max_rel_error"]) <= 1e-10


@pytest.mark.slow
def test_main_convergence_order(tmp_path):
    argv = [
        "convergence", "--alpha", "0.8", "--m", "3", "--tau", "2^-5..2^-9",
        "--T", "40", "--deltaT", "0.5", "--out", str(tmp_path),
    ]
    assert main(argv) == EXIT_OK
    with open(os.path.join(str(tmp_path), "convergence.csv")) as f:
        assert len(list(csv.DictReader(f))) == 5
    with open(os.path.join(str(tmp_path), "convergence_fit.csv")) as f:
        fit = next(csv.DictReader(f))
    assert 2.0 <= float(fit["fitted_order_inf"]) <= 2.3


@pytest.mark.parametrize("text, expected", [("true", True), ("Yes", True), ("0", False), ("off", False)])
def test_parse_flag(text, expected):
    assert parse_flag(text, "history") is expected


def test_parse_flag_rejects_garbage():
    with pytest.raises(UsageError):
        parse_flag("maybe", "history")


def test_main_missing_config_file(tmp_path):
    argv = ["gap", "--config", str(tmp_path / "missing.env"), "--out", str(tmp_path)]
    assert main(argv) == EXIT_USAGE


def test_preset(tmp_path):
    argv = ["kernel-error", "--preset", "error-history", "--out", str(tmp_path)]
    config = build_config(parse_args(argparse.ArgumentParser(), argv))
    assert config.alphas == [-0.5, 0.5]
    assert config.taus == [1.0]
    assert config.delta_T == 1.0
    assert config.Ts == [100.0]
    assert config.Bs == [5]
    assert config.history is True


def test_flags_override_preset(tmp_path):
    argv = ["kernel-error", "--preset", "basis-sweep", "--alpha", "-1.8", "--B", "4", "--out", str(tmp_path)]
    config = build_config(parse_args(argparse.ArgumentParser(), argv))
    assert config.alphas == [-1.8]
    assert config.Bs == [4]
    assert config.taus == [0.01]
    assert config.history is False


@pytest.mark.parametrize("command, preset", [("kernel-error", "fast-sweep"), ("gap", "error-history")])
def test_unknown_preset(tmp_path, command, preset):
    argv = [command, "--preset", preset, "--out", str(tmp_path)]
    with pytest.raises(UsageError):
        build_config(parse_args(argparse.ArgumentParser(), argv))
    assert main(argv) == EXIT_USAGE


def test_history_flag(tmp_path):
    argv = [
        "kernel-error", "--alpha", "0.5", "--tau", "1", "--deltaT", "1", "--T", "20",
        "--history", "--out", str(tmp_path),
    ]
    assert main(argv) == EXIT_OK
    assert sorted(os.listdir(str(tmp_path))) == [
        "kernel_error.csv",
        "kernel_error_history_alpha0.5_B5_eps1e-10.csv",
    ]
