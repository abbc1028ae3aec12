"""Test the utils.
Run this test with command: poetry run pytest fracstep/tests/utils/test_utils.py
"""
import csv
import math

import pytest

from fracstep.exceptions import UsageError
from fracstep.utils.utils import *


@pytest.mark.parametrize(
    "value, expected",
    [(0.1, "0.10000000000000001"), (2.0, "2"), (1e-10, "1e-10")],
)
def test_format_float(value, expected):
    assert format_float(value) == expected


def test_write_csv(tmp_path):
    path = write_csv(str(tmp_path / "sub" / "out.csv"), ["n", "x"], [[0, 0.5], [1, 1 / 3]])
    with open(path) as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["n", "x"]
    assert rows[1] == ["0", "0.5"]
    assert float(rows[2][1]) == 1 / 3


@pytest.mark.parametrize(
    "steps, errors, expected",
    [
        ([0.1, 0.05, 0.025], [1e-2, 2.5e-3, 6.25e-4], [2.0, 2.0]),
        ([0.1, 0.05], [1e-2, 5e-3], [1.0]),
    ],
)
def test_successive_orders(steps, errors, expected):
    orders = successive_orders(steps, errors)
    assert math.isnan(orders[0])
    assert orders[1:] == pytest.approx(expected, rel=1e-12)


def test_successive_orders_with_zero_error():
    orders = successive_orders([0.1, 0.05, 0.025], [1e-2, 0.0, 1e-4])
    assert math.isnan(orders[1]) and math.isnan(orders[2])


def test_fitted_order():
    steps = [2.0**-k for k in range(3, 8)]
    errors = [3.0 * h**1.5 for h in steps]
    assert fitted_order(steps, errors) == pytest.approx(1.5, rel=1e-10)


def test_read_config_file(tmp_path):
    path = tmp_path / "run.env"
    path.write_text("alpha=0.5\nTAU=2^-4\nstartup-refinement=8\nempty=\n")
    assert read_config_file(str(path)) == {"alpha": "0.5", "tau": "2^-4", "startup_refinement": "8"}


def test_read_config_file_missing(tmp_path):
    with pytest.raises(UsageError):
        read_config_file(str(tmp_path / "missing.env"))


def test_read_config_file_directory(tmp_path):
    with pytest.raises(UsageError):
        read_config_file(str(tmp_path))


@pytest.mark.parametrize(
    "value, expected",
    [(None, 1e-16), ("", 1e-16), ("1e-14", 1e-14)],
)
def test_env_float(monkeypatch, value, expected):
    if value is None:
        monkeypatch.delenv("FRACSTEP_EPS0", raising=False)
    else:
        monkeypatch.setenv("FRACSTEP_EPS0", value)
    assert env_float("FRACSTEP_EPS0", 1e-16) == expected


def test_env_int(monkeypatch):
    monkeypatch.setenv("FRACSTEP_WORKERS", "3")
    assert env_int("FRACSTEP_WORKERS", 1) == 3


@pytest.mark.parametrize("func, value", [(env_float, "tiny"), (env_int, "2.5"), (env_int, "many")])
def test_env_rejects_malformed_values(monkeypatch, func, value):
    monkeypatch.setenv("FRACSTEP_WORKERS", value)
    with pytest.raises(UsageError):
        func("FRACSTEP_WORKERS", 1)


def test_timer():
    with Timer() as timer:
        sum(range(1000))
    assert timer.elapsed >= 0.0


def test_logger_is_shared():
    assert Logger(logger_name="a", verbose=False) is Logger(logger_name="b", verbose=False)
