# -*- coding: utf-8 -*-
import csv
import inspect
import logging
import math
import os
import threading
import time
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np
from colorama import Fore, ansi
from dotenv import dotenv_values, load_dotenv

from fracstep.exceptions import UsageError

FLOAT_FORMAT = "%.17g"


def load_env(env_file_path: str = "") -> None:
    if env_file_path:
        load_dotenv(env_file_path)
    else:
        load_dotenv()


def env_float(name: str, default: float) -> float:
    """Read a float setting from the environment (after .env is loaded)."""
    load_env()
    value = os.environ.get(name)
    if value is None or value == "":
        return default
    try:
        return float(value)
    except ValueError:
        raise UsageError(f"{name} must be a number, got {value!r}.")


def env_int(name: str, default: int) -> int:
    load_env()
    value = os.environ.get(name)
    if value is None or value == "":
        return default
    try:
        return int(value)
    except ValueError:
        raise UsageError(f"{name} must be an integer, got {value!r}.")


def read_config_file(path: str) -> Dict[str, str]:
    """Parse a key=value config file.

    Args:
        path (str): The path of the config file.

    Returns:
        Dict[str, str]: The non-empty settings, keys lower-cased with dashes
            turned into underscores so they line up with argparse destinations.
    """
    if not os.path.isfile(path):
        raise UsageError(f"Config file {path} does not exist.")
    try:
        values = dotenv_values(path)
    except (OSError, UnicodeDecodeError) as e:
        raise UsageError(f"Cannot read config file {path}: {e}")
    return {
        key.strip().lower().replace("-", "_"): value
        for key, value in values.items()
        if value is not None and value != ""
    }


def format_float(value: float) -> str:
    return FLOAT_FORMAT % value


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Write rows to a csv file with full double precision for floats.

    Args:
        path (str): The output file.
        header (Sequence[str]): The column names.
        rows (Iterable[Sequence[Any]]): The rows. Floats are written with 17
            significant digits, everything else with str().

    Returns:
        str: The path written.
    """
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [format_float(v) if isinstance(v, float) else str(v) for v in row]
            )
    return path


class Timer:
    """Monotonic wall-clock timer, usable as a context manager."""

    def __init__(self):
        self.start = 0.0
        self.elapsed = 0.0

    def __enter__(self) -> "Timer":
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc) -> None:
        self.elapsed = time.perf_counter() - self.start


def fitted_order(steps: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of log(error) against log(step)."""
    x = np.log(np.asarray(steps, dtype=float))
    y = np.log(np.asarray(errors, dtype=float))
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def successive_orders(steps: Sequence[float], errors: Sequence[float]) -> List[float]:
    """Observed orders between consecutive sweep points (nan for the first)."""
    orders = [float("nan")]
    for k in range(1, len(steps)):
        if errors[k - 1] <= 0 or errors[k] <= 0:
            orders.append(float("nan"))
            continue
        orders.append(
            math.log(errors[k - 1] / errors[k]) / math.log(steps[k - 1] / steps[k])
        )
    return orders


class Logger:
    _instance = None
    _lock = threading.Lock()

    def __new__(cls, *args, **kwargs):
        with cls._lock:
            if cls._instance is None:
                cls._instance = super().__new__(cls)
        return cls._instance

    def __init__(
        self, logger_name: str, verbose: bool = True, level: Optional[Any] = None
    ):
        if not hasattr(self, "logger"):
            if level is None:
                load_env()
                level = os.environ.get("FRACSTEP_LOG_LEVEL", "INFO").upper()
            self.logger = logging.getLogger(logger_name)
            self.logger.setLevel(level=level)
            self.formatter = logging.Formatter(
                "%(asctime)s %(levelname)s %(name)s %(message)s (%(filename)s:%(lineno)d)"
            )
            self.console_handler = logging.StreamHandler()
            self.console_handler.setLevel(level=level)
            self.console_handler.setFormatter(self.formatter)
            self.logger.addHandler(self.console_handler)
        # The instance is shared, the most recent caller decides verbosity.
        self.verbose = verbose

    def output(self, message: str, color: str = ansi.Fore.GREEN) -> None:
        print(color + message + Fore.RESET)

    def debug(self, message: str) -> None:
        if not self.verbose:
            return
        caller_frame = inspect.stack()[1]
        caller_name = caller_frame[3]
        caller_line = caller_frame[2]
        self.logger.debug(
            Fore.MAGENTA + f"({caller_name} L{caller_line}): {message}" + Fore.RESET
        )

    def info(self, message: str) -> None:
        if not self.verbose:
            return
        caller_frame = inspect.stack()[1]
        caller_name = caller_frame[3]
        caller_line = caller_frame[2]
        self.logger.info(
            Fore.BLACK + f"({caller_name} L{caller_line}): {message}" + Fore.RESET
        )

    def error(self, message: str) -> None:
        if not self.verbose:
            return
        caller_frame = inspect.stack()[1]
        caller_name = caller_frame[3]
        caller_line = caller_frame[2]
        self.logger.error(
            Fore.RED + f"({caller_name} L{caller_line}): {message}" + Fore.RESET
        )

    def warning(self, message: str) -> None:
        if not self.verbose:
            return
        caller_frame = inspect.stack()[1]
        caller_name = caller_frame[3]
        caller_line = caller_frame[2]
        self.logger.warning(
            Fore.YELLOW + f"({caller_name} L{caller_line}): {message}" + Fore.RESET
        )
