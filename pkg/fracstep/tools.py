"""Command line entry of the experiments.

    fracstep kernel-error --alpha -0.5 --tau 0.1 --deltaT 1 --T 1e4 --B 2,5,10
    fracstep convergence --alpha 0.8 --m 3 --tau 2^-5..2^-9 --T 40 --deltaT 0.5
    fracstep kernel-error --preset basis-sweep --workers 4
"""
import argparse
import re
import sys
from typing import Any, Dict, List, Optional

from colorama import Fore

from fracstep.exceptions import DomainError, FracstepError, UsageError
from fracstep.experiments.base import EXPERIMENT_NAMES, ExperimentConfig
from fracstep.experiments.registry import PRESETS, run_experiment
from fracstep.utils.utils import Logger, load_env, read_config_file

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

_POWER = re.compile(r"^\s*([0-9.eE+-]+)\s*\^\s*([+-]?[0-9]+)\s*$")
_TRUE = ("1", "true", "yes", "on")
_FALSE = ("0", "false", "no", "off")

# flag destination -> ExperimentConfig field
_LIST_FIELDS = {
    "alpha": "alphas",
    "tau": "taus",
    "B": "Bs",
    "eps": "epss",
    "m": "ms",
    "T": "Ts",
    "r": "rs",
}
_SCALAR_FIELDS = {
    "deltaT": "delta_T",
    "eps0": "eps0",
    "interp": "kind",
    "method": "method",
    "problem": "problem",
    "rate": "rate",
    "N": "N",
    "out": "out",
    "workers": "workers",
}


def parse_number(text: str) -> float:
    """A float, or a power written as base^exponent (e.g. 2^-9)."""
    match = _POWER.match(text)
    try:
        if match:
            return float(match.group(1)) ** int(match.group(2))
        return float(text)
    except ValueError:
        raise UsageError(f"Cannot read {text!r} as a number.")


def parse_list(text: str) -> List[float]:
    """Comma separated numbers; `b^e1..b^e2` expands to b^e for every integer
    e from e1 to e2."""
    values: List[float] = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if ".." in item:
            first, last = item.split("..", 1)
            lo, hi = _POWER.match(first), _POWER.match(last)
            if not lo or not hi or float(lo.group(1)) != float(hi.group(1)):
                raise UsageError(f"Ranges are written base^e1..base^e2, got {item!r}.")
            base = float(lo.group(1))
            e1, e2 = int(lo.group(2)), int(hi.group(2))
            step = 1 if e2 >= e1 else -1
            values.extend(base**e for e in range(e1, e2 + step, step))
        else:
            values.append(parse_number(item))
    return values


def parse_flag(text: str, name: str) -> bool:
    value = text.strip().lower()
    if value in _TRUE:
        return True
    if value in _FALSE:
        return False
    raise UsageError(f"{name} must be true or false, got {text!r}.")


def _as_int(value: float, name: str) -> int:
    if value != int(value):
        raise UsageError(f"{name} must be an integer, got {value}.")
    return int(value)


def parse_args(parser: argparse.ArgumentParser, argv: Optional[List[str]] = None) -> argparse.Namespace:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=str, help="Comma-separated orders")
    common.add_argument("--tau", type=str, help="Stepsizes, e.g. 0.1 or 2^-5..2^-9")
    common.add_argument("--deltaT", type=str, help="Memory length of the local part")
    common.add_argument("--B", type=str, help="Comma-separated level bases")
    common.add_argument("--eps", type=str, help="Comma-separated level precisions")
    common.add_argument("--eps0", type=str, help="Truncation precision of the rules")
    common.add_argument("--T", type=str, help="Final time (benchmark: comma-separated list)")
    common.add_argument("--m", type=str, help="Comma-separated correction counts")
    common.add_argument("--sigma", type=str, help="Comma-separated correction exponents")
    common.add_argument("--interp", type=str, choices=["linear", "quadratic"], help="Interpolation")
    common.add_argument("--method", type=str, choices=["fast", "direct"], help="History evaluation")
    common.add_argument("--problem", type=str, choices=["case1", "case2"], help="Benchmark problem")
    common.add_argument("--rate", type=str, help="A in D^alpha u = -A u")
    common.add_argument("--r", type=str, help="Comma-separated grading exponents")
    common.add_argument("--N", type=str, help="Rule order of rule-dump")
    common.add_argument("--out", type=str, help="Output directory")
    common.add_argument("--preset", type=str, help="Named settings; the config file and flags override them")
    common.add_argument("--config", type=str, help="key=value file; flags override it")
    common.add_argument("--history", action="store_true", help="kernel-error: write the error at every step")
    common.add_argument("--workers", type=str, help="Process pool size")
    common.add_argument("--verbose", action="store_true", help="Print the log")

    subparsers = parser.add_subparsers(dest="command")
    helps = {
        "kernel-error": "Fast history against the exact convolution of 1 + t",
        "convergence": "Errors and orders of the time-stepper on D^alpha u = -A u",
        "gap": "Difference between the fast and the direct time-stepper",
        "graded": "Graded-mesh L1 baseline against the corrected fast method",
        "lorenz": "Fractional Lorenz-type system and its absorbing ball",
        "benchmark": "Wall time and memory of fast and direct stepping",
        "rule-dump": "Truncated quadrature rule and level layout",
    }
    for name in EXPERIMENT_NAMES:
        subparsers.add_parser(name, parents=[common], help=helps[name])
    return parser.parse_args(argv)


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    """Merge flags over the config file over the preset; unset values keep the defaults."""
    load_env()
    settings: Dict[str, Optional[str]] = {}
    if args.preset:
        presets = PRESETS.get(args.command, {})
        if args.preset not in presets:
            raise UsageError(f"No preset {args.preset!r} for {args.command}, expected one of {sorted(presets)}.")
        settings.update(presets[args.preset])
    if args.config:
        settings.update(read_config_file(args.config))
    for dest in list(_LIST_FIELDS) + list(_SCALAR_FIELDS) + ["sigma"]:
        value = getattr(args, dest, None)
        if value is not None:
            settings[dest.lower()] = value
    if args.history:
        settings["history"] = "true"

    kwargs: Dict[str, Any] = {"name": args.command}
    for dest, field_name in _LIST_FIELDS.items():
        text = settings.get(dest.lower())
        if text is None:
            continue
        values = parse_list(text)
        if dest in ("B", "m"):
            kwargs[field_name] = [_as_int(v, dest) for v in values]
        else:
            kwargs[field_name] = values
    if settings.get("sigma") is not None:
        kwargs["sigmas"] = parse_list(settings["sigma"] or "")
    for dest, field_name in _SCALAR_FIELDS.items():
        text = settings.get(dest.lower())
        if text is None:
            continue
        if dest in ("interp", "method", "problem", "out"):
            kwargs[field_name] = text
        elif dest in ("N", "workers"):
            kwargs[field_name] = _as_int(parse_number(text), dest)
        else:
            kwargs[field_name] = parse_number(text)
    if settings.get("history") is not None:
        kwargs["history"] = parse_flag(settings["history"] or "", "history")
    return ExperimentConfig(**kwargs)


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(description="Fast fractional convolution experiments")
    args = parse_args(parser=parser, argv=argv)
    if not args.command:
        parser.print_help()
        return EXIT_USAGE
    logger = Logger(logger_name=__name__, verbose=True)
    try:
        config = build_config(args)
        paths = run_experiment(config, verbose=args.verbose)
    except (UsageError, DomainError) as e:
        logger.output(f"Usage error: {e}", color=Fore.RED)
        return EXIT_USAGE
    except FracstepError as e:
        logger.output(f"Numerical failure: {e}", color=Fore.RED)
        return EXIT_NUMERICAL
    for path in paths:
        logger.output(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
