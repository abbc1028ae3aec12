"""Accuracy of the fast history against the exact convolution of 1 + t.

The samples u = 1 + t are reproduced exactly by both interpolations, so the
error measured here is the error of the sum-of-exponentials history alone.
"""
from typing import Any, Dict, List

import numpy as np

from fracstep.convolution.corrections import exact_power_convolution
from fracstep.convolution.fast import FastConvolution
from fracstep.entity import FastParams, InterpKind
from fracstep.experiments.base import BaseExperiment
from fracstep.specfun import rgamma
from fracstep.utils.utils import write_csv

HEADER = ["alpha", "B", "eps", "max_rel_error", "sum_N", "sum_q", "max_kernel_error"]
HISTORY_HEADER = ["n", "t", "rel_error"]

_KERNEL_GRID = 257

# Named settings of the kernel-error command, keyed like a config file.
PRESETS: Dict[str, Dict[str, str]] = {
    # error of every step for a derivative and an integral kernel
    "error-history": {
        "alpha": "-0.5,0.5",
        "tau": "1",
        "deltat": "1",
        "t": "100",
        "b": "5",
        "eps": "1e-10",
        "history": "true",
    },
    # accuracy and quadrature size against B, down to second derivatives
    "basis-sweep": {
        "alpha": "-1.8,-1.2,-0.5,0.2,0.8",
        "tau": "0.01",
        "deltat": "1",
        "t": "1e4",
        "b": "2,3,4,5,6,7,8,9,10",
        "eps": "1e-10",
    },
}


def exact_linear_convolution(alpha: float, t: float) -> float:
    """k_alpha * (1 + s) at t."""
    return exact_power_convolution(alpha, 0.0, t) + exact_power_convolution(alpha, 1.0, t)


def linear_convolution_scale(alpha: float, t: float) -> float:
    """|k_alpha * 1| + |k_alpha * s| at t.

    Equal to the magnitude of the exact value unless alpha < -1, where the
    two terms have opposite signs and the exact value vanishes at
    t = -(1 + alpha).
    """
    return abs(exact_power_convolution(alpha, 0.0, t)) + abs(exact_power_convolution(alpha, 1.0, t))


def kernel_error(op: FastConvolution) -> float:
    """Max relative error of the level approximations of k_alpha over their windows."""
    scale = rgamma(op.alpha)
    if scale == 0.0:
        return 0.0
    worst = 0.0
    for lvl in op.levels:
        lo, hi = op.kernel_window(lvl.level)
        t = np.linspace(lo, hi, _KERNEL_GRID)
        exact = scale * t ** (op.alpha - 1.0)
        approx = op.soe_kernel(lvl.level, t)
        worst = max(worst, float(np.max(np.abs(approx - exact) / np.abs(exact))))
    return worst


def kernel_error_point(point: Dict[str, Any]) -> Dict[str, float]:
    params = FastParams.from_memory_length(
        point["alpha"],
        point["tau"],
        point["delta_T"],
        B=point["B"],
        eps=point["eps"],
        eps0=point["eps0"],
        kind=point["kind"],
        horizon=point["T"],
    )
    op = FastConvolution(params)
    tau = params.tau
    first = params.kind.min_samples
    history: List[List[float]] = []
    worst = 0.0
    for n in range(params.n_steps + 1):
        op.push_sample(1.0 + n * tau)
        if n >= first:
            t = n * tau
            error = abs(op.evaluate() - exact_linear_convolution(params.alpha, t))
            error /= linear_convolution_scale(params.alpha, t)
            worst = max(worst, error)
            if point.get("history_path"):
                history.append([n, t, error])
    if point.get("history_path"):
        write_csv(point["history_path"], HISTORY_HEADER, history)
    return {
        "max_rel_error": worst,
        "sum_N": float(sum(lvl.order for lvl in op.levels)),
        "sum_q": float(sum(lvl.q for lvl in op.levels)),
        "max_kernel_error": kernel_error(op),
    }


class KernelErrorExperiment(BaseExperiment):
    """One row per (alpha, B, eps) at the first stepsize and final time.
    With history on, every point also writes its error at each step."""

    name = "kernel-error"
    worker = staticmethod(kernel_error_point)

    def points(self) -> List[Dict[str, Any]]:
        cfg = self.config
        tau = cfg.taus[0]
        return [
            {
                "alpha": alpha,
                "tau": tau,
                "delta_T": cfg.memory_length(tau),
                "B": B,
                "eps": eps,
                "eps0": cfg.eps0,
                "kind": InterpKind.parse(cfg.kind),
                "T": cfg.T,
                "history_path": (
                    cfg.path(f"kernel_error_history_alpha{alpha:g}_B{B}_eps{eps:g}.csv") if cfg.history else None
                ),
            }
            for alpha in cfg.alphas
            for B in cfg.Bs
            for eps in cfg.epss
        ]

    def report(self, points: List[Dict[str, Any]], results: List[Any]) -> List[str]:
        rows = [
            [p["alpha"], p["B"], p["eps"], r["max_rel_error"], int(r["sum_N"]), int(r["sum_q"]), r["max_kernel_error"]]
            for p, r in zip(points, results)
        ]
        paths = [write_csv(self.config.path("kernel_error.csv"), HEADER, rows)]
        return paths + [p["history_path"] for p in points if p["history_path"]]
