"""Error and observed order of the time-stepper on D^alpha u = -A u, and the
gap between its fast and direct variants.
"""
from typing import Any, Dict, List, Tuple

import numpy as np

from fracstep.experiments.base import BaseExperiment, ExperimentConfig
from fracstep.solver.base import SolverConfig, Trajectory
from fracstep.solver.problems import case1, exact_case1
from fracstep.solver.stepper import solve_scalar_fde
from fracstep.utils.utils import fitted_order, successive_orders, write_csv

HEADER = ["alpha", "m", "tau", "err_inf", "order_inf", "err_end", "order_end"]
FIT_HEADER = ["alpha", "m", "fitted_order_inf", "fitted_order_end"]
GAP_HEADER = ["alpha", "m", "eps", "tau", "eta"]


def solver_config(point: Dict[str, Any], method: str) -> SolverConfig:
    return SolverConfig(
        tau=point["tau"],
        T=point["T"],
        method=method,
        delta_T=point["delta_T"],
        B=point["B"],
        eps=point["eps"],
        eps0=point["eps0"],
        kind=point["kind"],
        m=point["m"],
        sigmas=point["sigmas"],
    )


def case1_errors(trajectory: Trajectory, alpha: float, rate: float) -> Tuple[float, float]:
    """(max_n |e_n|, |e_N|) against E_alpha(-A t^alpha)."""
    exact = np.array([exact_case1(alpha, rate, t) for t in trajectory.t])
    err = np.abs(trajectory.U[:, 0] - exact)
    return float(np.max(err)), float(err[-1])


def convergence_point(point: Dict[str, Any]) -> Dict[str, float]:
    problem = case1(point["alpha"], point["rate"])
    trajectory = solve_scalar_fde(problem, solver_config(point, point["method"]))
    err_inf, err_end = case1_errors(trajectory, point["alpha"], point["rate"])
    return {"err_inf": err_inf, "err_end": err_end}


def gap_point(point: Dict[str, Any]) -> Dict[str, float]:
    problem = case1(point["alpha"], point["rate"])
    fast = solve_scalar_fde(problem, solver_config(point, "fast"))
    direct = solve_scalar_fde(problem, solver_config(point, "direct"))
    return {"eta": float(np.max(np.abs(fast.U - direct.U)))}


def sweep_points(cfg: ExperimentConfig, method: str) -> List[Dict[str, Any]]:
    return [
        {
            "alpha": alpha,
            "m": m,
            "tau": tau,
            "T": cfg.T,
            "delta_T": cfg.memory_length(tau),
            "B": B,
            "eps": eps,
            "eps0": cfg.eps0,
            "kind": cfg.kind,
            "sigmas": cfg.sigmas,
            "rate": cfg.rate,
            "method": method,
        }
        for alpha in cfg.alphas
        for m in cfg.ms
        for B in cfg.Bs
        for eps in cfg.epss
        for tau in cfg.taus
    ]


class ConvergenceExperiment(BaseExperiment):
    """Rows per (alpha, m, tau) with successive orders, plus a least-squares fit
    per (alpha, m) over the stepsizes."""

    name = "convergence"
    worker = staticmethod(convergence_point)

    def points(self) -> List[Dict[str, Any]]:
        cfg = self.config
        return sweep_points(cfg, cfg.method)

    def report(self, points: List[Dict[str, Any]], results: List[Any]) -> List[str]:
        rows, fits = [], []
        groups: Dict[Tuple[float, int, int, float], List[int]] = {}
        for k, p in enumerate(points):
            groups.setdefault((p["alpha"], p["m"], p["B"], p["eps"]), []).append(k)
        for (alpha, m, _, _), idx in groups.items():
            taus = [points[k]["tau"] for k in idx]
            err_inf = [results[k]["err_inf"] for k in idx]
            err_end = [results[k]["err_end"] for k in idx]
            orders_inf = successive_orders(taus, err_inf)
            orders_end = successive_orders(taus, err_end)
            for j, tau in enumerate(taus):
                rows.append([alpha, m, tau, err_inf[j], orders_inf[j], err_end[j], orders_end[j]])
            if len(taus) > 1:
                fits.append([alpha, m, fitted_order(taus, err_inf), fitted_order(taus, err_end)])
            else:
                fits.append([alpha, m, float("nan"), float("nan")])
        return [
            write_csv(self.config.path("convergence.csv"), HEADER, rows),
            write_csv(self.config.path("convergence_fit.csv"), FIT_HEADER, fits),
        ]


class GapExperiment(BaseExperiment):
    """eta = max_n |U_direct - U_fast| per (eps, tau)."""

    name = "gap"
    worker = staticmethod(gap_point)

    def points(self) -> List[Dict[str, Any]]:
        return sweep_points(self.config, "fast")

    def report(self, points: List[Dict[str, Any]], results: List[Any]) -> List[str]:
        rows = [[p["alpha"], p["m"], p["eps"], p["tau"], r["eta"]] for p, r in zip(points, results)]
        return [write_csv(self.config.path("gap.csv"), GAP_HEADER, rows)]
