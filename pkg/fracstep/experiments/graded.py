"""The graded-mesh L1 baseline next to the corrected fast method with linear
interpolation, both on D^alpha u = -A u over [0, T].
"""
from typing import Any, Dict, List, Tuple

import numpy as np

from fracstep.entity import InterpKind
from fracstep.experiments.base import BaseExperiment
from fracstep.experiments.convergence import case1_errors, solver_config
from fracstep.solver.graded import graded_l1_solve
from fracstep.solver.problems import case1, exact_case1
from fracstep.solver.stepper import solve_scalar_fde
from fracstep.utils.utils import successive_orders, write_csv

HEADER = ["alpha", "method", "param", "tau", "err_inf", "order"]


def graded_point(point: Dict[str, Any]) -> Dict[str, float]:
    alpha, rate = point["alpha"], point["rate"]
    problem = case1(alpha, rate)
    if point["method"] == "graded":
        M = int(round(point["T"] / point["tau"]))
        trajectory = graded_l1_solve(problem, point["r"], M, T=point["T"])
        exact = np.array([exact_case1(alpha, rate, t) for t in trajectory.t])
        return {"err_inf": float(np.max(np.abs(trajectory.U[:, 0] - exact)))}
    err_inf, _ = case1_errors(solve_scalar_fde(problem, solver_config(point, "fast")), alpha, rate)
    return {"err_inf": err_inf}


class GradedExperiment(BaseExperiment):
    """Graded mesh rows per grading exponent r, fast rows per correction count m."""

    name = "graded"
    worker = staticmethod(graded_point)

    def points(self) -> List[Dict[str, Any]]:
        cfg = self.config
        common = {
            "T": cfg.T,
            "B": cfg.Bs[0],
            "eps": cfg.epss[0],
            "eps0": cfg.eps0,
            "kind": InterpKind.LINEAR,
            "sigmas": None,
            "rate": cfg.rate,
        }
        points = []
        for alpha in cfg.alphas:
            for r in cfg.rs:
                for tau in cfg.taus:
                    points.append(dict(common, alpha=alpha, method="graded", r=r, m=0, tau=tau, delta_T=tau))
            for m in cfg.ms:
                for tau in cfg.taus:
                    points.append(
                        dict(common, alpha=alpha, method="fast", r=1.0, m=m, tau=tau, delta_T=cfg.memory_length(tau))
                    )
        return points

    def report(self, points: List[Dict[str, Any]], results: List[Any]) -> List[str]:
        groups: Dict[Tuple[float, str, float], List[int]] = {}
        for k, p in enumerate(points):
            param = p["r"] if p["method"] == "graded" else p["m"]
            groups.setdefault((p["alpha"], p["method"], param), []).append(k)
        rows = []
        for (alpha, method, param), idx in groups.items():
            taus = [points[k]["tau"] for k in idx]
            errors = [results[k]["err_inf"] for k in idx]
            for tau, err, order in zip(taus, errors, successive_orders(taus, errors)):
                rows.append([alpha, method, param, tau, err, order])
        return [write_csv(self.config.path("graded.csv"), HEADER, rows)]
