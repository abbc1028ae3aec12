"""Long runs of the fractional Lorenz-type system and its bound on U^2 + V^2 + W^2."""
from typing import Any, Dict, List

import numpy as np

from fracstep.experiments.base import BaseExperiment
from fracstep.experiments.convergence import solver_config
from fracstep.solver.problems import lorenz, squared_norm
from fracstep.solver.stepper import solve_fde_system
from fracstep.utils.utils import write_csv

HEADER = ["alpha_u", "alpha_v", "alpha_w", "tau", "T", "m", "max_norm2", "max_norm2_tail", "U", "V", "W"]

# The tail maximum skips the transient from the initial value.
TRANSIENT = 50.0


def lorenz_point(point: Dict[str, Any]) -> Dict[str, Any]:
    problem = lorenz(orders=point["orders"])
    trajectory = solve_fde_system(problem, solver_config(point, "fast"))
    trajectory.to_csv(point["trajectory_path"])
    norms = squared_norm(trajectory.U)
    tail = norms[trajectory.t >= TRANSIENT]
    return {
        "max_norm2": float(np.max(norms)),
        "max_norm2_tail": float(np.max(tail)) if tail.size else float("nan"),
        "final": [float(v) for v in trajectory.final],
    }


class LorenzExperiment(BaseExperiment):
    """Orders come from the alpha list: one value is shared by the three
    components, three values are taken per component."""

    name = "lorenz"
    worker = staticmethod(lorenz_point)

    def orders(self) -> List[float]:
        alphas = self.config.alphas
        return list(alphas) if len(alphas) == 3 else [alphas[0]] * 3

    def points(self) -> List[Dict[str, Any]]:
        cfg = self.config
        orders = self.orders()
        tag = "_".join(f"{a:g}" for a in orders)
        return [
            {
                "orders": orders,
                "tau": tau,
                "T": cfg.T,
                "delta_T": cfg.memory_length(tau),
                "B": cfg.Bs[0],
                "eps": cfg.epss[0],
                "eps0": cfg.eps0,
                "kind": cfg.kind,
                "m": m,
                "sigmas": None,
                "trajectory_path": cfg.path(f"lorenz_{tag}_tau{tau:g}_m{m}.csv"),
            }
            for m in cfg.ms
            for tau in cfg.taus
        ]

    def report(self, points: List[Dict[str, Any]], results: List[Any]) -> List[str]:
        rows = [
            list(p["orders"]) + [p["tau"], p["T"], p["m"], r["max_norm2"], r["max_norm2_tail"]] + r["final"]
            for p, r in zip(points, results)
        ]
        paths = [p["trajectory_path"] for p in points]
        for p, r in zip(points, results):
            self.logger.output(
                f"orders {p['orders']}, m={p['m']}: max U^2+V^2+W^2 = {r['max_norm2']:.6f}, "
                f"after t = {TRANSIENT:g}: {r['max_norm2_tail']:.6f}"
            )
        return [write_csv(self.config.path("lorenz.csv"), HEADER, rows)] + paths
