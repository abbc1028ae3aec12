"""Cost of the fast and the direct time-stepper over growing final times.

Wall times go to their own file so the result file stays reproducible.
"""
from typing import Any, Dict, List

from fracstep.experiments.base import BaseExperiment
from fracstep.experiments.convergence import solver_config
from fracstep.solver.problems import PROBLEMS
from fracstep.solver.stepper import solve_scalar_fde
from fracstep.utils.utils import write_csv

HEADER = ["method", "alpha", "T", "n_steps", "active_memory", "U_final"]
TIMING_HEADER = ["method", "alpha", "T", "n_steps", "wall_time"]

METHODS = ("fast", "direct")


def benchmark_point(point: Dict[str, Any]) -> Dict[str, float]:
    problem = PROBLEMS[point["problem"]](point["alpha"])
    trajectory = solve_scalar_fde(problem, solver_config(point, point["method"]))
    return {
        "n_steps": trajectory.stats["steps"],
        "active_memory": trajectory.stats["active_memory"],
        "wall_time": trajectory.stats["wall_time"],
        "U_final": float(trajectory.final[0]),
    }


class BenchmarkExperiment(BaseExperiment):
    """Both methods at every final time of the sweep."""

    name = "benchmark"
    worker = staticmethod(benchmark_point)

    def points(self) -> List[Dict[str, Any]]:
        cfg = self.config
        tau = cfg.taus[0]
        return [
            {
                "problem": cfg.problem,
                "method": method,
                "alpha": alpha,
                "tau": tau,
                "T": T,
                "delta_T": cfg.memory_length(tau),
                "B": cfg.Bs[0],
                "eps": cfg.epss[0],
                "eps0": cfg.eps0,
                "kind": cfg.kind,
                "m": cfg.ms[0],
                "sigmas": cfg.sigmas,
            }
            for method in METHODS
            for alpha in cfg.alphas
            for T in cfg.Ts
        ]

    def report(self, points: List[Dict[str, Any]], results: List[Any]) -> List[str]:
        rows, timings = [], []
        for p, r in zip(points, results):
            n_steps = int(r["n_steps"])
            rows.append([p["method"], p["alpha"], p["T"], n_steps, int(r["active_memory"]), r["U_final"]])
            timings.append([p["method"], p["alpha"], p["T"], n_steps, r["wall_time"]])
            self.logger.output(f"{p['method']:>6} T={p['T']:g}: {r['wall_time']:.3f}s, memory {int(r['active_memory'])}")
        return [
            write_csv(self.config.path("benchmark.csv"), HEADER, rows),
            write_csv(self.config.path("benchmark_timing.csv"), TIMING_HEADER, timings),
        ]
