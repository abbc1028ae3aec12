"""Dump the truncated quadrature rule and the level layout of a fast operator."""
from typing import Any, Dict, List

from fracstep.convolution.fast import DIAGNOSTICS_HEADER, FastConvolution
from fracstep.entity import FastParams
from fracstep.experiments.base import BaseExperiment
from fracstep.quadrature import rule_to_csv, truncated_rule
from fracstep.utils.utils import write_csv


def rule_dump_point(point: Dict[str, Any]) -> Dict[str, Any]:
    """Rows of the rule for lambda^(-alpha) exp(-T_hat lambda) with T_hat = delta_T,
    and the level diagnostics after feeding u = 1 up to the final time."""
    rule = truncated_rule(-point["alpha"], point["N"], point["delta_T"], point["eps0"])
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
    for _ in range(params.n_steps + 1):
        op.push_sample(1.0)
    return {"rule": rule, "levels": op.diagnostics()}


class RuleDumpExperiment(BaseExperiment):
    name = "rule-dump"
    worker = staticmethod(rule_dump_point)

    def points(self) -> List[Dict[str, Any]]:
        cfg = self.config
        tau = cfg.taus[0]
        return [
            {
                "alpha": alpha,
                "N": cfg.N,
                "tau": tau,
                "delta_T": cfg.memory_length(tau),
                "B": cfg.Bs[0],
                "eps": cfg.epss[0],
                "eps0": cfg.eps0,
                "kind": cfg.kind,
                "T": cfg.T,
            }
            for alpha in cfg.alphas
        ]

    def report(self, points: List[Dict[str, Any]], results: List[Any]) -> List[str]:
        paths = []
        for p, r in zip(points, results):
            tag = f"alpha{p['alpha']:g}_N{p['N']}"
            paths.append(rule_to_csv(r["rule"], self.config.path(f"rule_{tag}.csv")))
            paths.append(write_csv(self.config.path(f"levels_{tag}.csv"), DIAGNOSTICS_HEADER, r["levels"]))
        return paths
