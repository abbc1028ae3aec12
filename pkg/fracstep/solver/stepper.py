"""Implicit time-stepping of Caputo problems with the convolution operators.

The Caputo derivative of order alpha is the Riemann-Liouville derivative
(a convolution with kernel order -alpha) minus u0 t^(-alpha) / Gamma(1 - alpha).
At step n the scheme reads

    D_n U - u0 t_n^(-alpha) / Gamma(1 - alpha) = f(U_n, t_n),

where D_n is the corrected fast or direct operator, and is solved for U_n by
Newton's method.
"""
import math
from dataclasses import replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from fracstep.convolution.base import Convolution
from fracstep.convolution.corrections import CorrectionSet
from fracstep.convolution.direct import DirectConvolution
from fracstep.convolution.fast import FastConvolution
from fracstep.entity import InterpKind
from fracstep.exceptions import DomainError, StepFailure
from fracstep.solver.base import BaseSolver, SolverConfig, Trajectory
from fracstep.solver.problems import FdeProblem
from fracstep.utils.utils import Timer


class CaputoStepper(BaseSolver):
    """Marches a problem on the uniform grid t_n = n tau.

    Components sharing a fractional order share one operator fed with vector
    samples; components of different orders get their own operators.
    """

    def __init__(
        self,
        problem: FdeProblem,
        config: SolverConfig,
        verbose: bool = False,
        **kwargs,
    ):
        super().__init__(
            problem,
            newton_tol=config.newton_tol,
            newton_maxiter=config.newton_maxiter,
            verbose=verbose,
            **kwargs,
        )
        self.config = config
        self.groups = self._group_components()
        self.operators: List[Convolution] = [self._make_operator(order) for order, _ in self.groups]

    def _group_components(self) -> List[Tuple[float, np.ndarray]]:
        by_order: Dict[float, List[int]] = {}
        for k, order in enumerate(self.problem.orders):
            by_order.setdefault(float(order), []).append(k)
        return [(order, np.array(idx)) for order, idx in by_order.items()]

    def _make_operator(self, order: float) -> Convolution:
        params = self.config.fast_params(-order)
        corrections = None
        if self.config.m:
            corrections = CorrectionSet(
                params,
                self.config.correction_exponents(order),
                fast=self.config.method == "fast",
                verbose=self.verbose,
            )
        if self.config.method == "fast":
            return FastConvolution(params, corrections=corrections, verbose=self.verbose)
        return DirectConvolution(params, corrections=corrections, verbose=self.verbose)

    def _push(self, U: np.ndarray) -> None:
        for (_, idx), op in zip(self.groups, self.operators):
            op.push_sample(U[idx])

    def _affine(self) -> Tuple[np.ndarray, np.ndarray]:
        d = self.problem.dimension
        known = np.empty(d)
        coeff = np.empty(d)
        for (_, idx), op in zip(self.groups, self.operators):
            k, c = op.step_affine()
            known[idx] = k
            coeff[idx] = c
        return known, coeff

    def startup_values(self) -> np.ndarray:
        """U_1..U_s from a linear-interpolation direct solve with one
        correction term on a grid refined by `startup_refinement`."""
        cfg = self.config
        s = cfg.startup_steps
        if s == 0:
            return np.zeros((0, self.problem.dimension))
        refinement = cfg.startup_refinement or int(math.ceil(1.0 / cfg.tau))
        refinement = max(1, min(refinement, cfg.max_startup_substeps // s))
        fine = SolverConfig(
            tau=cfg.tau / refinement,
            T=s * cfg.tau,
            method="direct",
            kind=InterpKind.LINEAR,
            m=1,
            newton_tol=cfg.newton_tol,
            newton_maxiter=cfg.newton_maxiter,
            startup=False,
            eps0=cfg.eps0,
        )
        self.logger.info(f"Startup: {s} values from {s * refinement} steps of size {fine.tau:.3e}.")
        trajectory = CaputoStepper(self.problem, fine, verbose=self.verbose).solve()
        return trajectory.U[refinement : s * refinement + 1 : refinement]

    def solve(self) -> Trajectory:
        cfg = self.config
        n_steps = cfg.n_steps
        d = self.problem.dimension
        t = cfg.tau * np.arange(n_steps + 1)
        U = np.empty((n_steps + 1, d))
        U[0] = self.problem.u0
        with Timer() as timer:
            head = self.startup_values()
            s = head.shape[0]
            U[1 : s + 1] = head
            for n in range(s + 1):
                self._push(U[n])
            for n in range(s + 1, n_steps + 1):
                known, coeff = self._affine()
                known = known - self.problem.initial_term(t[n])
                try:
                    U[n], _, _ = self.newton_step(known, coeff, t[n], U[n - 1], n)
                except StepFailure:
                    self.logger.error(f"{self.problem.name}: giving up at step {n} of {n_steps}.")
                    raise
                self._push(U[n])
        stats = {
            "steps": float(n_steps),
            "startup_steps": float(s),
            "newton_iterations": float(self.newton_iterations),
            "max_residual": self.max_residual,
            "wall_time": timer.elapsed,
            "active_memory": float(self.active_memory()),
        }
        self.logger.info(
            f"{self.problem.name}: {n_steps} steps ({cfg.method}) in {timer.elapsed:.3f}s, "
            f"max residual {self.max_residual:.2e}."
        )
        return Trajectory(t=t, U=U, labels=list(self.problem.labels), stats=stats)

    def active_memory(self) -> int:
        total = sum(op.active_memory() for op in self.operators)
        for op in self.operators:
            if op.corrections is not None:
                total += op.corrections.active_memory()
        return total


def solve_scalar_fde(
    problem: FdeProblem, config: SolverConfig, T: Optional[float] = None, verbose: bool = False
) -> Trajectory:
    """Solve a one-component Caputo problem up to T (default config.T)."""
    if problem.dimension != 1:
        raise DomainError(f"solve_scalar_fde needs one component, got {problem.dimension}.")
    return solve_fde_system(problem, config, T=T, verbose=verbose)


def solve_fde_system(
    problem: FdeProblem, config: SolverConfig, T: Optional[float] = None, verbose: bool = False
) -> Trajectory:
    """Solve a d-component Caputo problem with per-component orders."""
    if T is not None and T != config.T:
        config = replace(config, T=T)
    return CaputoStepper(problem, config, verbose=verbose).solve()
