"""Configuration, trajectories and the Newton step shared by the solvers.
"""
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from fracstep.convolution.corrections import check_sigmas
from fracstep.entity import FastParams, InterpKind
from fracstep.exceptions import DomainError, StepFailure
from fracstep.solver.problems import FdeProblem
from fracstep.utils.utils import Logger, env_float, env_int, write_csv

METHODS = ("fast", "direct")


@dataclass
class SolverConfig:
    """Time-stepping parameters.

    Args:
        tau (float): Stepsize.
        T (float): Final time.
        method (str): "fast" or "direct" history evaluation.
        delta_T (Optional[float]): Memory length of the local part. Defaults to tau.
        B (int): Level basis of the fast history.
        eps (float): Level precision of the fast history.
        eps0 (float): Truncation precision, FRACSTEP_EPS0 or 1e-16.
        kind (InterpKind): Interpolation of the solution.
        m (int): Number of correction terms.
        sigmas (Optional[Sequence[float]]): Correction exponents, k * alpha by default.
        newton_tol (float): Scaled residual accepted by Newton, FRACSTEP_NEWTON_TOL or 1e-12.
        newton_maxiter (int): Newton iteration cap, FRACSTEP_NEWTON_MAXITER or 50.
        startup (bool): Compute the first values on a refined grid. Without
            it the scheme must be able to start at step 1 on its own.
        startup_refinement (Optional[int]): Substeps per step of the startup
            grid. Defaults to ceil(1 / tau), i.e. a startup stepsize of about tau^2.
        max_startup_substeps (int): Cap on the total startup substeps.
    """

    tau: float
    T: float
    method: str = "fast"
    delta_T: Optional[float] = None
    B: int = 5
    eps: float = 1e-10
    eps0: float = field(default_factory=lambda: env_float("FRACSTEP_EPS0", 1e-16))
    kind: InterpKind = InterpKind.QUADRATIC
    m: int = 0
    sigmas: Optional[Sequence[float]] = None
    newton_tol: float = field(default_factory=lambda: env_float("FRACSTEP_NEWTON_TOL", 1e-12))
    newton_maxiter: int = field(default_factory=lambda: env_int("FRACSTEP_NEWTON_MAXITER", 50))
    startup: bool = True
    startup_refinement: Optional[int] = None
    max_startup_substeps: int = 1_000_000

    def __post_init__(self):
        self.kind = InterpKind.parse(self.kind)
        if self.method not in METHODS:
            raise DomainError(f"Unknown method {self.method!r}, expected one of {METHODS}.")
        if self.tau <= 0 or self.T <= 0:
            raise DomainError(f"Stepsize and final time must be positive, got {self.tau}, {self.T}.")
        if self.newton_tol <= 0:
            raise DomainError(f"Newton tolerance must be positive, got {self.newton_tol}.")
        if self.newton_maxiter < 1:
            raise DomainError(f"Newton needs at least one iteration, got {self.newton_maxiter}.")
        if self.m < 0:
            raise DomainError(f"Correction count must be nonnegative, got {self.m}.")
        if self.sigmas is not None:
            self.sigmas = check_sigmas(self.sigmas)
            if len(self.sigmas) != self.m:
                raise DomainError(f"{len(self.sigmas)} exponents given for m = {self.m}.")
        else:
            check_sigmas([float(k) for k in range(1, self.m + 1)])
        if not self.startup and self.kind is InterpKind.QUADRATIC:
            raise DomainError("Quadratic interpolation cannot take its first step without startup values.")
        if self.delta_T is None:
            self.delta_T = self.tau
        self.n0  # validates delta_T

    @property
    def n0(self) -> int:
        assert self.delta_T is not None
        n0 = round(self.delta_T / self.tau)
        if n0 < 1 or abs(n0 * self.tau - self.delta_T) > 1e-9 * max(1.0, self.delta_T):
            raise DomainError(
                f"Memory length {self.delta_T} is not a positive multiple of the stepsize {self.tau}."
            )
        return n0

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.T / self.tau - 1e-9))

    @property
    def startup_steps(self) -> int:
        """Number of values U_1..U_s taken from the startup solve."""
        if not self.startup:
            return 0
        if self.kind is InterpKind.QUADRATIC:
            return min(max(self.m, 2), self.n_steps)
        return min(self.m, self.n_steps)

    def correction_exponents(self, order: float) -> List[float]:
        if self.sigmas is not None:
            return list(self.sigmas)
        return [k * order for k in range(1, self.m + 1)]

    def fast_params(self, kernel_order: float) -> FastParams:
        return FastParams(
            alpha=kernel_order,
            tau=self.tau,
            n0=self.n0,
            B=self.B,
            eps=self.eps,
            eps0=self.eps0,
            kind=self.kind,
            horizon=self.n_steps * self.tau,
        )


@dataclass
class Trajectory:
    """Solution values U[n] at t[n], plus run statistics."""

    t: np.ndarray
    U: np.ndarray
    labels: List[str]
    stats: Dict[str, float] = field(default_factory=dict)

    @property
    def final(self) -> np.ndarray:
        return self.U[-1]

    def component(self, k: int) -> np.ndarray:
        return self.U[:, k]

    def max_error(self, exact) -> float:
        """max_n |U_n - u(t_n)| over all components."""
        reference = np.array([exact(t) for t in self.t])
        return float(np.max(np.abs(self.U - reference.reshape(self.U.shape))))

    def rows(self) -> List[List[object]]:
        return [[n, float(t)] + [float(v) for v in u] for n, (t, u) in enumerate(zip(self.t, self.U))]

    def to_csv(self, path: str) -> str:
        return write_csv(path, ["n", "t"] + self.labels, self.rows())


class BaseSolver(ABC):
    """A concrete solver marches an FdeProblem and returns a Trajectory.

    Every step has the affine form known + coeff * U_n - init = f(U_n, t_n),
    solved here by Newton's method.
    """

    def __init__(
        self,
        problem: FdeProblem,
        newton_tol: float = 1e-12,
        newton_maxiter: int = 50,
        verbose: bool = False,
        **kwargs,
    ):
        self.problem = problem
        self.newton_tol = newton_tol
        self.newton_maxiter = newton_maxiter
        self.verbose = verbose
        self.logger = Logger(logger_name=__name__, verbose=verbose)
        self.newton_iterations = 0
        self.max_residual = 0.0
        self.kwargs = kwargs

    @abstractmethod
    def solve(self) -> Trajectory:
        raise NotImplementedError

    def newton_step(
        self,
        known: np.ndarray,
        coeff: np.ndarray,
        t: float,
        guess: np.ndarray,
        step: int,
    ) -> Tuple[np.ndarray, int, float]:
        """Solve known + coeff * U - f(U, t) = 0.

        The residual is measured relative to max(1, |coeff * U|).

        Returns:
            Tuple[np.ndarray, int, float]: The solution, the iterations used and
                the accepted residual.

        Raises:
            StepFailure: No convergence within newton_maxiter iterations.
        """
        U = np.array(guess, dtype=float)
        residual = float("inf")
        for iteration in range(self.newton_maxiter + 1):
            g = known + coeff * U - self.problem.f(U, t)
            if not np.all(np.isfinite(g)):
                break
            residual = float(np.max(np.abs(g)) / max(1.0, float(np.max(np.abs(coeff * U)))))
            if residual <= self.newton_tol:
                self.newton_iterations += iteration
                self.max_residual = max(self.max_residual, residual)
                return U, iteration, residual
            if iteration == self.newton_maxiter:
                break
            jac = np.diag(coeff) - self.problem.jacobian_at(U, t)
            try:
                U = U - np.linalg.solve(jac, g)
            except np.linalg.LinAlgError as e:
                raise StepFailure(step, t, residual, iteration, detail=f"singular Jacobian: {e}")
        self.logger.error(f"Newton failed at step {step}, t={t}, residual {residual:.3e}.")
        raise StepFailure(step, t, residual, self.newton_maxiter)
