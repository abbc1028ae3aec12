"""The L1 scheme for Caputo problems on the graded mesh t_j = T (j / M)^r.

Used as a baseline for the corrected fast method. The Caputo derivative at
t_n is replaced by

    sum_{k=1}^{n} a_{n,k} (u_k - u_{k-1}),
    a_{n,k} = [(t_n - t_{k-1})^(1-alpha) - (t_n - t_k)^(1-alpha)] / (Gamma(2-alpha) (t_k - t_{k-1})),

which is exact for piecewise linear u. The work is O(M^2).
"""
import numpy as np

from fracstep.exceptions import DomainError
from fracstep.solver.base import BaseSolver, Trajectory
from fracstep.solver.problems import FdeProblem
from fracstep.specfun import rgamma
from fracstep.utils.utils import Timer, env_float, env_int


def graded_mesh(r: float, M: int, T: float = 1.0) -> np.ndarray:
    """Nodes T (j / M)^r for j = 0..M."""
    if r < 1:
        raise DomainError(f"Grading exponent must be at least 1, got {r}.")
    if M < 1:
        raise DomainError(f"Step count must be positive, got {M}.")
    if T <= 0:
        raise DomainError(f"Final time must be positive, got {T}.")
    return T * (np.arange(M + 1) / M) ** r


def l1_weights(alpha: float, t: np.ndarray, n: int) -> np.ndarray:
    """a_{n,1..n} on the mesh t."""
    steps = np.diff(t[: n + 1])
    if alpha == 1.0:
        weights = np.zeros(n)
        weights[-1] = 1.0 / steps[-1]
        return weights
    gap = t[n] - t[: n + 1]
    powered = gap ** (1.0 - alpha)
    return (powered[:-1] - powered[1:]) * rgamma(2.0 - alpha) / steps


class GradedL1Solver(BaseSolver):
    """L1 time stepping on a graded mesh, one Newton solve per step."""

    def __init__(
        self,
        problem: FdeProblem,
        r: float,
        M: int,
        T: float = 1.0,
        newton_tol: float = 1e-12,
        newton_maxiter: int = 50,
        verbose: bool = False,
        **kwargs,
    ):
        super().__init__(
            problem,
            newton_tol=newton_tol,
            newton_maxiter=newton_maxiter,
            verbose=verbose,
            **kwargs,
        )
        self.r = r
        self.M = M
        self.T = T
        self.t = graded_mesh(r, M, T)

    def solve(self) -> Trajectory:
        t = self.t
        d = self.problem.dimension
        orders = self.problem.orders
        U = np.empty((self.M + 1, d))
        U[0] = self.problem.u0
        with Timer() as timer:
            for n in range(1, self.M + 1):
                increments = np.diff(U[:n], axis=0)
                known = np.empty(d)
                coeff = np.empty(d)
                for k in range(d):
                    a = l1_weights(float(orders[k]), t, n)
                    known[k] = a[:-1] @ increments[:, k] - a[-1] * U[n - 1, k]
                    coeff[k] = a[-1]
                U[n], _, _ = self.newton_step(known, coeff, t[n], U[n - 1], n)
        self.logger.info(
            f"{self.problem.name}: graded mesh r={self.r}, M={self.M} in {timer.elapsed:.3f}s."
        )
        stats = {
            "steps": float(self.M),
            "newton_iterations": float(self.newton_iterations),
            "max_residual": self.max_residual,
            "wall_time": timer.elapsed,
        }
        return Trajectory(t=t, U=U, labels=list(self.problem.labels), stats=stats)


def graded_l1_solve(problem: FdeProblem, r: float, M: int, T: float = 1.0, verbose: bool = False) -> Trajectory:
    """Solve `problem` with the L1 scheme on t_j = T (j / M)^r."""
    return GradedL1Solver(
        problem,
        r,
        M,
        T=T,
        newton_tol=env_float("FRACSTEP_NEWTON_TOL", 1e-12),
        newton_maxiter=env_int("FRACSTEP_NEWTON_MAXITER", 50),
        verbose=verbose,
    ).solve()
