"""Fractional initial value problems in Caputo form.

    D^{alpha_k} u_k(t) = f_k(u(t), t),  u(0) = u0,  0 < alpha_k <= 1.
"""
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from fracstep.exceptions import DomainError
from fracstep.specfun import mittag_leffler, rgamma

Rhs = Callable[[np.ndarray, float], np.ndarray]

_FD_STEP = 1e-7


@dataclass
class FdeProblem:
    """A d-dimensional Caputo problem.

    Args:
        orders: Fractional order per component (a scalar is broadcast).
        u0: Initial state (scalar for d = 1).
        rhs: f(u, t) returning a d-vector.
        jacobian: df/du as a d x d matrix. Defaults to a finite-difference
            approximation with step 1e-7 (1 + |u_k|).
        name: Used in reports.
        exact: Exact solution t -> d-vector, when known.
        labels: Column names of the components.
    """

    orders: np.ndarray
    u0: np.ndarray
    rhs: Rhs
    jacobian: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    name: str = "fde"
    exact: Optional[Callable[[float], np.ndarray]] = None
    labels: List[str] = field(default_factory=list)

    def __post_init__(self):
        self.u0 = np.atleast_1d(np.asarray(self.u0, dtype=float))
        orders = np.atleast_1d(np.asarray(self.orders, dtype=float))
        if orders.shape[0] == 1 and self.u0.shape[0] > 1:
            orders = np.full(self.u0.shape[0], orders[0])
        if orders.shape != self.u0.shape:
            raise DomainError(f"{orders.shape[0]} orders given for {self.u0.shape[0]} components.")
        if np.any(orders <= 0) or np.any(orders > 1):
            raise DomainError(f"Fractional orders must lie in (0, 1], got {orders.tolist()}.")
        self.orders = orders
        if not self.labels:
            defaults = {1: ["U"], 3: ["U", "V", "W"]}
            self.labels = defaults.get(self.dimension, [f"U{k}" for k in range(self.dimension)])

    @property
    def dimension(self) -> int:
        return int(self.u0.shape[0])

    def f(self, u: np.ndarray, t: float) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.rhs(u, t), dtype=float))

    def jacobian_at(self, u: np.ndarray, t: float) -> np.ndarray:
        if self.jacobian is not None:
            return np.atleast_2d(np.asarray(self.jacobian(u, t), dtype=float))
        base = self.f(u, t)
        jac = np.empty((self.dimension, self.dimension))
        for k in range(self.dimension):
            h = _FD_STEP * (1.0 + abs(u[k]))
            shifted = u.copy()
            shifted[k] += h
            jac[:, k] = (self.f(shifted, t) - base) / h
        return jac

    def initial_term(self, t: float) -> np.ndarray:
        """u0 t^(-alpha) / Gamma(1 - alpha), the Caputo minus Riemann-Liouville offset."""
        return np.array(
            [u * t ** (-a) * rgamma(1.0 - a) for u, a in zip(self.u0, self.orders)]
        )


def exact_case1(alpha: float, A: float, t: float) -> float:
    """E_alpha(-A t^alpha), the solution of D^alpha u = -A u, u(0) = 1."""
    if A < 0:
        raise DomainError(f"Rate must be nonnegative, got {A}.")
    if t == 0:
        return 1.0
    return mittag_leffler(alpha, -A * t**alpha)


def case1(alpha: float, A: float = 1.0) -> FdeProblem:
    """D^alpha u = -A u, u(0) = 1."""
    return FdeProblem(
        orders=alpha,
        u0=1.0,
        rhs=lambda u, t: -A * u,
        jacobian=lambda u, t: np.array([[-A]]),
        name="case1",
        exact=lambda t: np.array([exact_case1(alpha, A, t)]),
    )


def case2(alpha: float) -> FdeProblem:
    """D^alpha u = -u + u (1 - u^2) = -u^3, u(0) = 1."""
    return FdeProblem(
        orders=alpha,
        u0=1.0,
        rhs=lambda u, t: -u + u * (1.0 - u * u),
        jacobian=lambda u, t: np.diag(-3.0 * u * u),
        name="case2",
    )


def linear_growth(alpha: float) -> FdeProblem:
    """D^alpha u = t^(1 - alpha) / Gamma(2 - alpha), u(0) = 0; exact u = t."""
    return FdeProblem(
        orders=alpha,
        u0=0.0,
        rhs=lambda u, t: np.array([t ** (1.0 - alpha) * rgamma(2.0 - alpha)]),
        jacobian=lambda u, t: np.zeros((1, 1)),
        name="linear_growth",
        exact=lambda t: np.array([t]),
    )


def linear_diagonal(orders: Sequence[float], rates: Sequence[float], u0: Sequence[float]) -> FdeProblem:
    """Decoupled D^alpha_k u_k = -A_k u_k."""
    rates_arr = np.asarray(rates, dtype=float)
    orders_arr = np.asarray(orders, dtype=float)

    def exact(t: float) -> np.ndarray:
        return np.asarray(u0, dtype=float) * np.array(
            [exact_case1(a, r, t) for a, r in zip(orders_arr, rates_arr)]
        )

    return FdeProblem(
        orders=orders_arr,
        u0=u0,
        rhs=lambda u, t: -rates_arr * u,
        jacobian=lambda u, t: np.diag(-rates_arr),
        name="linear_diagonal",
        exact=exact,
    )


def lorenz(
    orders: Sequence[float] = (0.9, 0.9, 0.9),
    c1: float = 0.25,
    c2: float = 1.0,
    c3: float = 0.25,
    u0: Sequence[float] = (2.0, 0.9, 0.2),
) -> FdeProblem:
    """The dissipative fractional Lorenz-type system

        D u = w + (v - c1) u,  D v = 1 - c2 v - u^2,  D w = -u - c3 w.
    """

    def rhs(x: np.ndarray, t: float) -> np.ndarray:
        u, v, w = x
        return np.array([w + (v - c1) * u, 1.0 - c2 * v - u * u, -u - c3 * w])

    def jacobian(x: np.ndarray, t: float) -> np.ndarray:
        u, v, _ = x
        return np.array([[v - c1, u, 1.0], [-2.0 * u, -c2, 0.0], [-1.0, 0.0, -c3]])

    return FdeProblem(orders=orders, u0=u0, rhs=rhs, jacobian=jacobian, name="lorenz")


PROBLEMS = {
    "case1": case1,
    "case2": case2,
}


def squared_norm(U: np.ndarray) -> np.ndarray:
    """Row-wise sum of squares of a trajectory."""
    return np.sum(np.asarray(U) ** 2, axis=-1)
