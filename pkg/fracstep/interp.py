"""Convolution weights of piecewise linear and quadratic interpolants against
the kernel k_alpha(t) = t^(alpha - 1) / Gamma(alpha).

The interval [t_j, t_{j+1}] at distance i = n - 1 - j from t_n contributes
b1 u_j + b2 u_{j+1} (+ b3 u_{j+2} for the quadratic stencil); the last
interval [t_{n-1}, t_n] contributes d0 u_{n-2} + d1 u_{n-1} + d2 u_n.
All weights use 1/Gamma through rgamma, so alpha = -1 (first derivative)
degenerates to backward differences instead of dividing by zero.
"""
import math
from typing import Tuple

import numpy as np

from fracstep.entity import InterpKind
from fracstep.exceptions import DomainError
from fracstep.specfun import rgamma

# Distances from here on use the binomial series of (i + y)^(alpha - 1), the
# closed form loses about 2 log10(i) digits.
_SERIES_FROM = 4
_SERIES_TERMS = 40


def ell_coeff(alpha: float, j: int) -> float:
    """((j+1)^alpha - j^alpha) / alpha, the integral of x^(alpha - 1) over [j, j + 1]."""
    if alpha == 0:
        raise DomainError("ell_coeff is undefined for alpha = 0.")
    if j < 0:
        raise DomainError(f"Distance must be nonnegative, got {j}.")
    if j == 0:
        return 1.0 / alpha
    return j**alpha * math.expm1(alpha * math.log1p(1.0 / j)) / alpha


def _closed_moments(alpha: float, i: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """J_k = int_0^1 (i + y)^(alpha - 1) y^k dy via ell coefficients."""
    i = i.astype(float)
    ell = [
        np.power(i, a) * np.expm1(a * np.log1p(1.0 / i)) / a if a != 0 else np.log1p(1.0 / i)
        for a in (alpha, alpha + 1.0, alpha + 2.0)
    ]
    j0 = ell[0]
    j1 = ell[1] - i * ell[0]
    j2 = ell[2] - 2.0 * i * ell[1] + i * i * ell[0]
    return j0, j1, j2


def _series_moments(alpha: float, i: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """J_k = i^(alpha-1) sum_m C(alpha-1, m) i^(-m) / (k + m + 1)."""
    i = i.astype(float)
    beta = alpha - 1.0
    sums = [np.zeros_like(i) for _ in range(3)]
    binom = 1.0
    inv_power = np.ones_like(i)
    for m in range(_SERIES_TERMS):
        term = binom * inv_power
        for k in range(3):
            sums[k] += term / (k + m + 1)
        binom *= (beta - m) / (m + 1)
        inv_power = inv_power / i
    scale = np.power(i, beta)
    return sums[0] * scale, sums[1] * scale, sums[2] * scale


def interval_moments(alpha: float, distances) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Moments J_0, J_1, J_2 for an array of distances i >= 1."""
    i = np.atleast_1d(np.asarray(distances))
    if np.any(i < 1):
        raise DomainError("History distances start at 1.")
    j0, j1, j2 = (np.empty(i.shape) for _ in range(3))
    near = i < _SERIES_FROM
    for mask, fn in ((near, _closed_moments), (~near, _series_moments)):
        if np.any(mask):
            m0, m1, m2 = fn(alpha, i[mask])
            j0[mask], j1[mask], j2[mask] = m0, m1, m2
    return j0, j1, j2


def _kernel_scale(alpha: float, tau: float) -> float:
    if alpha == 0:
        raise DomainError("Kernel order 0 is the identity, not a convolution.")
    if tau <= 0:
        raise DomainError(f"Stepsize must be positive, got {tau}.")
    return tau**alpha * rgamma(alpha)


def quad_history_weights(alpha: float, tau: float, j: int) -> Tuple[float, float, float]:
    """(b1, b2, b3) of the quadratic stencil at distance j >= 1.

    Equal to tau^alpha / (2 Gamma(alpha)) [l2 - (2j-1) l1 + j(j-1) l0] and its
    two companions, with l_k = ell_coeff(alpha + k, j).
    """
    c = _kernel_scale(alpha, tau)
    j0, j1, j2 = (float(v[0]) for v in interval_moments(alpha, [j]))
    return 0.5 * c * (j2 + j1), c * (j0 - j2), 0.5 * c * (j2 - j1)


def linear_history_weights(alpha: float, tau: float, j: int) -> Tuple[float, float]:
    """(b1, b2) of the linear stencil at distance j >= 1."""
    c = _kernel_scale(alpha, tau)
    j0, j1, _ = (float(v[0]) for v in interval_moments(alpha, [j]))
    return c * j1, c * (j0 - j1)


def history_weights(alpha: float, tau: float, distances, kind: InterpKind) -> np.ndarray:
    """Weights for many distances at once.

    Returns:
        np.ndarray: Shape (3, len(distances)); row k multiplies u_{j+k}. The
            third row is zero for the linear kind.
    """
    c = _kernel_scale(alpha, tau)
    j0, j1, j2 = interval_moments(alpha, distances)
    if InterpKind.parse(kind) is InterpKind.QUADRATIC:
        return c * np.vstack([0.5 * (j2 + j1), j0 - j2, 0.5 * (j2 - j1)])
    return c * np.vstack([j1, j0 - j1, np.zeros_like(j0)])


def local_weights(
    alpha: float, tau: float, kind: InterpKind, literal: bool = False
) -> Tuple[float, float, float]:
    """Weights (d0, d1, d2) of (u_{n-2}, u_{n-1}, u_n) on the last interval.

    Args:
        alpha (float): Kernel order.
        tau (float): Stepsize.
        kind (InterpKind): Interpolation kind.
        literal (bool): Linear kind only. Return the increment form
            tau^alpha / Gamma(2 + alpha) (u_n - u_{n-1}), which does not
            reproduce constants; kept for comparison studies.
    """
    kind = InterpKind.parse(kind)
    if alpha == 0:
        raise DomainError("Kernel order 0 is the identity, not a convolution.")
    scale = tau**alpha
    if kind is InterpKind.QUADRATIC:
        r3 = rgamma(alpha + 3)
        return (
            -alpha * scale * r3 / 2,
            alpha * (3 + alpha) * scale * r3,
            (4 + alpha) * scale * r3 / 2,
        )
    r2 = rgamma(alpha + 2)
    if literal:
        return 0.0, -scale * r2, scale * r2
    return 0.0, scale * (rgamma(alpha + 1) - r2), scale * r2


class WeightTable:
    """History weights cached by distance, grown on demand.

    `b` has shape (3, capacity + 1); column i holds the weights at distance i
    (column 0 is unused).
    """

    def __init__(self, alpha: float, tau: float, kind: InterpKind):
        self.alpha = alpha
        self.tau = tau
        self.kind = InterpKind.parse(kind)
        self.local = local_weights(alpha, tau, self.kind)
        self.b = np.zeros((3, 1))

    @property
    def capacity(self) -> int:
        return self.b.shape[1] - 1

    def ensure(self, distance: int) -> None:
        if distance <= self.capacity:
            return
        new_capacity = max(distance, 2 * self.capacity, 64)
        extra = history_weights(
            self.alpha, self.tau, np.arange(self.capacity + 1, new_capacity + 1), self.kind
        )
        self.b = np.hstack([self.b, extra])
