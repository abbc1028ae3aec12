"""Special functions: Gamma, generalized Laguerre polynomials and the
Mittag-Leffler function E_alpha on the real line.
"""
import math
from typing import Tuple

import numpy as np
from scipy import integrate, special

from fracstep.exceptions import AccuracyFailure, DomainError

# From this argument upward (z >= -1) the power series of E_alpha is used;
# it has no cancellation there whatever alpha is. Below it the integral
# representation takes over.
_SERIES_LOWER_LIMIT = -1.0
_ML_RTOL = 1e-13


def _is_pole(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


def gamma(x: float) -> float:
    """Gamma function.

    Raises:
        DomainError: at the poles 0, -1, -2, ...
    """
    if _is_pole(x):
        raise DomainError(f"Gamma has a pole at {x}.")
    return float(special.gamma(x))


def rgamma(x: float) -> float:
    """Reciprocal Gamma function, zero at the poles of Gamma."""
    return float(special.rgamma(x))


def laguerre_eval(a: float, n: int, x):
    """Generalized Laguerre polynomial L_n^(a)(x) by the three-term recurrence.

    `x` may be a scalar or an array; the result has the same shape.
    """
    if a <= -1:
        raise DomainError(f"Laguerre parameter must exceed -1, got {a}.")
    if n < 0:
        raise DomainError(f"Degree must be nonnegative, got {n}.")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + a - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + a - x) * cur - (k + a) * prev) / (k + 1)
    return cur if cur.ndim else float(cur)


def laguerre_pair_scaled(a: float, n: int, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """L_n^(a)(x) and L_{n-1}^(a)(x) with a common scale factor.

    Returns (p_n, p_{n-1}, log_scale) such that L_k(x) = p_k * exp(log_scale).
    The rescaling keeps the recurrence finite for large n and x.
    """
    x = np.asarray(x, dtype=float)
    log_scale = np.zeros_like(x)
    prev = np.ones_like(x)
    cur = 1.0 + a - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + a - x) * cur - (k + a) * prev) / (k + 1)
        size = np.maximum(np.abs(cur), np.abs(prev))
        size = np.where(size > 0, size, 1.0)
        prev = prev / size
        cur = cur / size
        log_scale += np.log(size)
    return cur, prev, log_scale


def _ml_series(alpha: float, z: float) -> float:
    """Power series sum_k z^k / Gamma(alpha k + 1), for z >= -1 or modest z > 0."""
    total = 0.0
    k = 0
    power = 1.0
    while k < 100000:
        term = power * rgamma(alpha * k + 1)
        total += term
        # Terms decrease once Gamma outgrows |z|^k; stop when they are negligible.
        if k > 2 and abs(term) <= 1e-17 * max(abs(total), 1e-300) and abs(z) ** (1 / alpha) < alpha * k:
            return total
        power *= z
        k += 1
    raise AccuracyFailure(
        f"Mittag-Leffler series for alpha={alpha}, z={z} did not converge",
        estimate=abs(term),
    )


def _ml_negative_integral(alpha: float, x: float) -> float:
    """E_alpha(-x), x > 0, from the real inverse-Laplace representation.

    The Bromwich contour of s^(alpha - 1) / (s^alpha + x) is folded onto the
    negative real axis; with r the radius on that axis and w = r^alpha the
    integrand is smooth on [0, inf):

        E_alpha(-x) = sin(alpha pi)/(alpha pi)
            * int_0^inf exp(-w^(1/alpha)) x / (x^2 + 2 w x cos(alpha pi) + w^2) dw
    """
    c = math.cos(alpha * math.pi)
    inv_alpha = 1.0 / alpha

    def integrand(w: float) -> float:
        return math.exp(-(w**inv_alpha)) * x / (x * x + 2.0 * w * x * c + w * w)

    # exp(-w^(1/alpha)) < e^-60 beyond the cutoff; the denominator peaks at
    # w = -x cos(alpha pi) when alpha > 1/2.
    upper = 60.0**alpha
    points = [p for p in (x, -x * c) if 0 < p < upper]
    integral, error = integrate.quad(
        integrand,
        0.0,
        upper,
        points=points or None,
        epsabs=0.0,
        epsrel=_ML_RTOL,
        limit=400,
    )
    factor = math.sin(alpha * math.pi) / (alpha * math.pi)
    value = factor * integral
    estimate = factor * error / abs(value) if value else float("inf")
    if estimate > 1e-12:
        raise AccuracyFailure(
            f"Mittag-Leffler integral for alpha={alpha}, z={-x} lost accuracy",
            estimate=estimate,
        )
    return value


def mittag_leffler(alpha: float, z: float) -> float:
    """One-parameter Mittag-Leffler function E_alpha(z) for real z, 0 < alpha <= 1.

    Raises:
        DomainError: alpha outside (0, 1].
        AccuracyFailure: the requested relative accuracy 1e-12 was not reached.
    """
    if not 0 < alpha <= 1:
        raise DomainError(f"Mittag-Leffler order must lie in (0, 1], got {alpha}.")
    if alpha == 1:
        return math.exp(z)
    if z >= _SERIES_LOWER_LIMIT:
        return _ml_series(alpha, z)
    return _ml_negative_integral(alpha, -z)
