"""Generalized Gauss-Laguerre rules for the weight lambda^a exp(-T lambda).

A rule is built once for T = 1 and then scaled. Nodes come from the
symmetric tridiagonal Jacobi matrix of the Laguerre recurrence and are polished
by Newton steps on L_{N+1}^(a); weights use the closed formula in log-space,
which keeps full relative accuracy for the small tail weights that the
truncation count depends on.
"""
import functools
import math
from typing import Optional

import numpy as np
from scipy import linalg

from fracstep.entity import QuadratureRule
from fracstep.exceptions import DomainError, NumericalFailure
from fracstep.specfun import laguerre_pair_scaled
from fracstep.utils.utils import write_csv

MAX_ORDER = 2048
_NEWTON_POLISH_STEPS = 2


def _check_args(a: float, N: int) -> None:
    if a <= -1:
        raise DomainError(f"Weight parameter must exceed -1, got {a}.")
    if int(N) != N or N < 0:
        raise DomainError(f"Rule order must be a nonnegative integer, got {N}.")
    if N > MAX_ORDER:
        raise DomainError(f"Rule order {N} exceeds the supported maximum {MAX_ORDER}.")


def _jacobi_eigen(a: float, N: int):
    if N == 0:
        return np.array([a + 1.0]), np.ones((1, 1))
    k = np.arange(N + 1, dtype=float)
    diagonal = 2.0 * k + a + 1.0
    off_diagonal = np.sqrt(k[1:] * (k[1:] + a))
    try:
        return linalg.eigh_tridiagonal(diagonal, off_diagonal)
    except linalg.LinAlgError as e:
        raise NumericalFailure(
            f"Eigen decomposition of the Laguerre Jacobi matrix failed (a={a}, N={N}): {e}"
        )


def _polish_nodes(a: float, N: int, nodes: np.ndarray) -> np.ndarray:
    """Newton steps on L_{N+1}^(a), using x L_n' = n L_n - (n + a) L_{n-1}."""
    n = N + 1
    polished = nodes.copy()
    for _ in range(_NEWTON_POLISH_STEPS):
        p_n, p_prev, _ = laguerre_pair_scaled(a, n, polished)
        denominator = n * p_n - (n + a) * p_prev
        polished = polished - polished * p_n / denominator
    if (
        not np.all(np.isfinite(polished))
        or np.any(polished <= 0)
        or np.any(np.diff(polished) <= 0)
        or np.max(np.abs(polished - nodes) / nodes) > 1e-6
    ):
        return nodes
    return polished


def _formula_weights(a: float, N: int, nodes: np.ndarray) -> np.ndarray:
    """w_j = Gamma(N+a+1) x_j / ((N+1)! (N+a+1) L_N^(a)(x_j)^2), evaluated in log-space."""
    _, p_prev, log_scale = laguerre_pair_scaled(a, N + 1, nodes)
    log_weights = (
        math.lgamma(N + a + 1)
        + np.log(nodes)
        - math.log(N + a + 1)
        - math.lgamma(N + 2)
        - 2.0 * (np.log(np.abs(p_prev)) + log_scale)
    )
    return np.exp(log_weights)


def _eigen_weights(a: float, vectors: np.ndarray) -> np.ndarray:
    return math.gamma(a + 1) * vectors[0, :] ** 2


@functools.lru_cache(maxsize=256)
def _cached_rule(a: float, N: int, method: str) -> QuadratureRule:
    values, vectors = _jacobi_eigen(a, N)
    if method == "eigen":
        nodes = values
        weights = _eigen_weights(a, vectors)
    else:
        nodes = _polish_nodes(a, N, values)
        weights = _formula_weights(a, N, nodes)
    if not np.all(np.isfinite(weights)):
        raise NumericalFailure(f"Non-finite Gauss-Laguerre weights for a={a}, N={N}.")
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(
        weight_param=a,
        scale=1.0,
        order=N,
        nodes=nodes,
        weights=weights,
        truncated_to=N + 1,
    )


def gauss_laguerre_rule(a: float, N: int, method: str = "formula") -> QuadratureRule:
    """The (N+1)-point generalized Gauss-Laguerre rule for lambda^a exp(-lambda).

    Args:
        a (float): The weight parameter, > -1.
        N (int): The rule order; the rule has N + 1 points, the roots of L_{N+1}^(a).
        method (str): "formula" (default) for polished nodes with closed-form
            weights, "eigen" for raw Golub-Welsch nodes and eigenvector weights.

    Returns:
        QuadratureRule: The rule with scale 1. Weights far out in the tail may
            underflow to 0 for large N.
    """
    _check_args(a, N)
    if method not in ("formula", "eigen"):
        raise DomainError(f"Unknown rule construction method {method!r}.")
    return _cached_rule(float(a), int(N), method)


def scale_rule(rule: QuadratureRule, T: float) -> QuadratureRule:
    """Rescale a unit rule to the weight lambda^a exp(-T lambda)."""
    if rule.scale != 1.0:
        raise DomainError(f"Only unit-scale rules can be scaled, got scale {rule.scale}.")
    if T <= 0:
        raise DomainError(f"Scale must be positive, got {T}.")
    if T == 1.0:
        return rule
    return QuadratureRule(
        weight_param=rule.weight_param,
        scale=float(T),
        order=rule.order,
        nodes=rule.nodes / T,
        weights=rule.weights * T ** (-rule.weight_param - 1.0),
        truncated_to=rule.truncated_to,
    )


def truncate(rule: QuadratureRule, q: int) -> QuadratureRule:
    """Keep the first q points of a rule."""
    if q < 1 or q > len(rule):
        raise DomainError(f"Cannot keep {q} of {len(rule)} points.")
    if q == len(rule):
        return rule
    return QuadratureRule(
        weight_param=rule.weight_param,
        scale=rule.scale,
        order=rule.order,
        nodes=rule.nodes[:q],
        weights=rule.weights[:q],
        truncated_to=q,
    )


def truncation_count(a: float, N: int, eps0: float) -> int:
    """Number of leading points of an order-N rule whose weights matter at eps0.

    Returns min(N, ceil((2/pi) sqrt((N+1) ln((N+1)^a / eps0))) - 1) + 1. Here `a`
    is the weight parameter of the rule; a convolution of kernel order alpha
    uses a = -alpha.
    """
    _check_args(a, N)
    if not 0 < eps0 < 1:
        raise DomainError(f"eps0 must lie in (0, 1), got {eps0}.")
    log_argument = a * math.log(N + 1) - math.log(eps0)
    if log_argument <= 0:
        return N + 1
    index = math.ceil(2.0 / math.pi * math.sqrt((N + 1) * log_argument)) - 1
    return min(N, index) + 1


def truncated_rule(a: float, N: int, T: float, eps0: float) -> QuadratureRule:
    """The rule for lambda^a exp(-T lambda) truncated at eps0."""
    rule = scale_rule(gauss_laguerre_rule(a, N), T)
    return truncate(rule, truncation_count(a, N, eps0))


def rule_error_bound(a: float, N: int, t: float, T: float) -> float:
    """T^(-a-1) ((t/T) / (1 + t/T))^(2N): the N-dependent factor of the error
    of an order-N rule applied to exp(-t lambda)."""
    if T <= 0:
        raise DomainError(f"Scale must be positive, got {T}.")
    if t < 0:
        raise DomainError(f"Time must be nonnegative, got {t}.")
    ratio = t / T
    return T ** (-a - 1.0) * (ratio / (1.0 + ratio)) ** (2 * N)


def exponential_error(rule: QuadratureRule, t: float) -> float:
    """Absolute error of the rule on exp(-t lambda) against
    Gamma(a+1) (T+t)^(-a-1)."""
    exact = math.gamma(rule.weight_param + 1.0) * (rule.scale + t) ** (-rule.weight_param - 1.0)
    return abs(rule.apply(lambda x: np.exp(-t * x)) - exact)


def rule_to_csv(rule: QuadratureRule, path: str, header: Optional[list] = None) -> str:
    """Dump a rule as `j,node,weight` rows."""
    return write_csv(path, header or ["j", "node", "weight"], rule.rows())
