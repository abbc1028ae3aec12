"""Starting weights that make a convolution operator exact on t^sigma_k.

For a solution behaving like u_0 + sum_k c_k t^sigma_k near t = 0, the
corrected operator

    D_n u + tau^alpha sum_{j=1}^{m} W_{n,j} (u_j - u_0)

reproduces k_alpha * t^sigma_k at t_n for every k. The weights W_{n,j} do
not depend on tau.
"""
import math
import threading
from collections import OrderedDict
from typing import Callable, List, Sequence, Tuple

import numpy as np

from fracstep.entity import FastParams
from fracstep.exceptions import ConditioningError, DomainError, StateError
from fracstep.specfun import gamma, rgamma
from fracstep.utils.utils import Logger

MAX_CORRECTIONS = 8


def check_sigmas(sigmas: Sequence[float]) -> List[float]:
    """Validate correction exponents and return them in increasing order."""
    values = sorted(float(s) for s in sigmas)
    if len(values) > MAX_CORRECTIONS:
        raise ConditioningError(
            f"{len(values)} correction terms requested, at most {MAX_CORRECTIONS} are supported."
        )
    if any(s <= 0 for s in values):
        raise DomainError(f"Correction exponents must be positive, got {list(sigmas)}.")
    if any(b - a <= 1e-12 * max(1.0, b) for a, b in zip(values, values[1:])):
        raise DomainError(f"Correction exponents must be distinct, got {list(sigmas)}.")
    return values


def default_sigmas(order: float, m: int) -> List[float]:
    """sigma_k = k * order, k = 1..m."""
    return [k * order for k in range(1, m + 1)]


def exact_power_convolution(alpha: float, sigma: float, t: float) -> float:
    """k_alpha * s^sigma at t, i.e. Gamma(sigma+1) / Gamma(sigma+1+alpha) t^(sigma+alpha)."""
    return gamma(sigma + 1.0) * rgamma(sigma + 1.0 + alpha) * t ** (sigma + alpha)


def _solve_starting_system(
    alpha: float,
    tau: float,
    sigmas: Sequence[float],
    n: int,
    base_op: Callable[[float, int], float],
) -> Tuple[np.ndarray, float]:
    m = len(sigmas)
    if m == 0:
        return np.zeros(0), 0.0
    if n < 1:
        raise DomainError(f"Starting weights start at step 1, got {n}.")
    t_n = n * tau
    rhs = np.array(
        [
            (exact_power_convolution(alpha, s, t_n) - base_op(s, n)) / tau ** (alpha + s)
            for s in sigmas
        ]
    )
    j = np.arange(1, m + 1, dtype=float)
    system = np.power.outer(j, sigmas).T
    scale = np.max(np.abs(system), axis=0)
    try:
        scaled = np.linalg.solve(system / scale, rhs)
    except np.linalg.LinAlgError as e:
        raise DomainError(f"Singular starting-weight system at step {n}: {e}")
    W = scaled / scale
    residual = float(np.max(np.abs(system @ W - rhs)) / max(np.max(np.abs(rhs)), 1e-300))
    return W, residual


def starting_weights(
    alpha: float,
    tau: float,
    sigmas: Sequence[float],
    n: int,
    base_op: Callable[[float, int], float],
) -> np.ndarray:
    """Solve sum_j W_{n,j} j^sigma_k = (exact_k - D_n[(j tau)^sigma_k]) / tau^(alpha + sigma_k).

    Args:
        alpha (float): Kernel order.
        tau (float): Stepsize.
        sigmas (Sequence[float]): Correction exponents, at most 8, distinct.
        n (int): The step, >= 1.
        base_op (Callable[[float, int], float]): base_op(sigma, n) returns the
            uncorrected operator at step n applied to the samples (j tau)^sigma.

    Returns:
        np.ndarray: W_{n,1..m}.
    """
    return _solve_starting_system(alpha, tau, check_sigmas(sigmas), n, base_op)[0]


class CorrectionSet:
    """Starting weights W_{n,.} for one kernel order, computed per step and memoised.

    The uncorrected values D_n[(j tau)^sigma_k] come from probe operators of
    the same type as the operator being corrected, fed with the samples of
    t^sigma_k; so a fast operator is corrected against its own approximation.
    One set may be shared by every operator with the same parameters.
    """

    def __init__(
        self,
        params: FastParams,
        sigmas: Sequence[float],
        fast: bool = False,
        cache_size: int = 16,
        verbose: bool = False,
    ):
        self.params = params
        self.alpha = params.alpha
        self.tau = params.tau
        self.sigmas = check_sigmas(sigmas)
        self.fast = fast
        self.cache_size = cache_size
        self.logger = Logger(logger_name=__name__, verbose=verbose)
        self.max_residual = 0.0
        self.last_residual = 0.0
        self._cache: "OrderedDict[int, np.ndarray]" = OrderedDict()
        self._lock = threading.Lock()
        self._probes = [self._make_probe() for _ in self.sigmas]

    @property
    def m(self) -> int:
        return len(self.sigmas)

    def _make_probe(self):
        from fracstep.convolution.direct import DirectConvolution
        from fracstep.convolution.fast import FastConvolution

        cls = FastConvolution if self.fast else DirectConvolution
        return cls(self.params)

    def check_compatible(self, params: FastParams) -> None:
        if not (
            math.isclose(params.alpha, self.alpha, rel_tol=0, abs_tol=1e-15)
            and math.isclose(params.tau, self.tau, rel_tol=1e-15)
            and params.kind is self.params.kind
        ):
            raise DomainError(
                "Correction set was built for a different kernel order, stepsize or interpolation."
            )

    def _probe_value(self, sigma: float, n: int) -> float:
        probe = self._probes[self.sigmas.index(sigma)]
        while probe.n < n:
            probe.push_sample(((probe.n + 1) * self.tau) ** sigma)
        if probe.n == n:
            return probe.evaluate()
        if hasattr(probe, "direct_eval"):
            return probe.direct_eval(n)
        raise StateError(f"Probe has advanced past step {n}; starting weights are sequential.")

    def weights(self, n: int) -> np.ndarray:
        """W_{n,1..m}."""
        if self.m == 0:
            return np.zeros(0)
        with self._lock:
            cached = self._cache.get(n)
            if cached is not None:
                return cached
            W, residual = _solve_starting_system(
                self.alpha, self.tau, self.sigmas, n, self._probe_value
            )
            self.last_residual = residual
            if residual > self.max_residual:
                self.max_residual = residual
                if residual > 1e-8:
                    self.logger.warning(
                        f"Starting weights at step {n} solved with relative residual {residual:.2e}."
                    )
            self._cache[n] = W
            if len(self._cache) > self.cache_size:
                self._cache.popitem(last=False)
            return W

    def active_memory(self) -> int:
        return sum(p.active_memory() for p in self._probes) + self.m * len(self._cache)
