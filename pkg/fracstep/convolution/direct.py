"""Direct O(n) per step evaluation of the interpolated convolution.

Serves as the reference for the fast engine and as the startup and baseline
operator of the solvers.
"""
from typing import Optional, Tuple

import numpy as np

from fracstep.convolution.base import Convolution
from fracstep.entity import FastParams
from fracstep.exceptions import StateError


class DirectConvolution(Convolution):
    """Keeps every sample and sums the weights of all intervals.

    The operator at step n is split at j_n = max(n - n0, 0): intervals
    j >= j_n plus the last-interval weights form the local part, intervals
    j < j_n the history part. The sum does not depend on n0.
    """

    def __init__(self, params: FastParams, corrections=None, verbose: bool = False, **kwargs):
        super().__init__(params, corrections=corrections, verbose=verbose, **kwargs)
        self._samples = np.zeros((0,))

    def _push(self, value: np.ndarray) -> None:
        if self.n >= self._samples.shape[0]:
            capacity = max(64, 2 * self._samples.shape[0])
            grown = np.zeros((capacity,) + value.shape)
            if self.n:
                grown[: self.n] = self._samples[: self.n]
            self._samples = grown
        self._samples[self.n] = value
        self.weights.ensure(self.n)

    def _known_sample(self, j: int) -> np.ndarray:
        if 0 <= j <= self.n:
            return self._samples[j]
        raise StateError(f"u_{j} is not known yet (step {self.n}).")

    def _parts(self, n: int, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(local, history) at step n for the samples u[0..n]."""
        b = self.weights.b
        j_n = max(n - self.n0, 0)

        def interval_sum(lo: int, hi: int) -> np.ndarray:
            if hi <= lo:
                return np.zeros(u.shape[1:])
            # interval j sits at distance n - 1 - j
            w = b[:, n - hi : n - lo][:, ::-1]
            return w[0] @ u[lo:hi] + w[1] @ u[lo + 1 : hi + 1] + w[2] @ u[lo + 2 : hi + 2]

        d0, d1, d2 = self.weights.local
        last = d1 * u[n - 1] + d2 * u[n]
        if n >= 2:
            last = last + d0 * u[n - 2]
        history = interval_sum(0, j_n)
        local = interval_sum(j_n, n - 1) + last
        return local, history

    def _check_n(self, n: Optional[int]) -> int:
        n = self.n if n is None else n
        if n > self.n:
            raise StateError(f"Step {n} needs samples up to u_{n}, only u_{self.n} is known.")
        self._check_step(n)
        return n

    def split_eval(self, n: Optional[int] = None) -> Tuple[object, object]:
        """(local, history) parts of the uncorrected operator at step n."""
        n = self._check_n(n)
        local, history = self._parts(n, self._samples[: n + 1])
        return self._out(local), self._out(history)

    def direct_eval(self, n: Optional[int] = None):
        """The uncorrected operator at step n (default: the current step)."""
        n = self._check_n(n)
        local, history = self._parts(n, self._samples[: n + 1])
        return self._out(local + history)

    def evaluate(self, n: Optional[int] = None):
        """The corrected operator at step n (default: the current step)."""
        n = self._check_n(n)
        local, history = self._parts(n, self._samples[: n + 1])
        value = local + history
        if self.corrections is not None and self.corrections.m:
            known, _ = self._correction_affine(n, tentative=False)
            value = value + known
        return self._out(value)

    def _base_value(self) -> np.ndarray:
        local, history = self._parts(self.n, self._samples[: self.n + 1])
        return local + history

    def _base_affine(self) -> Tuple[np.ndarray, float]:
        n = self.n + 1
        self.weights.ensure(n)
        u = np.zeros((n + 1,) + self._samples.shape[1:])
        u[:n] = self._samples[:n]
        local, history = self._parts(n, u)
        coeff = self.weights.local[2] + self.weights.b[2, 1]
        return local + history, coeff

    def active_memory(self) -> int:
        per_sample = int(np.prod(self._samples.shape[1:], dtype=int))
        return (self.n + 1) * per_sample + 3 * (self.weights.capacity + 1)
