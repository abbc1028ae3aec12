"""Common interface of the discrete convolution operators.

An operator is fed the samples u_0, u_1, ... in step order. After u_n has
been pushed, `evaluate()` gives the operator at t_n, and `step_affine()`
returns the pair (known, coeff) such that the operator at t_{n+1} equals
known + coeff * u_{n+1}; implicit time-steppers solve for u_{n+1} with it.
"""
from abc import ABC, abstractmethod
from typing import TYPE_CHECKING, List, Optional, Tuple

import numpy as np

from fracstep.entity import FastParams, InterpKind
from fracstep.exceptions import StateError
from fracstep.interp import WeightTable
from fracstep.utils.utils import Logger

if TYPE_CHECKING:
    from fracstep.convolution.corrections import CorrectionSet


class Convolution(ABC):
    """Discrete approximation of k_alpha * u at the grid points t_n = n tau.

    Samples may be scalars or 1-d vectors; vector samples are convolved
    componentwise with shared weights.
    """

    def __init__(
        self,
        params: FastParams,
        corrections: Optional["CorrectionSet"] = None,
        verbose: bool = False,
        **kwargs,
    ):
        """Initialize the operator.

        Args:
            params (FastParams): Kernel order, stepsize, memory length and
                interpolation kind (the fast engine also uses the rest).
            corrections (Optional[CorrectionSet]): Starting weights for the
                singular part of u. Defaults to None (no correction).
            verbose (bool, optional): Whether to print the log. Defaults to False.
        """
        self.params = params
        self.alpha = params.alpha
        self.tau = params.tau
        self.n0 = params.n0
        self.kind: InterpKind = params.kind
        self.corrections = corrections
        if corrections is not None:
            corrections.check_compatible(params)
        self.verbose = verbose
        self.logger = Logger(logger_name=__name__, verbose=verbose)
        self.weights = WeightTable(self.alpha, self.tau, self.kind)
        self.n = -1
        self._shape: Optional[Tuple[int, ...]] = None
        self._head: List[np.ndarray] = []
        self.kwargs = kwargs

    @property
    def steps(self) -> int:
        """Index of the latest sample, -1 before the first push."""
        return self.n

    def _as_sample(self, u) -> np.ndarray:
        value = np.array(u, dtype=float)
        if value.ndim > 1:
            raise StateError(f"Samples must be scalars or 1-d vectors, got shape {value.shape}.")
        if self._shape is None:
            self._shape = value.shape
        elif value.shape != self._shape:
            raise StateError(f"Sample shape changed from {self._shape} to {value.shape}.")
        return value

    def _out(self, value: np.ndarray):
        return float(value) if np.ndim(value) == 0 else value

    def push_sample(self, u) -> None:
        """Append u_{n+1}; samples arrive in step order."""
        value = self._as_sample(u)
        self.n += 1
        if self.corrections is not None and len(self._head) <= self.corrections.m:
            self._head.append(value)
        self._push(value)

    def _check_step(self, step: int) -> None:
        if step < self.kind.min_samples:
            raise StateError(
                f"{self.kind.value} interpolation needs step >= {self.kind.min_samples}, got {step}."
            )

    def evaluate(self):
        """The corrected operator at the current step n."""
        self._check_step(self.n)
        value = self._base_value()
        if self.corrections is not None and self.corrections.m:
            known, coeff = self._correction_affine(self.n, tentative=False)
            value = value + known
        return self._out(value)

    def step_affine(self) -> Tuple[np.ndarray, float]:
        """(known, coeff) with operator(t_{n+1}) = known + coeff * u_{n+1}."""
        if self._shape is None:
            raise StateError("Push u_0 before stepping.")
        self._check_step(self.n + 1)
        known, coeff = self._base_affine()
        if self.corrections is not None and self.corrections.m:
            c_known, c_coeff = self._correction_affine(self.n + 1, tentative=True)
            known = known + c_known
            coeff += c_coeff
        return known, coeff

    def evaluate_with(self, u):
        """The operator at t_{n+1} if u_{n+1} were u."""
        known, coeff = self.step_affine()
        return self._out(known + coeff * self._as_sample(u))

    def _correction_affine(self, step: int, tentative: bool) -> Tuple[np.ndarray, float]:
        """tau^alpha sum_j W_{step,j} (u_j - u_0), split into a known part and
        the coefficient of u_step when u_step is one of the corrected samples."""
        assert self.corrections is not None
        W = self.corrections.weights(step)
        scale = self.tau**self.alpha
        u0 = self._known_sample(0)
        known = np.zeros(self._shape or ())
        coeff = 0.0
        for j, w in enumerate(W, start=1):
            if tentative and j == step:
                known = known - scale * w * u0
                coeff += scale * w
            else:
                known = known + scale * w * (self._known_sample(j) - u0)
        return known, coeff

    def _known_sample(self, j: int) -> np.ndarray:
        if j <= self.n and j < len(self._head):
            return self._head[j]
        raise StateError(f"u_{j} is not retained or not known yet (step {self.n}).")

    @abstractmethod
    def _push(self, value: np.ndarray) -> None:
        raise NotImplementedError

    @abstractmethod
    def _base_value(self) -> np.ndarray:
        """The uncorrected operator at the current step."""
        raise NotImplementedError

    @abstractmethod
    def _base_affine(self) -> Tuple[np.ndarray, float]:
        """The uncorrected operator at the next step, as (known, coeff)."""
        raise NotImplementedError

    @abstractmethod
    def active_memory(self) -> int:
        """Number of floats of state the operator retains."""
        raise NotImplementedError
