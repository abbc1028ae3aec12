"""The entity module defines the value types shared across the package.
"""
import enum
from dataclasses import dataclass, field
from typing import Callable, List, Tuple

import numpy as np

from fracstep.exceptions import DomainError


class InterpKind(enum.Enum):
    """Piecewise interpolation used for the sampled function."""

    LINEAR = "linear"
    QUADRATIC = "quadratic"

    @classmethod
    def parse(cls, value: "str | InterpKind") -> "InterpKind":
        if isinstance(value, InterpKind):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise DomainError(
                f"Unknown interpolation kind {value!r}, expected linear or quadratic."
            )

    @property
    def min_samples(self) -> int:
        """Smallest step index at which the scheme can be evaluated."""
        return 2 if self is InterpKind.QUADRATIC else 1


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and weights of a (scaled, possibly truncated) generalized
    Gauss-Laguerre rule for the weight lambda^a exp(-T lambda) on (0, inf).

    The rule holds `truncated_to` points out of the `order + 1` points of the
    full rule; `nodes` and `weights` only carry the retained ones.
    """

    weight_param: float
    scale: float
    order: int
    nodes: np.ndarray
    weights: np.ndarray
    truncated_to: int

    def __post_init__(self):
        if self.weight_param <= -1:
            raise DomainError(f"Weight parameter must exceed -1, got {self.weight_param}.")
        if self.scale <= 0:
            raise DomainError(f"Scale must be positive, got {self.scale}.")
        if len(self.nodes) != len(self.weights):
            raise DomainError("Nodes and weights must have the same length.")
        if self.truncated_to != len(self.nodes) or self.truncated_to > self.order + 1:
            raise DomainError(
                f"Inconsistent truncation: {self.truncated_to} of {self.order + 1} points "
                f"with {len(self.nodes)} nodes held."
            )

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def is_truncated(self) -> bool:
        return self.truncated_to < self.order + 1

    def apply(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        """Approximate the integral of f against the rule's weight function."""
        return float(np.dot(self.weights, f(self.nodes)))

    def rows(self) -> List[Tuple[int, float, float]]:
        return [(j, float(x), float(w)) for j, (x, w) in enumerate(zip(self.nodes, self.weights))]


@dataclass(frozen=True)
class HistoryPartition:
    """Anchor layout of the history window at one step.

    Anchors are integers in units of the stepsize tau. `anchors` holds
    s_0 > s_1 > ... > s_L = 0 and `multipliers[l - 1]` holds q_l for
    1 <= l <= L - 1 (so s_l = q_l * B**l).
    """

    n: int
    t_hat: int
    levels: int
    anchors: Tuple[int, ...] = field(default_factory=tuple)
    multipliers: Tuple[int, ...] = field(default_factory=tuple)
    tau: float = 1.0

    @property
    def anchor_times(self) -> Tuple[float, ...]:
        return tuple(s * self.tau for s in self.anchors)

    @property
    def empty(self) -> bool:
        return self.levels == 0

    def window(self, level: int) -> Tuple[int, int]:
        """The window [s_level, s_{level - 1}] of a level, in steps."""
        return self.anchors[level], self.anchors[level - 1]


@dataclass
class FastParams:
    """User-facing parameters of the convolution operators.

    Args:
        alpha (float): Kernel order (< 1). Negative values give the
            Riemann-Liouville derivative of order -alpha.
        tau (float): The stepsize.
        n0 (int): Memory length in steps, delta_T = n0 * tau.
        B (int): Level basis.
        eps (float): Precision used to choose the per-level rule order.
        eps0 (float): Precision used to truncate each rule.
        kind (InterpKind): Interpolation of the samples.
        horizon (float): Final time; the fast engine allocates its levels for it.
    """

    alpha: float
    tau: float
    n0: int = 1
    B: int = 5
    eps: float = 1e-10
    eps0: float = 1e-16
    kind: InterpKind = InterpKind.QUADRATIC
    horizon: float = 1.0

    def __post_init__(self):
        self.kind = InterpKind.parse(self.kind)
        if not self.alpha < 1:
            raise DomainError(f"Kernel order must be below 1, got {self.alpha}.")
        if self.alpha == 0:
            raise DomainError("Kernel order 0 is the identity, not a convolution.")
        if self.tau <= 0:
            raise DomainError(f"Stepsize must be positive, got {self.tau}.")
        if int(self.n0) != self.n0 or self.n0 < 1:
            raise DomainError(f"Memory length must be a positive number of steps, got {self.n0}.")
        self.n0 = int(self.n0)
        if int(self.B) != self.B or self.B < 2:
            raise DomainError(f"Basis must be an integer >= 2, got {self.B}.")
        self.B = int(self.B)
        for name in ("eps", "eps0"):
            value = getattr(self, name)
            if not 0 < value < 1:
                raise DomainError(f"{name} must lie in (0, 1), got {value}.")
        if self.horizon <= 0:
            raise DomainError(f"Horizon must be positive, got {self.horizon}.")

    @classmethod
    def from_memory_length(cls, alpha: float, tau: float, delta_T: float, **kwargs) -> "FastParams":
        """Build parameters from a memory length given in time units."""
        n0 = round(delta_T / tau)
        if n0 < 1 or abs(n0 * tau - delta_T) > 1e-9 * max(1.0, delta_T):
            raise DomainError(
                f"Memory length {delta_T} is not a positive multiple of the stepsize {tau}."
            )
        return cls(alpha=alpha, tau=tau, n0=n0, **kwargs)

    @property
    def delta_T(self) -> float:
        return self.n0 * self.tau

    @property
    def n_steps(self) -> int:
        """Number of steps that reach the horizon."""
        return int(np.ceil(self.horizon / self.tau - 1e-9))
