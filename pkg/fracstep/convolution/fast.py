"""Fast memory-saving convolution.

The operator is split at t_n - delta_T. The local part is summed directly
over the last n0 steps. The history part uses the representation

    k_alpha(t) = sin(alpha pi)/pi int_0^inf lambda^(-alpha) exp(-t lambda) dlambda,

discretized per level by a truncated Gauss-Laguerre rule. Every level keeps
the exponentially weighted integrals of the interpolant over aligned blocks
of B^(l-1) steps. Each block is advanced by an exact one-step recursion, so
the history at any step is a short sum over a bounded number of blocks.
"""
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from fracstep.convolution.base import Convolution
from fracstep.convolution.partition import anchor, level_count, partition_for, select_level_order
from fracstep.entity import FastParams, InterpKind, QuadratureRule
from fracstep.exceptions import StateError
from fracstep.quadrature import truncated_rule
from fracstep.utils.utils import write_csv

# Below this lambda * tau the moments use their Taylor series.
_TAYLOR_BELOW = 1.0
_TAYLOR_TERMS = 25

DIAGNOSTICS_HEADER = ["level", "N_ell", "q_retained", "T_hat", "blocks_held"]


def decaying_moments(lam, tau: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """G_k(lambda) = int_0^tau exp(-lambda v) v^k dv for k = 0, 1, 2."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    z = lam * tau
    moments = [np.empty_like(z) for _ in range(3)]
    small = z < _TAYLOR_BELOW
    if np.any(small):
        zs = z[small]
        for k in range(3):
            total = np.zeros_like(zs)
            term = np.ones_like(zs)
            for i in range(_TAYLOR_TERMS):
                total += term / (k + i + 1)
                term = term * (-zs) / (i + 1)
            moments[k][small] = tau ** (k + 1) * total
    big = ~small
    if np.any(big):
        lb, zb = lam[big], z[big]
        decay = np.exp(-zb)
        moments[0][big] = -np.expm1(-zb) / lb
        moments[1][big] = (1.0 - decay * (1.0 + zb)) / lb**2
        moments[2][big] = (2.0 - decay * (2.0 + 2.0 * zb + zb * zb)) / lb**3
    return moments[0], moments[1], moments[2]


def one_step_coefficients(lam, tau: float, kind: InterpKind) -> np.ndarray:
    """c_k(lambda) = int_{t_j}^{t_{j+1}} exp(-lambda (t_{j+1} - s)) F_k(s) ds.

    Returns:
        np.ndarray: Shape (3, len(lam)); row k multiplies u_{j+k}.
    """
    g0, g1, g2 = decaying_moments(lam, tau)
    if InterpKind.parse(kind) is InterpKind.QUADRATIC:
        tau2 = tau * tau
        return np.vstack([(g2 + tau * g1) / (2 * tau2), g0 - g2 / tau2, (g2 - tau * g1) / (2 * tau2)])
    return np.vstack([g1 / tau, g0 - g1 / tau, np.zeros_like(g0)])


@dataclass
class LevelState:
    """One exponential level: its rule and a ring of sealed block states.

    Block k of the level covers steps [k b, (k + 1) b] with b = block_len and
    holds int exp(-lambda ((k + 1) b tau - s)) u(s) ds for every retained node.
    """

    level: int
    block_len: int
    T_prev: float
    T_hat: float
    order: int
    rule: QuadratureRule
    offset: int
    blocks: np.ndarray
    ends: np.ndarray
    decay_table: np.ndarray

    @property
    def q(self) -> int:
        return len(self.rule)

    @property
    def slots(self) -> int:
        return self.ends.shape[0]

    @property
    def modes(self) -> slice:
        return slice(self.offset, self.offset + self.q)

    def seal(self, end: int, state: np.ndarray) -> None:
        slot = (end // self.block_len) % self.slots
        self.blocks[slot] = state
        self.ends[slot] = end

    def blocks_held(self, lower: int) -> int:
        """Sealed blocks still inside the window starting at `lower`."""
        return int(np.count_nonzero(self.ends - self.block_len >= lower))

    def window_state(self, lower: int, upper: int, top: int) -> np.ndarray:
        """y over [lower, top], decayed to `upper`, from the sealed blocks."""
        b = self.block_len
        count = (top - lower) // b
        if count <= 0:
            return np.zeros(self.blocks.shape[1:])
        ends = lower + b * np.arange(1, count + 1)
        slots = (ends // b) % self.slots
        if not np.array_equal(self.ends[slots], ends):
            raise StateError(
                f"Level {self.level} does not hold the blocks of [{lower}, {top}]."
            )
        decay = self.decay_table[(upper - ends) // b]
        return np.einsum("kq,kqd->qd", decay, self.blocks[slots])


class FastConvolution(Convolution):
    """Convolution with O(n0 + sum_l q_l B) memory and work per step.

    The levels are built up front for the horizon in `params`; pushing
    samples past it raises StateError.
    """

    def __init__(
        self,
        params: FastParams,
        corrections=None,
        keep_log: bool = False,
        verbose: bool = False,
        **kwargs,
    ):
        """Initialize the fast operator.

        Args:
            params (FastParams): All parameters, including the horizon.
            corrections (Optional[CorrectionSet]): Starting weights. Defaults to None.
            keep_log (bool, optional): Keep every sample so `reference_history`
                can recompute the history from scratch. Defaults to False.
            verbose (bool, optional): Whether to print the log. Defaults to False.
        """
        super().__init__(params, corrections=corrections, verbose=verbose, **kwargs)
        self.B = params.B
        self.keep_log = keep_log
        self._sin = 0.0 if float(self.alpha).is_integer() else math.sin(self.alpha * math.pi) / math.pi
        self.weights.ensure(self.n0)
        self.levels: List[LevelState] = []
        self.max_levels = level_count(params.n_steps - self.n0 + 1, self.B)
        self._build_levels()
        self._partial: Optional[np.ndarray] = None
        self._window: Optional[np.ndarray] = None
        self._log: List[np.ndarray] = []
        self._fed = 0
        self.logger.info(
            f"Fast operator alpha={self.alpha}, tau={self.tau}, n0={self.n0}, B={self.B}: "
            f"{len(self.levels)} levels, orders {[lvl.order for lvl in self.levels]}, "
            f"retained {[lvl.q for lvl in self.levels]}."
        )

    def _build_levels(self) -> None:
        p = self.params
        slots = 2 * self.B + 1
        offset = 0
        lams, coeffs = [], []
        for ell in range(1, self.max_levels + 1):
            block_len = self.B ** (ell - 1)
            T_prev = block_len * self.tau
            T_hat = T_prev + (self.n0 - 1) * self.tau
            order = select_level_order(self.B, self.n0, ell, p.eps)
            rule = truncated_rule(-self.alpha, order, T_hat, p.eps0)
            steps = np.arange(slots + 1)[:, None] * block_len
            self.levels.append(
                LevelState(
                    level=ell,
                    block_len=block_len,
                    T_prev=T_prev,
                    T_hat=T_hat,
                    order=order,
                    rule=rule,
                    offset=offset,
                    blocks=np.zeros((0,)),
                    ends=np.full(slots, -1, dtype=np.int64),
                    decay_table=np.exp(-steps * self.tau * rule.nodes[None, :]),
                )
            )
            offset += len(rule)
            lams.append(rule.nodes)
            coeffs.append(one_step_coefficients(rule.nodes, self.tau, self.kind))
        self._lam = np.concatenate(lams) if lams else np.zeros(0)
        self._decay = np.exp(-self._lam * self.tau)
        self._coeffs = np.hstack(coeffs) if coeffs else np.zeros((3, 0))
        if self.levels:
            first = self.levels[0]
            self._kappa = self._sin * (self._coeffs[:, first.modes] @ first.rule.weights)
        else:
            self._kappa = np.zeros(3)

    @property
    def modes(self) -> int:
        return len(self._lam)

    def _allocate(self, d: int) -> None:
        self._partial = np.zeros((self.modes, d))
        self._window = np.zeros((self.n0 + 2, d))
        for lvl in self.levels:
            lvl.blocks = np.zeros((lvl.slots, lvl.q, d))

    def _push(self, value: np.ndarray) -> None:
        vec = value.reshape(-1)
        if self._window is None:
            self._allocate(vec.shape[0])
        if level_count(self.n - self.n0 + 1, self.B) > self.max_levels:
            raise StateError(
                f"Step {self.n} is past the horizon {self.params.horizon} the operator was built for."
            )
        assert self._window is not None and self._partial is not None
        self._window[:-1] = self._window[1:]
        self._window[-1] = vec
        if self.keep_log:
            self._log.append(vec.copy())
        while self._fed < self.n - self.n0:
            self._feed()

    def _feed(self) -> None:
        """Advance every level by interval j = self._fed and seal finished blocks."""
        assert self._window is not None and self._partial is not None
        back = self.n - self._fed
        u = self._window[-1 - back : len(self._window) - back + 2]
        if u.shape[0] != 3:
            raise StateError(f"Interval {self._fed} is no longer in the sample window.")
        self._partial *= self._decay[:, None]
        self._partial += self._coeffs.T @ u
        self._fed += 1
        for lvl in self.levels:
            if self._fed % lvl.block_len == 0:
                lvl.seal(self._fed, self._partial[lvl.modes])
                self._partial[lvl.modes] = 0.0

    def _local(self, arr: np.ndarray, step: int) -> Tuple[np.ndarray, float]:
        """Local part at `step` for samples arr ending with u_step, and the
        coefficient of u_step in it."""
        b = self.weights.b
        d0, d1, d2 = self.weights.local
        value = d0 * arr[-3] + d1 * arr[-2] + d2 * arr[-1]
        coeff = d2
        reach = min(self.n0 - 1, step - 1)
        if reach >= 1:
            i = np.arange(1, reach + 1)
            size = len(arr)
            value = value + b[0, i] @ arr[size - 2 - i] + b[1, i] @ arr[size - 1 - i] + b[2, i] @ arr[size - i]
            coeff += b[2, 1]
        return value, coeff

    def _history(self, step: int, pending: bool) -> np.ndarray:
        """History at `step` from the sealed blocks; with `pending` the last
        history interval is left out for the caller to add."""
        assert self._partial is not None
        d = self._partial.shape[1]
        part = partition_for(step, self.n0, self.B, self.tau)
        if part.empty:
            return np.zeros(d)
        if part.levels > self.max_levels:
            raise StateError(f"Step {step} is past the horizon {self.params.horizon}.")
        total = np.zeros(d)
        for ell in range(1, part.levels + 1):
            lvl = self.levels[ell - 1]
            lower, upper = part.window(ell)
            top = upper - 1 if pending and ell == 1 else upper
            Y = lvl.window_state(lower, upper, top)
            shift = part.t_hat - upper - lvl.block_len
            scale = self._sin * lvl.rule.weights * np.exp(-shift * self.tau * lvl.rule.nodes)
            total += scale @ Y
        return total

    def _base_value(self) -> np.ndarray:
        assert self._window is not None
        local, _ = self._local(self._window, self.n)
        value = local + self._history(self.n, pending=False)
        return value.reshape(self._shape or ())

    def _base_affine(self) -> Tuple[np.ndarray, float]:
        assert self._window is not None
        step = self.n + 1
        arr = np.vstack([self._window, np.zeros((1, self._window.shape[1]))])
        known, coeff = self._local(arr, step)
        if step - self.n0 >= 1:
            known = known + self._history(step, pending=True)
            # the last history interval [t_{n-n0}, t_{n-n0+1}] is not fed yet
            first = len(arr) - 2 - self.n0
            known = known + self._kappa @ arr[first : first + 3]
            if self.n0 == 1:
                coeff += self._kappa[2]
        return known.reshape(self._shape or ()), float(coeff)

    def history_fast(self, n: Optional[int] = None):
        """The fast history part at the current step."""
        self._check_current(n)
        if self._partial is None:
            return 0.0
        return self._out(self._history(self.n, pending=False).reshape(self._shape or ()))

    def full_fast_eval(self, n: Optional[int] = None):
        """Local part, fast history and correction at the current step."""
        self._check_current(n)
        return self.evaluate()

    def _check_current(self, n: Optional[int]) -> None:
        if n is not None and n != self.n:
            raise StateError(f"The fast operator only evaluates its current step {self.n}, not {n}.")

    def reference_history(self, n: Optional[int] = None):
        """The same history formula recomputed from the full sample log."""
        if not self.keep_log:
            raise StateError("reference_history needs an operator built with keep_log=True.")
        n = self.n if n is None else n
        if n > self.n:
            raise StateError(f"Step {n} is not reached yet.")
        d = self._partial.shape[1] if self._partial is not None else 1
        part = partition_for(n, self.n0, self.B, self.tau)
        total = np.zeros(d)
        if not part.empty:
            log = np.array(self._log + [np.zeros(d), np.zeros(d)])
            for ell in range(1, part.levels + 1):
                lvl = self.levels[ell - 1]
                lower, upper = part.window(ell)
                j = np.arange(lower, upper)
                coeffs = self._coeffs[:, lvl.modes]
                nodes = lvl.rule.nodes
                decay = np.exp(-np.outer(upper - j - 1, nodes) * self.tau)
                samples = np.stack([log[j], log[j + 1], log[j + 2]], axis=1)
                Y = np.einsum("jq,kq,jkd->qd", decay, coeffs, samples)
                shift = part.t_hat - upper - lvl.block_len
                scale = self._sin * lvl.rule.weights * np.exp(-shift * self.tau * nodes)
                total += scale @ Y
        return self._out(total.reshape(self._shape or ()))

    def kernel_soe(self, level: int) -> Tuple[np.ndarray, np.ndarray, float]:
        """Exponents, weights and shift of the level's kernel approximation.

        For t in the level's window, k_alpha(t) ~ sum_j w_j exp(-(t - shift) lambda_j).
        """
        lvl = self.levels[level - 1]
        return lvl.rule.nodes.copy(), self._sin * lvl.rule.weights, lvl.T_hat

    def kernel_window(self, level: int) -> Tuple[float, float]:
        """The range of t_n - s covered by a level."""
        lvl = self.levels[level - 1]
        far = (2 * self.B**level - 1 + self.n0 - 1) * self.tau
        return lvl.T_hat, far

    def soe_kernel(self, level: int, t) -> np.ndarray:
        lam, w, shift = self.kernel_soe(level)
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.exp(-np.outer(t - shift, lam)) @ w

    def diagnostics(self) -> List[List[object]]:
        """Rows of `level,N_ell,q_retained,T_hat,blocks_held`."""
        t_hat = self.n - self.n0 + 1
        rows: List[List[object]] = []
        for lvl in self.levels:
            lower = anchor(t_hat, self.B, lvl.level) if t_hat > 1 else 0
            rows.append([lvl.level, lvl.order, lvl.q, lvl.T_hat, lvl.blocks_held(lower)])
        return rows

    def diagnostics_to_csv(self, path: str) -> str:
        return write_csv(path, DIAGNOSTICS_HEADER, self.diagnostics())

    def max_mode_magnitude(self) -> float:
        if self._partial is None:
            return 0.0
        values = [float(np.max(np.abs(self._partial), initial=0.0))]
        values += [float(np.max(np.abs(lvl.blocks), initial=0.0)) for lvl in self.levels]
        return max(values)

    def active_memory(self) -> int:
        if self._partial is None:
            return 0
        d = self._partial.shape[1]
        total = self._partial.size + self._window.size if self._window is not None else 0
        total += sum(lvl.blocks.size + lvl.ends.size for lvl in self.levels)
        total += len(self._head) * d + len(self._log) * d
        return int(total)
