"""Geometric partition of the history window into exponential levels.

With t_hat = (n - n0 + 1) tau, level l covers [s_l, s_{l-1}] where
t_hat - s_l lies in [B^l tau, (2 B^l - 1) tau]. Level l uses a Gauss-Laguerre
rule whose order is chosen so the kernel is resolved to eps over that window.
"""
import math

from fracstep.entity import HistoryPartition
from fracstep.exceptions import DomainError


def level_count(t_hat: int, B: int) -> int:
    """Smallest L with t_hat < 2 B^L (0 when the history is empty)."""
    if t_hat <= 1:
        return 0
    levels = 1
    while t_hat >= 2 * B**levels:
        levels += 1
    return levels


def anchor(t_hat: int, B: int, level: int) -> int:
    """s_level for level >= 1, in steps; 0 once the level is the last one."""
    block = B**level
    return max(0, (t_hat // block - 1) * block)


def partition_for(n: int, n0: int, B: int, tau: float = 1.0) -> HistoryPartition:
    """The anchor layout of the history at step n.

    Args:
        n (int): The step.
        n0 (int): The memory length in steps.
        B (int): The level basis.
        tau (float): The stepsize, carried for time conversions.

    Returns:
        HistoryPartition: Empty when n <= n0.
    """
    if B < 2:
        raise DomainError(f"Basis must be >= 2, got {B}.")
    if n0 < 1:
        raise DomainError(f"Memory length must be >= 1 step, got {n0}.")
    t_hat = n - n0 + 1
    levels = level_count(t_hat, B)
    if levels == 0:
        return HistoryPartition(n=n, t_hat=max(t_hat, 0), levels=0, tau=tau)
    multipliers = tuple(t_hat // B**ell - 1 for ell in range(1, levels))
    anchors = (t_hat - 1,) + tuple(q * B**ell for ell, q in enumerate(multipliers, start=1)) + (0,)
    return HistoryPartition(
        n=n,
        t_hat=t_hat,
        levels=levels,
        anchors=anchors,
        multipliers=multipliers,
        tau=tau,
    )


def relative_window(B: int, ratio: float, ell: int) -> float:
    """Length of level ell's kernel window over its rule scale T_hat_ell."""
    shrink = float(B) ** (1 - ell)
    return (2 * B - 1 - shrink) / (1 + shrink * (ratio - 1))


def select_level_order(B: int, ratio: float, ell: int, eps: float) -> int:
    """Smallest rule order N whose relative error bound over level ell is below eps.

    Args:
        B (int): The level basis.
        ratio (float): delta_T / tau, at least 1.
        ell (int): The level, at least 1.
        eps (float): The precision, in (0, 1).
    """
    if ratio < 1:
        raise DomainError(f"delta_T / tau must be at least 1, got {ratio}.")
    if ell < 1:
        raise DomainError(f"Levels start at 1, got {ell}.")
    if not 0 < eps < 1:
        raise DomainError(f"eps must lie in (0, 1), got {eps}.")
    window = relative_window(B, ratio, ell)
    order = math.ceil(math.log(eps) / (2.0 * math.log(window / (window + 1.0))))
    return max(order, 1)
