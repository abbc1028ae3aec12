"""Errors raised by fracstep.

Every error derives from FracstepError so callers can catch the library as a whole;
the second base class keeps the usual Python category (ValueError, RuntimeError, ...).
"""
from typing import Optional


class FracstepError(Exception):
    """Base class of all fracstep errors."""


class DomainError(FracstepError, ValueError):
    """An argument lies outside the domain of the operation."""


class UsageError(FracstepError, ValueError):
    """Invalid experiment or command-line configuration."""


class StateError(FracstepError, RuntimeError):
    """The operation is not valid for the current state of an object."""


class NumericalFailure(FracstepError, ArithmeticError):
    """A numerical procedure did not converge or lost its accuracy."""


class AccuracyFailure(NumericalFailure):
    def __init__(self, message: str, estimate: float):
        super().__init__(f"{message} (achieved estimate {estimate:.3e})")
        self.estimate = estimate


class ConditioningError(NumericalFailure):
    """The requested linear system is too ill-conditioned to be trusted."""


class StepFailure(NumericalFailure):
    def __init__(
        self,
        step: int,
        time: float,
        residual: float,
        iterations: int,
        detail: Optional[str] = None,
    ):
        message = (
            f"Newton iteration failed at step {step} (t={time:.6g}): "
            f"residual {residual:.3e} after {iterations} iterations"
        )
        if detail:
            message += f"; {detail}"
        super().__init__(message)
        self.step = step
        self.time = time
        self.residual = residual
        self.iterations = iterations
