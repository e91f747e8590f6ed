# app/core/exceptions.py
"""
Exception hierarchy shared by every operations module.

All errors derive from OptomechError so callers (the CLI, the HTTP layer and
the sweep runner) can catch the whole family in one place. Errors that signal
bad user input also derive from ValueError.
"""

from typing import Any, Optional, Tuple


class OptomechError(Exception):
    """Base class for all domain errors."""
    pass


class InvalidParameterError(OptomechError, ValueError):
    """A physical or numerical parameter is outside its admissible range."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class UnstableSystemError(OptomechError):
    """A steady-state quantity was requested for an unstable linear model."""

    def __init__(self, message: str, report: Any = None):
        self.report = report
        super().__init__(message)


class RWAInstabilityError(UnstableSystemError):
    """Blue-detuned RWA coupling at or beyond the threshold sqrt(2 kappa gamma_m)."""

    def __init__(self, G: float, threshold: float):
        self.G = G
        self.threshold = threshold
        super().__init__(
            f"blue-detuned RWA model unstable: G={G:.6g} >= sqrt(2 kappa gamma_m)={threshold:.6g}"
        )


class InternalConsistencyError(OptomechError):
    """Two independent routes to the same quantity disagree."""

    def __init__(self, message: str, first: Any = None, second: Any = None):
        self.first = first
        self.second = second
        super().__init__(message)


class LyapunovResidualError(OptomechError):
    """The Lyapunov solve did not reach the requested residual."""

    def __init__(self, residual: float, tolerance: float):
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(
            f"Lyapunov residual {residual:.3e} exceeds tolerance {tolerance:.3e}"
        )


class QuadratureError(OptomechError):
    """Adaptive quadrature did not converge within its evaluation budget."""

    def __init__(self, message: str, achieved_error: float, target: Optional[float] = None):
        self.achieved_error = achieved_error
        self.target = target
        super().__init__(f"{message} (achieved error {achieved_error:.3e})")


class UnphysicalStateError(OptomechError, ValueError):
    """A covariance matrix violates the uncertainty principle."""
    pass


class OrthogonalityError(OptomechError, ValueError):
    """Two filter modes of a bank are not orthogonal."""

    def __init__(self, pair: Tuple[int, int], message: str):
        self.pair = pair
        super().__init__(f"filter modes {pair[0]} and {pair[1]}: {message}")


class OracleDivergenceError(OptomechError):
    """A stochastic trajectory blew up during integration."""

    def __init__(self, step: int, norm: float):
        self.step = step
        self.norm = norm
        super().__init__(f"trajectory norm {norm:.3e} at step {step}: integration diverged")

    def __reduce__(self):
        # raised inside worker processes
        return type(self), (self.step, self.norm)


class GridCapExceededError(OptomechError, ValueError):
    """A sweep grid is larger than the configured cap."""

    def __init__(self, size: int, cap: int):
        self.size = size
        self.cap = cap
        super().__init__(f"sweep grid has {size} points, cap is {cap}")
