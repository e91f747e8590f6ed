# app/models/linear.py
"""
Linear Langevin Models

A LinearModel is the pair (A, D) of the linearized fluctuation dynamics

    du/dt = A u + n(t),   <n_i(t) n_j(t') + n_j(t') n_i(t)>/2 = D_ij delta(t - t')

over the quadrature vector u = (dq, dp, dX, dY). Rates are in units of omega_m.

The diffusion matrix has a Markovian (constant) form and a frequency-dependent
form in which the mechanical momentum entry follows the Ohmic thermal kernel
gamma_m * omega * coth(omega / 2 theta), theta = k_B T / (hbar omega_m).
"""

from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

MODE_LABELS = ("mech", "cav")


def x_coth_x(x):
    """x * coth(x), continued to 1 at x = 0."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-6
    safe = np.where(small, 1.0, x)
    return np.where(small, 1.0 + x * x / 3.0, safe / np.tanh(safe))


def thermal_kernel(omega, gamma_m: float, theta: float):
    """gamma_m * omega * coth(omega / 2 theta), finite at omega = 0 (value 2 theta gamma_m)."""
    omega = np.abs(np.asarray(omega, dtype=float))
    if theta <= 0.0:
        return gamma_m * omega
    return gamma_m * 2.0 * theta * x_coth_x(omega / (2.0 * theta))


class LinearModel:
    """
    Drift and diffusion matrices of a linear Langevin system.

    ``kernel_slot`` marks the diagonal entry replaced by the thermal kernel in
    the frequency-dependent form; models without a thermal bath leave it None.
    """

    def __init__(
        self,
        drift: np.ndarray,
        diffusion: np.ndarray,
        labels: Optional[Sequence[str]] = None,
        kernel_slot: Optional[int] = None,
        gamma_m: float = 0.0,
        theta: float = 0.0,
    ):
        self.drift = np.array(drift, dtype=float)
        self.diffusion = np.array(diffusion, dtype=float)
        n = self.drift.shape[0]
        if self.drift.shape != (n, n) or self.diffusion.shape != (n, n):
            raise ValueError("drift and diffusion must be square matrices of the same size")
        # One label per mode (quadrature pair); odd toy systems get none.
        if labels is not None:
            self.labels: Optional[Tuple[str, ...]] = tuple(labels)
        elif n % 2 == 0:
            self.labels = tuple(f"mode{i}" for i in range(n // 2))
        else:
            self.labels = None
        self.kernel_slot = kernel_slot
        self.gamma_m = gamma_m
        self.theta = theta

    @classmethod
    def create(cls, drift, diffusion, labels: Optional[Sequence[str]] = None) -> "LinearModel":
        """Generic model without a thermal kernel (toy systems, RWA drifts)."""
        return cls(drift, diffusion, labels=labels)

    @property
    def dim(self) -> int:
        return self.drift.shape[0]

    def diffusion_kernel(self, omega: float) -> np.ndarray:
        """D(omega): the Markovian matrix with the thermal slot made frequency dependent."""
        D = self.diffusion.copy()
        if self.kernel_slot is not None:
            D[self.kernel_slot, self.kernel_slot] = thermal_kernel(omega, self.gamma_m, self.theta)
        return D

    def diffusion_function(self, markovian: bool) -> Callable[[float], np.ndarray]:
        if markovian or self.kernel_slot is None:
            return lambda omega: self.diffusion
        return self.diffusion_kernel

    def transfer(self, omega: float) -> np.ndarray:
        """M(omega) = (i omega + A)^-1."""
        return np.linalg.inv(1j * omega * np.eye(self.dim) + self.drift)

    def __repr__(self) -> str:
        return f"<LinearModel(dim={self.dim}, labels={self.labels})>"


class StabilityReport(BaseModel):
    """Routh-Hurwitz and eigenvalue verdicts on the drift matrix."""
    s1: float = Field(..., description="First Routh-Hurwitz condition (stable requires > 0)")
    s2: float = Field(..., description="Second Routh-Hurwitz condition (stable requires > 0)")
    char_poly: List[float] = Field(
        ..., description="Coefficients a1..a4 of det(lambda - A) = lambda^4 + a1 lambda^3 + ..."
    )
    eig_max_real_part: float = Field(..., description="Largest real part of the eigenvalues of A")
    routh_hurwitz_stable: bool
    eigen_stable: bool
    stable: bool

    model_config = ConfigDict(frozen=True)
