# app/models/filters.py
"""
Filter Mode Models

A FilterMode selects a traveling output mode from the cavity output field
with the causal step filter

    g(t) = theta(t) theta(tau - t) exp(-i Omega t) / sqrt(tau),

Omega being measured from the laser frequency in the rotating frame (the
Stokes sideband sits at Omega = -omega_m). Times and frequencies are in units
of omega_m, so tau equals the inverse-bandwidth parameter epsilon = omega_m tau.

ExtendedModel carries the drift, diffusion and filter matrices of the
mechanics plus N copies of the cavity, one copy read by each filter.
"""

import math
from typing import List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.integrate import quad

from app.core.exceptions import OrthogonalityError
from app.models.linear import thermal_kernel
from app.models.parameters import DerivedParams

# (Omega_j - Omega_k) tau / 2 pi must be an integer to this tolerance.
SEPARATION_TOLERANCE = 1e-9
OVERLAP_TOLERANCE = 1e-10


class FilterMode(BaseModel):
    """Causal step filter of duration tau centred at Omega (both normalized by omega_m)."""
    center: float = Field(..., description="Central frequency Omega / omega_m")
    tau: float = Field(..., gt=0, description="Duration omega_m tau")

    model_config = ConfigDict(frozen=True)

    @property
    def epsilon(self) -> float:
        return self.tau

    def response(self, omega):
        """
        Frequency response in the unitary Fourier convention,
        sqrt(tau / 2 pi) exp(i (w - Omega) tau / 2) sinc((w - Omega) tau / 2).
        """
        return self.transfer(omega) / math.sqrt(2.0 * math.pi)

    def transfer(self, omega):
        """Int dt exp(i w t) g(t) = sqrt(tau) exp(i x) sinc(x), x = (w - Omega) tau / 2."""
        x = 0.5 * (np.asarray(omega, dtype=float) - self.center) * self.tau
        return math.sqrt(self.tau) * np.exp(1j * x) * np.sinc(x / np.pi)

    def quadrature_block(self, omega: float) -> np.ndarray:
        """
        2x2 map from the output (X, Y) spectra at omega to the filtered mode's
        quadratures: [[gR, -gI], [gI, gR]] with
        gR = (g(w) + g(-w)*)/2 and gI = (g(w) - g(-w)*)/2i.
        """
        plus = self.transfer(omega)
        minus = np.conj(self.transfer(-omega))
        g_r = 0.5 * (plus + minus)
        g_i = (plus - minus) / 2j
        return np.array([[g_r, -g_i], [g_i, g_r]])

    def overlap(self, other: "FilterMode") -> complex:
        """Int dt g_self(t)* g_other(t), evaluated by oscillatory quadrature."""
        if other.tau != self.tau:
            raise ValueError("filters of one bank share the same duration")
        delta = self.center - other.center
        weight = 1.0 / self.tau
        if delta == 0.0:
            value, _ = quad(lambda t: weight, 0.0, self.tau)
            return complex(value)
        re, _ = quad(lambda t: weight, 0.0, self.tau, weight="cos", wvar=delta)
        im, _ = quad(lambda t: weight, 0.0, self.tau, weight="sin", wvar=delta)
        return complex(re, im)


class FilterBank:
    """An orthonormal set of filter modes sharing one duration."""

    def __init__(self, modes: Sequence[FilterMode]):
        self.modes: Tuple[FilterMode, ...] = tuple(modes)

    @classmethod
    def create(cls, centers: Sequence[float], tau: float) -> "FilterBank":
        """
        Build and verify a bank.

        Raises:
            OrthogonalityError: If two centres are not separated by a nonzero
                integer multiple of 2 pi / tau, or their numerical overlap is
                above 1e-10
        """
        if not centers:
            raise ValueError("a filter bank needs at least one mode")
        bank = cls([FilterMode(center=c, tau=tau) for c in centers])
        bank.verify()
        return bank

    def verify(self) -> None:
        for j, first in enumerate(self.modes):
            for k in range(j + 1, len(self.modes)):
                second = self.modes[k]
                p = (second.center - first.center) * first.tau / (2.0 * math.pi)
                if abs(p - round(p)) > SEPARATION_TOLERANCE * max(1.0, abs(p)) or round(p) == 0:
                    raise OrthogonalityError(
                        (j, k), f"(Omega_j - Omega_k) tau / 2 pi = {p:.6g} is not a nonzero integer"
                    )
                overlap = abs(first.overlap(second))
                if overlap > OVERLAP_TOLERANCE:
                    raise OrthogonalityError((j, k), f"numerical overlap {overlap:.3e}")

    @property
    def tau(self) -> float:
        return self.modes[0].tau

    @property
    def centers(self) -> List[float]:
        return [m.center for m in self.modes]

    def transfer_matrix(self, omega: float) -> np.ndarray:
        """T(omega) = blockdiag(I2, filter block of mode 1, ..., mode N)."""
        dim = 2 * len(self.modes) + 2
        T = np.zeros((dim, dim), dtype=complex)
        T[0, 0] = T[1, 1] = 1.0
        for j, mode in enumerate(self.modes):
            s = 2 + 2 * j
            T[s: s + 2, s: s + 2] = mode.quadrature_block(omega)
        return T

    def reflected_vacuum(self) -> np.ndarray:
        """Q N_in Q^T: the reflected input vacuum, 1/2 on every optical block pair."""
        N = len(self.modes)
        out = np.zeros((2 * N + 2, 2 * N + 2))
        out[2:, 2:] = 0.5 * np.kron(np.ones((N, N)), np.eye(2))
        return out

    def __len__(self) -> int:
        return len(self.modes)

    def __iter__(self):
        return iter(self.modes)

    def __repr__(self) -> str:
        return f"<FilterBank(centers={self.centers}, epsilon={self.tau:.4g})>"


class ExtendedModel:
    """
    Mechanics plus N cavity copies, in the order (q, p, X1, Y1, ..., XN, YN).

    Every copy obeys the cavity equations driven by the same input noise, so
    all copies coincide with the intracavity field; the mechanical momentum is
    coupled to each copy with weight G/N and therefore feels G X.

    The output vector w = (q, p, X1out, Y1out, ...) has spectrum
        (E M B + Q) N_in (E M B + Q)^dagger,
    with the input noise vector (0, xi, Xin, Yin) of symmetrized spectrum
    N_in = Diag[0, g(2n + 1), 1/2, 1/2], B its injection into the equations,
    E = Diag[1, 1, sqrt(2k), ...] and Q the direct input-output term.
    """

    def __init__(self, derived: DerivedParams, bank: FilterBank):
        self.derived = derived
        self.bank = bank
        N = len(bank)
        self.n_outputs = N
        dim = 2 * N + 2
        self.dim = dim
        g, k, d, G = derived.gamma_m, derived.kappa, derived.detuning, derived.G

        A = np.zeros((dim, dim))
        A[0, 1] = 1.0
        A[1, 0] = -1.0
        A[1, 1] = -g
        inject = np.zeros((dim, 4))
        inject[0, 0] = inject[1, 1] = 1.0
        direct = np.zeros((dim, 4))
        gain = np.ones(dim)
        root = math.sqrt(2.0 * k)
        for j in range(N):
            x, y = 2 + 2 * j, 3 + 2 * j
            A[1, x] = G / N
            A[x, x] = A[y, y] = -k
            A[x, y] = d
            A[y, x] = -d
            A[y, 0] = G
            inject[x, 2] = inject[y, 3] = root
            direct[x, 2] = direct[y, 3] = 1.0
            gain[x] = gain[y] = root
        self.drift_ext = A
        self.injection = inject
        self.direct = direct
        self.gain = np.diag(gain)
        self.projector_out = np.diag([0.0, 0.0] + [1.0] * (2 * N))

    def input_noise(self, omega: float, markovian: bool = True) -> np.ndarray:
        """Symmetrized spectrum of (0, xi, Xin, Yin)."""
        d = self.derived
        thermal = d.gamma_m * (2.0 * d.n_bar + 1.0) if markovian else float(
            thermal_kernel(omega, d.gamma_m, d.theta)
        )
        return np.diag([0.0, thermal, 0.5, 0.5])

    def diffusion_ext(self, omega: float = 0.0, markovian: bool = True) -> np.ndarray:
        """D_ext = B N_in B^T: optical blocks (including cross blocks) all equal kappa."""
        return self.injection @ self.input_noise(omega, markovian) @ self.injection.T

    def cross_ext(self, omega: float = 0.0, markovian: bool = True) -> np.ndarray:
        """R_out = B N_in Q^T: the correlation between intracavity noise and the reflected input."""
        return self.injection @ self.input_noise(omega, markovian) @ self.direct.T

    def transfer(self, omega: float) -> np.ndarray:
        """M_ext(omega) = (i omega + A_ext)^-1."""
        return np.linalg.inv(1j * omega * np.eye(self.dim) + self.drift_ext)

    def filter_matrix(self, omega: float) -> np.ndarray:
        return self.bank.transfer_matrix(omega)

    def __repr__(self) -> str:
        return f"<ExtendedModel(N={self.n_outputs}, dim={self.dim})>"
