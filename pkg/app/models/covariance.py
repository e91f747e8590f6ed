# app/models/covariance.py
"""
Covariance Matrix Models

CovarianceMatrix wraps a real symmetric 2n x 2n matrix of symmetrized
quadrature second moments, ordered (q1, p1, q2, p2, ...). The vacuum variance
convention is 1/2 throughout and is carried in every serialization.
"""

from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

VACUUM_CONVENTION = "vacuum_variance=1/2"

SYMMETRY_TOLERANCE = 1e-12


def relative_gap(first: np.ndarray, second: np.ndarray) -> float:
    """
    Largest entrywise difference, each entry scaled by sqrt(V_ii V_jj).

    Covariances are compared on the scale set by the variances of the two
    quadratures they connect, so small cross-correlations next to large
    thermal variances are neither over- nor under-weighted.
    """
    first = np.asarray(first, dtype=float)
    second = np.asarray(second, dtype=float)
    scale = np.sqrt(np.outer(np.abs(np.diag(first)), np.abs(np.diag(first))))
    scale = np.where(scale > 0.0, scale, 1.0)
    return float(np.max(np.abs(first - second) / scale))


class CovarianceMatrix:
    """Symmetric covariance matrix of an n-mode Gaussian state."""

    def __init__(self, matrix: np.ndarray, labels: Optional[Sequence[str]] = None):
        matrix = np.array(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] % 2:
            raise ValueError(f"covariance matrix must be 2n x 2n, got {matrix.shape}")
        self.matrix = matrix
        n_modes = matrix.shape[0] // 2
        self.labels: Tuple[str, ...] = (
            tuple(labels) if labels is not None else tuple(f"mode{i}" for i in range(n_modes))
        )
        if len(self.labels) != n_modes:
            raise ValueError(f"{len(self.labels)} labels for {n_modes} modes")

    @classmethod
    def create(
        cls, matrix: np.ndarray, labels: Optional[Sequence[str]] = None, symmetrize: bool = False
    ) -> "CovarianceMatrix":
        """
        Build a covariance matrix, checking symmetry.

        Args:
            matrix: 2n x 2n real matrix
            labels: One label per mode
            symmetrize: Replace the input by (V + V^T)/2 first (quadrature output)

        Raises:
            ValueError: If the matrix is not symmetric to 1e-12 relative
        """
        matrix = np.array(matrix, dtype=float)
        if symmetrize:
            matrix = 0.5 * (matrix + matrix.T)
        scale = max(1.0, float(np.max(np.abs(matrix))))
        asym = float(np.max(np.abs(matrix - matrix.T)))
        if asym > SYMMETRY_TOLERANCE * scale:
            raise ValueError(f"covariance matrix not symmetric (max asymmetry {asym:.3e})")
        return cls(matrix, labels)

    @classmethod
    def vacuum(cls, n_modes: int, labels: Optional[Sequence[str]] = None) -> "CovarianceMatrix":
        return cls(0.5 * np.eye(2 * n_modes), labels)

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0] // 2

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def index(self, mode) -> int:
        """Mode index from a label or an integer."""
        if isinstance(mode, str):
            return self.labels.index(mode)
        return int(mode)

    def block(self, i, j) -> np.ndarray:
        """2x2 block between modes i and j."""
        a, b = self.index(i), self.index(j)
        return self.matrix[2 * a: 2 * a + 2, 2 * b: 2 * b + 2]

    def submatrix(self, modes: Sequence) -> "CovarianceMatrix":
        """Reduced state of the listed modes (the others are traced out)."""
        idx = [self.index(m) for m in modes]
        rows = [2 * k + r for k in idx for r in (0, 1)]
        return CovarianceMatrix(self.matrix[np.ix_(rows, rows)], [self.labels[k] for k in idx])

    def permuted(self, order: Sequence[int]) -> "CovarianceMatrix":
        return self.submatrix(list(order))

    def to_dict(self) -> Dict:
        return {
            "labels": list(self.labels),
            "convention": VACUUM_CONVENTION,
            "ordering": "q,p per mode",
            "matrix": self.matrix.tolist(),
        }

    def __eq__(self, other) -> bool:
        if not isinstance(other, CovarianceMatrix):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.matrix, other.matrix)

    def __repr__(self) -> str:
        return f"<CovarianceMatrix(modes={list(self.labels)})>"


class EnsembleEstimate:
    """Empirical covariance matrix from a stochastic trajectory ensemble."""

    def __init__(
        self,
        covariance: CovarianceMatrix,
        std_error: np.ndarray,
        n_traj: int,
        dt: float,
        burn_in: float,
        seed: int,
    ):
        self.covariance = covariance
        self.std_error = np.asarray(std_error, dtype=float)
        self.n_traj = n_traj
        self.dt = dt
        self.burn_in = burn_in
        self.seed = seed

    @property
    def matrix(self) -> np.ndarray:
        return self.covariance.matrix

    def z_scores(self, reference: np.ndarray) -> np.ndarray:
        """Entrywise (estimate - reference) / standard error."""
        return (self.matrix - np.asarray(reference, dtype=float)) / self.std_error

    def agrees_with(self, reference: np.ndarray, n_sigma: float = 3.0) -> bool:
        return bool(np.all(np.abs(self.z_scores(reference)) <= n_sigma))

    def to_dict(self) -> Dict:
        return {
            "covariance": self.covariance.to_dict(),
            "std_error": self.std_error.tolist(),
            "n_traj": self.n_traj,
            "dt": self.dt,
            "burn_in": self.burn_in,
            "seed": self.seed,
        }

    def __repr__(self) -> str:
        return f"<EnsembleEstimate(n_traj={self.n_traj}, dt={self.dt:.3g}, seed={self.seed})>"


def labels_for(n_outputs: int) -> List[str]:
    """Mode labels for the mechanics plus n filtered output modes."""
    return ["mech"] + [f"out{k + 1}" for k in range(n_outputs)]
