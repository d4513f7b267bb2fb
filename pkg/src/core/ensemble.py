"""Ensemble statistics, energy-truncated SVD and the subspace inverse.

All functions are pure; matrices follow the columns-as-members orientation.
"""

import logging
from dataclasses import dataclass
from typing import Literal, Optional, Union

import numpy as np
import scipy.linalg as sla

from src.exceptions import DataError, NumericalError
from src.models.ensemble import EnsembleMatrix

logger = logging.getLogger(__name__)

# Relative level under which a singular value counts as zero.
_ZERO_SINGULAR = 1e-12


@dataclass(frozen=True)
class TruncatedSvd:
    """Leading N_r singular triplets of a matrix."""

    left_vectors: np.ndarray
    singular_values: np.ndarray
    right_vectors: np.ndarray
    energy_kept: float

    @property
    def rank(self) -> int:
        return int(self.singular_values.shape[0])

    def reconstruct(self) -> np.ndarray:
        """U_r Sigma_r V_r^T."""
        return (self.left_vectors * self.singular_values) @ self.right_vectors.T


def anomaly_matrix(
    ens: Union[EnsembleMatrix, np.ndarray],
    subset: Literal["all", "history"] = "all",
) -> np.ndarray:
    """Return (d_j - mean) / sqrt(N_e - 1) for every member j.

    With ``subset="history"`` only the history rows are kept; this needs an
    EnsembleMatrix since the history rows come from its layout.
    """
    if isinstance(ens, EnsembleMatrix):
        data = ens.history if subset == "history" else ens.data
    else:
        if subset == "history":
            raise DataError("history anomalies need an EnsembleMatrix with a layout")
        data = np.asarray(ens, dtype=float)
        if data.ndim != 2:
            raise DataError(f"ensemble must be a 2D matrix, got shape {data.shape}")
    n_members = data.shape[1]
    if n_members < 2:
        raise DataError("degenerate ensemble: at least two members are required")
    centered = data - data.mean(axis=1, keepdims=True)
    # Constant rows are exactly zero, whatever the rounding of the mean.
    centered[np.ptp(data, axis=1) == 0] = 0.0
    return centered / np.sqrt(n_members - 1)


def truncated_svd_energy(
    a: np.ndarray, xi: float, max_rank: Optional[int] = None
) -> TruncatedSvd:
    """Keep the fewest leading singular values holding a fraction ``xi`` of the energy.

    Energy is the plain sum of singular values. ``max_rank`` caps the number of
    singular values considered (N_e - 1 for anomaly matrices).
    """
    if not 0 < xi <= 1:
        raise NumericalError(f"energy threshold must lie in (0, 1], got {xi}")
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or not np.all(np.isfinite(a)):
        raise NumericalError("SVD input must be a finite 2D matrix")

    u, s, vt = sla.svd(a, full_matrices=False, lapack_driver="gesdd")
    if max_rank is not None:
        u, s, vt = u[:, :max_rank], s[:max_rank], vt[:max_rank]

    if s.size == 0 or s[0] <= 0:
        raise NumericalError("rank zero: matrix has no nonzero singular value")
    nonzero = int(np.sum(s > _ZERO_SINGULAR * s[0] * max(a.shape)))
    u, s, vt = u[:, :nonzero], s[:nonzero], vt[:nonzero]

    cumulative = np.cumsum(s) / np.sum(s)
    # Round-off can leave the last entry a hair under 1.
    rank = int(np.searchsorted(cumulative, xi - 1e-12, side="left")) + 1
    rank = min(rank, s.size)
    logger.debug("truncated SVD keeps %d of %d singular values", rank, s.size)
    return TruncatedSvd(
        left_vectors=u[:, :rank],
        singular_values=s[:rank],
        right_vectors=vt[:rank].T,
        energy_kept=float(cumulative[rank - 1]),
    )


@dataclass(frozen=True)
class SubspaceInverse:
    """Factored (Delta_D_h Delta_D_h^T + alpha Ce)^-1 as  B diag(w) B^T.

    ``rank`` is zero when Delta_D_h vanishes; the operator is then the exact
    diagonal inverse 1 / (alpha Ce).
    """

    basis: np.ndarray
    weights: np.ndarray
    diagonal: Optional[np.ndarray]
    rank: int

    def apply(self, rhs: np.ndarray) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        if self.diagonal is not None:
            scale = self.diagonal if rhs.ndim == 1 else self.diagonal[:, None]
            return scale * rhs
        projected = self.basis.T @ rhs
        if rhs.ndim == 1:
            return self.basis @ (self.weights * projected)
        return self.basis @ (self.weights[:, None] * projected)

    def dense(self) -> np.ndarray:
        if self.diagonal is not None:
            return np.diag(self.diagonal)
        return (self.basis * self.weights) @ self.basis.T


def subspace_inverse(
    delta_d_h: np.ndarray, ce_diag: np.ndarray, alpha: float, xi: float
) -> SubspaceInverse:
    """Build the rescaled subspace inverse of Delta_D_h Delta_D_h^T + alpha Ce.

    S = Ce^(-1/2) Delta_D_h is truncated at energy ``xi`` and the inverse is
    Ce^(-1/2) U_r (Sigma_r^2 + alpha I)^-1 U_r^T Ce^(-1/2). The complement of
    span(U_r) is dropped.
    """
    delta_d_h = np.atleast_2d(np.asarray(delta_d_h, dtype=float))
    ce_diag = np.atleast_1d(np.asarray(ce_diag, dtype=float))
    if not np.isfinite(alpha) or alpha <= 0:
        raise NumericalError(f"inflation coefficient must be positive, got {alpha}")
    if np.any(ce_diag <= 0) or not np.all(np.isfinite(ce_diag)):
        raise NumericalError("Ce diagonal must be strictly positive")
    if delta_d_h.shape[0] != ce_diag.shape[0]:
        raise DataError(
            f"anomaly rows ({delta_d_h.shape[0]}) do not match Ce ({ce_diag.shape[0]})"
        )

    inv_sqrt = 1.0 / np.sqrt(ce_diag)
    scaled = delta_d_h * inv_sqrt[:, None]
    if not np.any(scaled):
        return SubspaceInverse(
            basis=np.empty((ce_diag.size, 0)),
            weights=np.empty(0),
            diagonal=1.0 / (alpha * ce_diag),
            rank=0,
        )

    svd = truncated_svd_energy(scaled, xi)
    basis = svd.left_vectors * inv_sqrt[:, None]
    weights = 1.0 / (svd.singular_values**2 + alpha)
    return SubspaceInverse(basis=basis, weights=weights, diagonal=None, rank=svd.rank)


def subspace_inverse_apply(
    delta_d_h: np.ndarray,
    ce_diag: np.ndarray,
    alpha: float,
    xi: float,
    rhs: np.ndarray,
) -> np.ndarray:
    """(Delta_D_h Delta_D_h^T + alpha Ce)^-1 rhs by subspace inversion.

    ``rhs`` may be a vector or a matrix whose columns are right-hand sides.
    """
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[0] != np.atleast_1d(ce_diag).shape[0]:
        raise DataError(
            f"right-hand side has {rhs.shape[0]} rows, expected "
            f"{np.atleast_1d(ce_diag).shape[0]}"
        )
    return subspace_inverse(delta_d_h, ce_diag, alpha, xi).apply(rhs)
