"""PCA parameterization of the predicted-data vector, d = mean + C^(1/2) x."""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.core.ensemble import anomaly_matrix, truncated_svd_energy
from src.exceptions import DataError
from src.models.ensemble import EnsembleMatrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PcaModel:
    """Truncated PCA of a prior ensemble.

    ``half_cov`` is scale * U_r Sigma_r; ``scale`` is all ones unless the
    model was fitted on Ce-rescaled anomalies.
    """

    mean: np.ndarray
    left_vectors: np.ndarray
    singular_values: np.ndarray
    scale: np.ndarray
    history_indices: np.ndarray

    @property
    def rank(self) -> int:
        return int(self.singular_values.size)

    @property
    def half_cov(self) -> np.ndarray:
        return self.scale[:, None] * self.left_vectors * self.singular_values

    @property
    def mean_h(self) -> np.ndarray:
        return self.mean[self.history_indices]

    @property
    def half_cov_h(self) -> np.ndarray:
        return self.half_cov[self.history_indices]

    def predict(self, x: np.ndarray) -> np.ndarray:
        """Map coefficients (vector or rank x n matrix) to data vectors."""
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return self.mean + self.half_cov @ x
        return self.mean[:, None] + self.half_cov @ x

    def coefficients(self, d: np.ndarray) -> np.ndarray:
        """Left inverse of :meth:`predict` on the span of the model."""
        d = np.asarray(d, dtype=float)
        centered = d - (self.mean if d.ndim == 1 else self.mean[:, None])
        scaled = centered / (self.scale if d.ndim == 1 else self.scale[:, None])
        projected = self.left_vectors.T @ scaled
        if d.ndim == 1:
            return projected / self.singular_values
        return projected / self.singular_values[:, None]

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Draw ``n`` data vectors with x ~ N(0, I)."""
        return self.predict(rng.standard_normal((self.rank, n)))


def _rescaling(
    prior: EnsembleMatrix, ce_diag: Optional[np.ndarray]
) -> np.ndarray:
    scale = np.std(prior.data, axis=1, ddof=1)
    scale[scale == 0] = 1.0
    if ce_diag is None:
        ce_diag = prior.layout.history_noise_std**2
    ce_diag = np.asarray(ce_diag, dtype=float)
    if ce_diag.shape != (prior.layout.n_history,):
        raise DataError(
            f"Ce diagonal has {ce_diag.size} entries for "
            f"{prior.layout.n_history} history elements"
        )
    scale[prior.layout.history_indices] = np.sqrt(ce_diag)
    return scale


def fit_pca(
    prior: EnsembleMatrix,
    xi: float = 0.99,
    rescale_by_ce: bool = False,
    ce_diag: Optional[np.ndarray] = None,
) -> PcaModel:
    """Fit mean and truncated half covariance of the prior ensemble.

    With ``rescale_by_ce`` the anomalies are divided by Ce^(1/2) on history
    rows (elements without an observation error use their prior spread)
    before the SVD, and the factor is restored afterwards.
    """
    delta_d = anomaly_matrix(prior)
    if rescale_by_ce:
        scale = _rescaling(prior, ce_diag)
    else:
        scale = np.ones(prior.n_data)

    svd = truncated_svd_energy(
        delta_d / scale[:, None], xi, max_rank=prior.n_members - 1
    )
    logger.info(
        "PCA keeps %d components (%.4f of singular value energy)",
        svd.rank,
        svd.energy_kept,
    )
    return PcaModel(
        mean=prior.mean(),
        left_vectors=svd.left_vectors,
        singular_values=svd.singular_values,
        scale=scale,
        history_indices=prior.layout.history_indices,
    )
