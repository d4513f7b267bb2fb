"""Per-element anamorphosis d_hat_i = cdf1^-1(cdf2(d_pca_i)) from empirical CDFs."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.exceptions import DataError
from src.methods.pca import PcaModel
from src.models.ensemble import EnsembleMatrix


def plotting_positions(n: int) -> np.ndarray:
    """(i - 0.5) / n for i = 1..n."""
    return (np.arange(1, n + 1) - 0.5) / n


@dataclass(frozen=True)
class Anamorphosis:
    """Sorted prior samples (cdf1) and PCA samples (cdf2), one row per element."""

    prior_sorted: np.ndarray
    pca_sorted: np.ndarray

    @property
    def n_elements(self) -> int:
        return self.prior_sorted.shape[0]

    def transform_element(self, value, index: int):
        p = np.interp(
            value, self.pca_sorted[index], plotting_positions(self.pca_sorted.shape[1])
        )
        return np.interp(
            p, plotting_positions(self.prior_sorted.shape[1]), self.prior_sorted[index]
        )

    def transform(self, d: np.ndarray, rows: Optional[np.ndarray] = None) -> np.ndarray:
        """Transform a vector whose entries are the elements ``rows`` (all by default)."""
        d = np.asarray(d, dtype=float)
        rows = np.arange(self.n_elements) if rows is None else np.asarray(rows)
        if d.shape[0] != rows.size:
            raise DataError(f"vector has {d.shape[0]} entries for {rows.size} elements")
        out = np.empty_like(d)
        for k, i in enumerate(rows):
            out[k] = self.transform_element(d[k], int(i))
        return out


def fit_anamorphosis(
    prior: EnsembleMatrix,
    pca: PcaModel,
    n_draws: Optional[int] = None,
    rng_seed: int = 0,
) -> Anamorphosis:
    """Pair each element's prior samples with samples of the PCA prediction.

    The PCA samples come from ``n_draws`` (default N_e) coefficient draws.
    """
    n_draws = n_draws or prior.n_members
    rng = np.random.default_rng(np.random.SeedSequence(rng_seed, spawn_key=(0xCDF,)))
    pca_samples = pca.sample(n_draws, rng)
    return Anamorphosis(
        prior_sorted=np.sort(prior.data, axis=1),
        pca_sorted=np.sort(pca_samples, axis=1),
    )


def anamorphose(value: float, element_index: int, model: Anamorphosis) -> float:
    """Transform one PCA-predicted value of element ``element_index``."""
    if not 0 <= element_index < model.n_elements:
        raise DataError(f"element index {element_index} out of range")
    return float(model.transform_element(value, element_index))
