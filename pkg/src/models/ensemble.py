"""Numeric containers for ensembles and observations."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.exceptions import DataError
from src.models.schemas import DataLayout


@dataclass(frozen=True)
class EnsembleMatrix:
    """N_d x N_e matrix of predicted-data realizations, one member per column."""

    data: np.ndarray
    layout: DataLayout

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 2:
            raise DataError(f"ensemble must be a 2D matrix, got shape {data.shape}")
        if data.shape[0] != len(self.layout):
            raise DataError(
                f"ensemble has {data.shape[0]} rows but the layout has "
                f"{len(self.layout)} elements"
            )
        if data.shape[1] < 2:
            raise DataError("degenerate ensemble: at least two members are required")
        if not np.all(np.isfinite(data)):
            raise DataError("ensemble contains non-finite values")
        object.__setattr__(self, "data", data)

    @property
    def n_data(self) -> int:
        return self.data.shape[0]

    @property
    def n_members(self) -> int:
        return self.data.shape[1]

    @property
    def history(self) -> np.ndarray:
        """Rows of the history elements (d_h for every member)."""
        return self.data[self.layout.history_indices]

    @property
    def forecast(self) -> np.ndarray:
        return self.data[self.layout.forecast_indices]

    def mean(self) -> np.ndarray:
        return self.data.mean(axis=1)

    def with_data(self, data: np.ndarray) -> "EnsembleMatrix":
        """Same layout, new member values."""
        return EnsembleMatrix(data=data, layout=self.layout)


@dataclass(frozen=True)
class Observations:
    """Observed history d_obs with the diagonal of Ce^(1/2)."""

    values: np.ndarray
    error_std: np.ndarray

    def __post_init__(self) -> None:
        values = np.atleast_1d(np.asarray(self.values, dtype=float))
        error_std = np.atleast_1d(np.asarray(self.error_std, dtype=float))
        if values.ndim != 1 or values.shape != error_std.shape:
            raise DataError(
                f"observation values ({values.shape}) and error_std "
                f"({error_std.shape}) must be vectors of equal length"
            )
        if not np.all(np.isfinite(values)):
            raise DataError("observations contain non-finite values")
        if not np.all(np.isfinite(error_std)) or np.any(error_std <= 0):
            raise DataError("observation error_std must be strictly positive")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "error_std", error_std)

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def ce_diag(self) -> np.ndarray:
        """Diagonal of the total data-error covariance Ce."""
        return self.error_std**2

    @classmethod
    def for_layout(
        cls,
        layout: DataLayout,
        values: np.ndarray,
        error_std: Optional[np.ndarray] = None,
    ) -> "Observations":
        """Build observations over the layout's history elements.

        Missing error standard deviations fall back to the layout's noise_std.
        """
        if error_std is None:
            error_std = layout.history_noise_std
        obs = cls(values=values, error_std=error_std)
        obs.check_layout(layout)
        return obs

    def check_layout(self, layout: DataLayout) -> None:
        if len(self) != layout.n_history:
            raise DataError(
                f"{len(self)} observations for {layout.n_history} history elements"
            )
