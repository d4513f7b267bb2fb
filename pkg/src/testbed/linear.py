"""Linear-Gaussian test case with an exact Kalman posterior."""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as sla

from src.exceptions import DataError
from src.models.ensemble import EnsembleMatrix, Observations
from src.models.schemas import DataElement, DataKind, DataLayout

MAX_HISTORY = 100
MAX_FORECAST = 200
DAYS_PER_STEP = 30.0


@dataclass(frozen=True)
class LinearGaussianCase:
    """Gaussian d_h, forecast d_f = A d_h, and the analytic posterior of d."""

    prior: EnsembleMatrix
    observations: Observations
    forward: np.ndarray
    prior_mean: np.ndarray
    prior_cov: np.ndarray
    posterior_mean: np.ndarray
    posterior_cov: np.ndarray
    reference: np.ndarray

    @property
    def layout(self) -> DataLayout:
        return self.prior.layout


def kalman_posterior(
    mean: np.ndarray,
    cov: np.ndarray,
    history_indices: np.ndarray,
    d_obs: np.ndarray,
    ce_diag: np.ndarray,
) -> tuple:
    """Exact Gaussian conditioning of d ~ N(mean, cov) on d_obs = d_h + e, e ~ N(0, Ce)."""
    cov_dh = cov[:, history_indices]
    innovation_cov = cov_dh[history_indices] + np.diag(ce_diag)
    gain = sla.solve(innovation_cov, cov_dh.T, assume_a="pos").T
    post_mean = mean + gain @ (d_obs - mean[history_indices])
    post_cov = cov - gain @ cov_dh.T
    return post_mean, 0.5 * (post_cov + post_cov.T)


def linear_layout(n_history: int, n_forecast: int, ce_diag: np.ndarray) -> DataLayout:
    """Single-well layout, history first, one datum per monthly step."""
    std = np.sqrt(ce_diag)
    elements = [
        DataElement(
            id=f"d{i + 1:04d}",
            well_id="W1",
            x=0.0,
            y=0.0,
            time=DAYS_PER_STEP * (i + 1),
            kind=DataKind.OTHER,
            is_history=i < n_history,
            noise_std=float(std[i]) if i < n_history else None,
        )
        for i in range(n_history + n_forecast)
    ]
    return DataLayout(elements=elements)


def _default_cov(n: int) -> np.ndarray:
    lags = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    return np.exp(-lags / 5.0)


def build_linear_case(
    n_history: int = 20,
    n_forecast: int = 40,
    n_members: int = 1000,
    rng_seed: int = 0,
    prior_mean: Optional[np.ndarray] = None,
    prior_cov: Optional[np.ndarray] = None,
    forward: Optional[np.ndarray] = None,
    ce_diag: Optional[np.ndarray] = None,
    d_obs: Optional[np.ndarray] = None,
) -> LinearGaussianCase:
    """Sample a prior ensemble of d = [d_h; A d_h] and condition it analytically.

    Unspecified pieces default to a zero mean, an exponential correlation,
    a random A scaled by 1/sqrt(n_history), Ce = 0.5 I and observations of a
    reference drawn from the prior.
    """
    if not 1 <= n_history <= MAX_HISTORY:
        raise DataError(f"n_history must lie in [1, {MAX_HISTORY}], got {n_history}")
    if not 0 <= n_forecast <= MAX_FORECAST:
        raise DataError(f"n_forecast must lie in [0, {MAX_FORECAST}], got {n_forecast}")

    seeds = np.random.SeedSequence(rng_seed).spawn(3)
    setup_rng, prior_rng, obs_rng = (np.random.default_rng(s) for s in seeds)

    mean_h = np.zeros(n_history) if prior_mean is None else np.asarray(prior_mean, float)
    cov_h = _default_cov(n_history) if prior_cov is None else np.asarray(prior_cov, float)
    if forward is None:
        forward = setup_rng.standard_normal((n_forecast, n_history)) / np.sqrt(n_history)
    forward = np.asarray(forward, dtype=float).reshape(n_forecast, n_history)
    ce_diag = np.full(n_history, 0.5) if ce_diag is None else np.asarray(ce_diag, float)

    if ce_diag.shape != (n_history,) or np.any(ce_diag <= 0):
        raise DataError("Ce diagonal must hold one positive value per history element")
    if cov_h.shape != (n_history, n_history) or not np.allclose(cov_h, cov_h.T):
        raise DataError("prior covariance must be symmetric")
    try:
        chol = sla.cholesky(cov_h, lower=True)
    except np.linalg.LinAlgError as e:
        raise DataError("prior covariance is not positive definite") from e

    lift = np.vstack([np.eye(n_history), forward])
    mean = lift @ mean_h
    cov = lift @ cov_h @ lift.T

    reference_h = mean_h + chol @ setup_rng.standard_normal(n_history)
    reference = lift @ reference_h
    if d_obs is None:
        d_obs = reference_h + np.sqrt(ce_diag) * obs_rng.standard_normal(n_history)
    d_obs = np.asarray(d_obs, dtype=float).reshape(n_history)

    members_h = mean_h[:, None] + chol @ prior_rng.standard_normal((n_history, n_members))
    layout = linear_layout(n_history, n_forecast, ce_diag)
    prior = EnsembleMatrix(data=lift @ members_h, layout=layout)
    observations = Observations.for_layout(layout, d_obs, np.sqrt(ce_diag))

    post_mean, post_cov = kalman_posterior(
        mean, cov, layout.history_indices, d_obs, ce_diag
    )
    return LinearGaussianCase(
        prior=prior,
        observations=observations,
        forward=forward,
        prior_mean=mean,
        prior_cov=cov,
        posterior_mean=post_mean,
        posterior_cov=post_cov,
        reference=reference,
    )
