"""DSI-ESMDA: ensemble smoother with multiple data assimilation in data space.

Every iteration updates each member d_j of the predicted-data ensemble with

    d_j <- d_j + (R o K)(d_obs + sqrt(alpha_k) e_j - d_h,j)

where K is recomputed from the current ensemble and the innovation covariance
is inverted in the Ce-rescaled ensemble subspace.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.core.ensemble import anomaly_matrix, subspace_inverse
from src.core.localization import LocalizationMatrix, build_localization
from src.diagnostics.metrics import normalized_mismatch
from src.exceptions import ConfigError, DataError
from src.models.ensemble import EnsembleMatrix, Observations
from src.models.schemas import SCHEDULE_TOLERANCE, EsmdaConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IterationRecord:
    """State after one MDA iteration."""

    iteration: int
    alpha: float
    svd_rank: int
    mismatch_mean: float
    ensemble: EnsembleMatrix


def check_schedule(alphas: list) -> None:
    """Raise ConfigError unless the inflation coefficients satisfy sum(1/alpha) == 1."""
    if not alphas:
        raise ConfigError("alpha schedule needs at least one coefficient")
    if any(not math.isfinite(a) or a <= 0 for a in alphas):
        raise ConfigError("alpha coefficients must be positive")
    if abs(sum(1.0 / a for a in alphas) - 1.0) > SCHEDULE_TOLERANCE:
        raise ConfigError("alpha schedule does not sum to one")


def _gain(
    delta_d: np.ndarray,
    delta_d_h: np.ndarray,
    ce_diag: np.ndarray,
    alpha: float,
    xi: float,
) -> tuple:
    inverse = subspace_inverse(delta_d_h, ce_diag, alpha, xi)
    # The inverse is symmetric, so K^T = inv (Delta_D_h Delta_D^T).
    gain = inverse.apply(delta_d_h @ delta_d.T).T
    return gain, inverse.rank


def kalman_gain(
    delta_d: np.ndarray,
    delta_d_h: np.ndarray,
    ce_diag: np.ndarray,
    alpha: float,
    xi: float,
) -> np.ndarray:
    """K = Delta_D Delta_D_h^T (Delta_D_h Delta_D_h^T + alpha Ce)^-1, shape N_d x N_dh."""
    delta_d = np.atleast_2d(np.asarray(delta_d, dtype=float))
    delta_d_h = np.atleast_2d(np.asarray(delta_d_h, dtype=float))
    if delta_d.shape[1] != delta_d_h.shape[1]:
        raise DataError(
            f"anomaly matrices disagree on members: {delta_d.shape[1]} vs "
            f"{delta_d_h.shape[1]}"
        )
    gain, _ = _gain(delta_d, delta_d_h, ce_diag, alpha, xi)
    return gain


def draw_perturbations(
    error_std: np.ndarray, n_members: int, rng_seed: int, iteration: int
) -> np.ndarray:
    """Observation perturbations e_j ~ N(0, Ce), one column per member.

    Column j depends only on (rng_seed, iteration, j).
    """
    noise = np.empty((error_std.size, n_members))
    for j in range(n_members):
        rng = np.random.default_rng(
            np.random.SeedSequence(rng_seed, spawn_key=(iteration, j))
        )
        noise[:, j] = rng.standard_normal(error_std.size)
    return noise * error_std[:, None]


def _step(
    ens: EnsembleMatrix,
    obs: Observations,
    alpha: float,
    localization: Optional[LocalizationMatrix],
    rng_seed: int,
    iteration: int,
    energy_xi: float,
    perturb: bool,
) -> tuple:
    obs.check_layout(ens.layout)
    if localization is not None and localization.shape != (
        ens.n_data,
        ens.layout.n_history,
    ):
        raise DataError(
            f"localization matrix {localization.shape} does not match the gain "
            f"({ens.n_data}, {ens.layout.n_history})"
        )

    delta_d = anomaly_matrix(ens)
    delta_d_h = delta_d[ens.layout.history_indices]
    gain, rank = _gain(delta_d, delta_d_h, obs.ce_diag, alpha, energy_xi)
    if localization is not None:
        gain = localization.values * gain

    innovations = obs.values[:, None] - ens.history
    if perturb:
        innovations = innovations + math.sqrt(alpha) * draw_perturbations(
            obs.error_std, ens.n_members, rng_seed, iteration
        )
    return ens.with_data(ens.data + gain @ innovations), rank


def esmda_step(
    ens: EnsembleMatrix,
    obs: Observations,
    alpha: float,
    localization: Optional[LocalizationMatrix] = None,
    rng_seed: int = 0,
    iteration: int = 0,
    energy_xi: float = 0.99,
    perturb: bool = True,
) -> EnsembleMatrix:
    """Apply one smoother update with inflation ``alpha``.

    Args:
        ens: Current ensemble
        obs: Observed history
        alpha: Inflation coefficient of this iteration
        localization: Taper R, or None for the plain gain
        rng_seed: Base seed of the observation perturbations
        iteration: MDA iteration index, part of the perturbation seed
        energy_xi: SVD energy threshold of the subspace inverse
        perturb: Draw e_j when True, use e_j = 0 otherwise

    Returns:
        Updated ensemble
    """
    updated, _ = _step(
        ens, obs, alpha, localization, rng_seed, iteration, energy_xi, perturb
    )
    return updated


def clamp_negative(ens: EnsembleMatrix, kinds: list) -> EnsembleMatrix:
    """Set negative values of the given data kinds to zero."""
    rows = ens.layout.rows_of_kind(kinds)
    if rows.size == 0:
        return ens
    data = ens.data.copy()
    data[rows] = np.maximum(data[rows], 0.0)
    return ens.with_data(data)


def run_dsi_esmda(
    prior: EnsembleMatrix,
    obs: Observations,
    cfg: Optional[EsmdaConfig] = None,
    history: Optional[list] = None,
) -> EnsembleMatrix:
    """Run the full MDA loop and clamp the configured kinds at zero.

    Args:
        prior: Prior predicted-data ensemble
        obs: Observed history
        cfg: Method settings, defaults to four uniform iterations
        history: When given, receives one IterationRecord per iteration

    Returns:
        Posterior ensemble
    """
    cfg = cfg or EsmdaConfig()
    alphas = list(cfg.schedule.alphas)
    check_schedule(alphas)
    obs.check_layout(prior.layout)

    localization = None
    if cfg.localization.enabled:
        localization = build_localization(prior.layout, cfg.localization)

    ens = prior
    for k, alpha in enumerate(alphas):
        ens, rank = _step(
            ens,
            obs,
            alpha,
            localization,
            cfg.rng_seed,
            k,
            cfg.energy_xi,
            cfg.perturb_observations,
        )
        mismatch = normalized_mismatch(ens, obs)
        logger.info(
            "ESMDA iteration %d/%d: alpha=%.4g rank=%d mismatch=%.4g",
            k + 1,
            len(alphas),
            alpha,
            rank,
            mismatch.mean,
        )
        if history is not None:
            history.append(
                IterationRecord(
                    iteration=k + 1,
                    alpha=alpha,
                    svd_rank=rank,
                    mismatch_mean=mismatch.mean,
                    ensemble=ens,
                )
            )

    return clamp_negative(ens, cfg.truncate_negative_kinds)
