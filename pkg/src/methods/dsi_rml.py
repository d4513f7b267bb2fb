"""Data-space inversion by randomized maximum likelihood in PCA coefficient space.

Each posterior sample minimizes

    O(x) = 1/2 (d_h(x) - d_obs*)^T Ce^-1 (d_h(x) - d_obs*) + 1/2 (x - x*)^T (x - x*)

with d_obs* ~ N(d_obs, Ce) and x* ~ N(0, I). With anamorphosis the gradient
belongs to the untransformed objective, so the optimizer runs on that surrogate
and the transformed value is reported at its minimizer.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from joblib import Parallel, delayed

from src.exceptions import ConfigError, DataError
from src.methods.anamorphosis import Anamorphosis, fit_anamorphosis
from src.methods.lbfgs import LbfgsOptimizer
from src.methods.pca import PcaModel, fit_pca
from src.models.ensemble import EnsembleMatrix, Observations
from src.models.schemas import DataLayout, RmlConfig, SampleStatus

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RmlProblem:
    """One RML minimization: perturbed targets plus the shared PCA model."""

    perturbed_obs: np.ndarray
    prior_coeff: np.ndarray
    pca: PcaModel
    ce_diag: np.ndarray
    anamorphosis: Optional[Anamorphosis] = None

    def __post_init__(self) -> None:
        n_history = self.pca.history_indices.size
        if self.perturbed_obs.shape != (n_history,) or self.ce_diag.shape != (n_history,):
            raise DataError(
                f"RML problem expects {n_history} history values, got "
                f"{self.perturbed_obs.shape} observations and {self.ce_diag.shape} Ce"
            )
        if self.prior_coeff.shape != (self.pca.rank,):
            raise DataError(
                f"RML problem expects {self.pca.rank} coefficients, "
                f"got {self.prior_coeff.shape}"
            )


def rml_objective_and_gradient(x: np.ndarray, prob: RmlProblem) -> tuple:
    """Objective value and its analytic gradient.

    The value uses the anamorphosed prediction when enabled; the gradient
    always uses the raw PCA prediction.
    """
    half_cov_h = prob.pca.half_cov_h
    raw = prob.pca.mean_h + half_cov_h @ x
    predicted = raw
    if prob.anamorphosis is not None:
        predicted = prob.anamorphosis.transform(raw, prob.pca.history_indices)

    misfit = predicted - prob.perturbed_obs
    prior_term = x - prob.prior_coeff
    value = 0.5 * float(misfit @ (misfit / prob.ce_diag)) + 0.5 * float(
        prior_term @ prior_term
    )
    gradient = half_cov_h.T @ ((raw - prob.perturbed_obs) / prob.ce_diag) + prior_term
    return value, gradient


@dataclass
class RmlResult:
    """Posterior samples with the convergence record of every sample."""

    data: np.ndarray
    layout: DataLayout
    samples: list = field(default_factory=list)
    pca_rank: int = 0

    @property
    def posterior(self) -> EnsembleMatrix:
        """Samples as an ensemble; needs at least two of them."""
        return EnsembleMatrix(data=self.data, layout=self.layout)

    @property
    def unconverged(self) -> list:
        return [s for s in self.samples if not s.converged]


def _draw_targets(
    obs: Observations, rank: int, rng_seed: int, index: int
) -> tuple:
    rng = np.random.default_rng(np.random.SeedSequence(rng_seed, spawn_key=(index,)))
    perturbed = obs.values + obs.error_std * rng.standard_normal(len(obs))
    prior_coeff = rng.standard_normal(rank)
    return perturbed, prior_coeff


def run_dsi_rml(
    prior: EnsembleMatrix,
    obs: Observations,
    cfg: Optional[RmlConfig] = None,
) -> RmlResult:
    """Draw ``cfg.n_samples`` posterior members by independent RML minimizations.

    Args:
        prior: Prior predicted-data ensemble
        obs: Observed history
        cfg: PCA, anamorphosis and optimizer settings

    Returns:
        RmlResult; samples that did not converge stay in the posterior and
        are flagged in ``samples``.
    """
    cfg = cfg or RmlConfig()
    if cfg.n_samples < 1:
        raise ConfigError("rml.samples must be at least 1")
    obs.check_layout(prior.layout)

    pca = fit_pca(prior, cfg.energy_xi, cfg.rescale_by_ce, obs.ce_diag)
    anamorphosis = None
    if cfg.anamorphosis:
        anamorphosis = fit_anamorphosis(prior, pca, cfg.n_cdf_draws, cfg.rng_seed)

    optimizer = LbfgsOptimizer(
        memory=cfg.memory,
        max_iter=cfg.max_iter,
        gtol=cfg.gtol,
        c1=cfg.c1,
        c2=cfg.c2,
    )

    def solve(index: int) -> tuple:
        perturbed, prior_coeff = _draw_targets(obs, pca.rank, cfg.rng_seed, index)
        problem = RmlProblem(
            perturbed_obs=perturbed,
            prior_coeff=prior_coeff,
            pca=pca,
            ce_diag=obs.ce_diag,
            anamorphosis=anamorphosis,
        )
        surrogate = replace(problem, anamorphosis=None)
        result = optimizer.minimize(
            lambda x: rml_objective_and_gradient(x, surrogate), prior_coeff
        )
        objective = result.fun
        if anamorphosis is not None:
            objective, _ = rml_objective_and_gradient(result.x, problem)
        status = SampleStatus(
            index=index,
            converged=result.converged,
            iterations=result.iterations,
            grad_norm=result.grad_norm,
            objective=objective,
            message=result.message,
        )
        return result.x, status

    outcomes = Parallel(n_jobs=cfg.n_jobs, prefer="threads")(
        delayed(solve)(j) for j in range(cfg.n_samples)
    )

    coefficients = np.column_stack([x for x, _ in outcomes])
    posterior = pca.predict(coefficients)
    if anamorphosis is not None:
        posterior = np.column_stack(
            [anamorphosis.transform(posterior[:, j]) for j in range(posterior.shape[1])]
        )
    samples = [status for _, status in outcomes]

    failed = [s.index for s in samples if not s.converged]
    if failed:
        logger.warning(
            "%d of %d RML samples did not converge: %s",
            len(failed),
            len(samples),
            failed[:10],
        )
    return RmlResult(
        data=posterior,
        layout=prior.layout,
        samples=samples,
        pca_rank=pca.rank,
    )

