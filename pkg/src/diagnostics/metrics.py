"""Quality measures for prior and posterior ensembles."""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy.integrate import trapezoid

from src.exceptions import DataError
from src.models.ensemble import EnsembleMatrix, Observations
from src.models.schemas import DataKind

logger = logging.getLogger(__name__)

DEFAULT_PROBS = (0.1, 0.5, 0.9)

EnsembleLike = Union[EnsembleMatrix, np.ndarray]


def _as_array(ens: EnsembleLike) -> np.ndarray:
    if isinstance(ens, EnsembleMatrix):
        return ens.data
    data = np.asarray(ens, dtype=float)
    if data.ndim == 1:
        data = data[None, :]
    if data.ndim != 2:
        raise DataError(f"ensemble must be a 2D matrix, got shape {data.shape}")
    return data


@dataclass(frozen=True)
class MismatchReport:
    """Normalized data mismatch of every member with its mean and spread."""

    per_member: np.ndarray
    mean: float
    std: float

    def as_row(self) -> dict:
        return {"mean": self.mean, "std": self.std}


def normalized_mismatch(ens: EnsembleMatrix, obs: Observations) -> MismatchReport:
    """O = 1/(2 N_dh) * sum(((d_obs - d_h) / sigma)^2) per member.

    The spread is the sample standard deviation across members.
    """
    n_history = ens.layout.n_history
    if n_history == 0:
        raise DataError("normalized mismatch needs at least one history element")
    obs.check_layout(ens.layout)

    residual = (obs.values[:, None] - ens.history) / obs.error_std[:, None]
    per_member = np.sum(residual**2, axis=0) / (2.0 * n_history)
    std = float(np.std(per_member, ddof=1)) if per_member.size > 1 else 0.0
    return MismatchReport(per_member=per_member, mean=float(per_member.mean()), std=std)


@dataclass(frozen=True)
class PercentileBand:
    """Per-element percentiles; row i of ``values`` holds probability ``probs[i]``."""

    probs: tuple
    values: np.ndarray

    def at(self, prob: float) -> np.ndarray:
        for i, p in enumerate(self.probs):
            if np.isclose(p, prob):
                return self.values[i]
        raise KeyError(f"probability {prob} not in band {self.probs}")

    @property
    def p10(self) -> np.ndarray:
        return self.at(0.1)

    @property
    def p50(self) -> np.ndarray:
        return self.at(0.5)

    @property
    def p90(self) -> np.ndarray:
        return self.at(0.9)

    def width(self, lo: float = 0.1, hi: float = 0.9) -> np.ndarray:
        return self.at(hi) - self.at(lo)


def percentile_band(
    ens: EnsembleLike, probs: Sequence[float] = DEFAULT_PROBS
) -> PercentileBand:
    """Empirical per-element quantiles with linear interpolation of order statistics."""
    probs = tuple(float(p) for p in probs)
    if not probs or any(not 0 < p < 1 for p in probs):
        raise DataError(f"percentile probabilities must lie in (0, 1), got {probs}")
    data = _as_array(ens)
    if data.shape[1] < 2:
        raise DataError("degenerate ensemble: at least two members are required")
    values = np.percentile(data, [100.0 * p for p in probs], axis=1, method="linear")
    return PercentileBand(probs=probs, values=np.atleast_2d(values))


def coverage(
    ens: EnsembleLike,
    reference: np.ndarray,
    lo: float = 0.1,
    hi: float = 0.9,
    rows: Optional[np.ndarray] = None,
) -> float:
    """Fraction of elements whose reference value falls inside [P_lo, P_hi].

    ``rows`` restricts the count to a subset of elements (e.g. the forecast).
    """
    data = _as_array(ens)
    reference = np.asarray(reference, dtype=float)
    if reference.shape != (data.shape[0],):
        raise DataError(
            f"reference has {reference.size} values for {data.shape[0]} elements"
        )
    band = percentile_band(data, (lo, hi))
    inside = (reference >= band.values[0]) & (reference <= band.values[1])
    if rows is not None:
        inside = inside[np.asarray(rows, dtype=int)]
    if inside.size == 0:
        return 0.0
    return float(np.mean(inside))


def cumulative_production(
    ens: EnsembleMatrix, kind: DataKind = DataKind.OIL_RATE
) -> np.ndarray:
    """Field cumulative volume of a rate ``kind``, one value per member.

    Each well's rate series is integrated over time with the trapezoid rule,
    then wells are summed.
    """
    layout = ens.layout
    rows = layout.rows_of_kind([kind])
    total = np.zeros(ens.n_members)
    if rows.size == 0:
        return total

    times = layout.times
    wells = [layout.elements[i].well_id for i in rows]
    for well in sorted(set(wells)):
        well_rows = np.array([r for r, w in zip(rows, wells) if w == well], dtype=int)
        well_rows = well_rows[np.argsort(times[well_rows], kind="stable")]
        if well_rows.size < 2:
            continue
        total += trapezoid(ens.data[well_rows], x=times[well_rows], axis=0)
    return total


def spread_ratio(prior: EnsembleLike, posterior: EnsembleLike) -> np.ndarray:
    """Posterior over prior standard deviation per element.

    Elements with no prior spread report 1 when the posterior has none either.
    """
    prior_std = np.std(_as_array(prior), axis=1, ddof=1)
    post_std = np.std(_as_array(posterior), axis=1, ddof=1)
    if prior_std.shape != post_std.shape:
        raise DataError("prior and posterior ensembles have different element counts")
    ratio = np.ones_like(prior_std)
    positive = prior_std > 0
    ratio[positive] = post_std[positive] / prior_std[positive]
    ratio[~positive & (post_std > 0)] = np.inf
    return ratio
