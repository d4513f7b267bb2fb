"""Ensemble quality diagnostics."""

from .metrics import (
    DEFAULT_PROBS,
    MismatchReport,
    PercentileBand,
    coverage,
    cumulative_production,
    normalized_mismatch,
    percentile_band,
    spread_ratio,
)

__all__ = [
    "DEFAULT_PROBS",
    "MismatchReport",
    "PercentileBand",
    "coverage",
    "cumulative_production",
    "normalized_mismatch",
    "percentile_band",
    "spread_ratio",
]
