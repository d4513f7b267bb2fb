"""Ensemble algebra shared by both inversion methods."""

from .ensemble import (
    SubspaceInverse,
    TruncatedSvd,
    anomaly_matrix,
    subspace_inverse,
    subspace_inverse_apply,
    truncated_svd_energy,
)
from .localization import (
    LocalizationMatrix,
    build_localization,
    composite_ratio,
    gaspari_cohn,
    rotate,
)

__all__ = [
    "SubspaceInverse",
    "TruncatedSvd",
    "anomaly_matrix",
    "subspace_inverse",
    "subspace_inverse_apply",
    "truncated_svd_energy",
    "LocalizationMatrix",
    "build_localization",
    "composite_ratio",
    "gaspari_cohn",
    "rotate",
]
