"""Inversion methods: DSI-ESMDA and PCA + RML."""

from .anamorphosis import Anamorphosis, anamorphose, fit_anamorphosis
from .dsi_esmda import (
    IterationRecord,
    clamp_negative,
    esmda_step,
    kalman_gain,
    run_dsi_esmda,
)
from .dsi_rml import RmlProblem, RmlResult, rml_objective_and_gradient, run_dsi_rml
from .lbfgs import LbfgsOptimizer, LbfgsResult, minimize_lbfgs
from .pca import PcaModel, fit_pca

__all__ = [
    "Anamorphosis",
    "anamorphose",
    "fit_anamorphosis",
    "IterationRecord",
    "clamp_negative",
    "esmda_step",
    "kalman_gain",
    "run_dsi_esmda",
    "RmlProblem",
    "RmlResult",
    "rml_objective_and_gradient",
    "run_dsi_rml",
    "LbfgsOptimizer",
    "LbfgsResult",
    "minimize_lbfgs",
    "PcaModel",
    "fit_pca",
]
