"""Synthetic forward models standing in for a reservoir simulator."""

from .decline import DeclineCurveCase, DeclineParameters, build_decline_case
from .linear import LinearGaussianCase, build_linear_case, kalman_posterior

__all__ = [
    "DeclineCurveCase",
    "DeclineParameters",
    "build_decline_case",
    "LinearGaussianCase",
    "build_linear_case",
    "kalman_posterior",
]
