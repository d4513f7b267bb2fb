"""Spatio-temporal Gaspari-Cohn localization of the Kalman gain."""

import logging
from dataclasses import dataclass
from typing import Union

import numpy as np

from src.exceptions import DataError, NumericalError
from src.models.schemas import DataElement, DataLayout, LocalizationSpec

logger = logging.getLogger(__name__)

ArrayOrFloat = Union[float, np.ndarray]


def gaspari_cohn(ratio: ArrayOrFloat) -> ArrayOrFloat:
    """Fifth-order compactly supported taper, 1 at 0 and 0 from 2 onwards.

    Accepts a scalar or an array of non-negative distance ratios h/L.
    """
    r = np.asarray(ratio, dtype=float)
    if np.any(np.isnan(r)) or np.any(r < 0):
        raise NumericalError("Gaspari-Cohn ratio must be non-negative")

    taper = np.zeros_like(r)
    inner = r <= 1.0
    outer = (r > 1.0) & (r < 2.0)

    ri = r[inner]
    taper[inner] = (((-0.25 * ri + 0.5) * ri + 0.625) * ri - 5.0 / 3.0) * ri**2 + 1.0
    ro = r[outer]
    taper[outer] = (
        ((((ro / 12.0 - 0.5) * ro + 0.625) * ro + 5.0 / 3.0) * ro - 5.0) * ro
        + 4.0
        - 2.0 / (3.0 * ro)
    )

    taper = np.clip(taper, 0.0, 1.0)
    if taper.ndim == 0:
        return float(taper)
    return taper


def rotate(dx: ArrayOrFloat, dy: ArrayOrFloat, theta: float) -> tuple:
    """Rotate displacements counterclockwise by ``theta`` radians."""
    c, s = np.cos(theta), np.sin(theta)
    return c * dx - s * dy, s * dx + c * dy


def _ratio(dx, dy, dt, spec: LocalizationSpec):
    dxp, dyp = rotate(dx, dy, spec.theta)
    return np.sqrt((dxp / spec.lx) ** 2 + (dyp / spec.ly) ** 2 + (dt / spec.t) ** 2)


def composite_ratio(a: DataElement, b: DataElement, spec: LocalizationSpec) -> float:
    """Anisotropic space-time distance h/L between two data elements."""
    if not spec.enabled:
        raise DataError("composite ratio needs an enabled localization spec")
    return float(_ratio(b.x - a.x, b.y - a.y, b.time - a.time, spec))


@dataclass(frozen=True)
class LocalizationMatrix:
    """Taper R, one row per element of d and one column per history element."""

    values: np.ndarray

    @property
    def shape(self) -> tuple:
        return self.values.shape

    @property
    def is_trivial(self) -> bool:
        return bool(np.all(self.values == 1.0))


def build_localization(layout: DataLayout, spec: LocalizationSpec) -> LocalizationMatrix:
    """Evaluate the taper between every element of d and every history element."""
    history = layout.history_indices
    if history.size == 0:
        raise DataError("localization needs at least one history element")
    if not spec.enabled:
        return LocalizationMatrix(values=np.ones((layout.n_data, history.size)))

    coords = layout.coordinates
    times = layout.times
    dx = coords[history, 0][None, :] - coords[:, 0][:, None]
    dy = coords[history, 1][None, :] - coords[:, 1][:, None]
    dt = times[history][None, :] - times[:, None]

    values = gaspari_cohn(_ratio(dx, dy, dt, spec))
    logger.debug(
        "localization matrix %s, %.1f%% nonzero",
        values.shape,
        100.0 * np.count_nonzero(values) / values.size,
    )
    return LocalizationMatrix(values=values)
