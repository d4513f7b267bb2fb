"""Pytest configuration and shared fixtures.

Fixtures build small layouts, ensembles and observations in memory; the
file-based fixtures write them to a temporary directory.
"""

import numpy as np
import pytest

from src.models.ensemble import EnsembleMatrix, Observations
from src.models.schemas import DataLayout
from src.utils.file_handler import FileHandler
from tests.helpers import make_layout


@pytest.fixture
def rng() -> np.random.Generator:
    """Fixed-seed generator."""
    return np.random.default_rng(20240101)


@pytest.fixture
def minimal_layout() -> DataLayout:
    """One history and one forecast element."""
    return make_layout(1, 1)


@pytest.fixture
def small_case(rng):
    """Random 4-history / 3-forecast ensemble of 12 members with observations."""
    layout = make_layout(4, 3, noise_std=0.5)
    ensemble = EnsembleMatrix(data=rng.standard_normal((7, 12)), layout=layout)
    observations = Observations.for_layout(layout, rng.standard_normal(4))
    return layout, ensemble, observations


@pytest.fixture
def case_files(tmp_path, small_case):
    """The small case written as layout, ensemble and observation CSVs."""
    layout, ensemble, observations = small_case
    handler = FileHandler(str(tmp_path / "inputs"))
    paths = {
        "layout": handler.write_layout("layout.csv", layout),
        "ensemble": handler.write_ensemble("ensemble.csv", ensemble.data, layout),
        "observations": handler.write_observations("observations.csv", observations, layout),
        "reference": handler.write_reference(
            "reference.csv", ensemble.data[:, 0], layout
        ),
    }
    return paths


def pytest_configure(config):
    """Configure custom markers."""
    config.addinivalue_line("markers", "slow: long-running statistical test")
    config.addinivalue_line("markers", "acceptance: end-to-end acceptance criterion")
    config.addinivalue_line("markers", "property: randomized property check")
