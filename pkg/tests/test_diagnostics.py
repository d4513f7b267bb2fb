"""Tests for mismatch, percentile, coverage and cumulative statistics."""

import numpy as np
import pytest

from src.diagnostics.metrics import (
    coverage,
    cumulative_production,
    normalized_mismatch,
    percentile_band,
    spread_ratio,
)
from src.exceptions import DataError
from src.models.ensemble import EnsembleMatrix, Observations
from src.models.schemas import DataKind, DataLayout
from tests.helpers import make_element, make_layout


def _offset_ensemble(n_sigma: float):
    layout = make_layout(6, 2, noise_std=0.4)
    obs = Observations.for_layout(layout, np.linspace(-1.0, 1.0, 6))
    data = np.zeros((8, 3))
    data[:6] = obs.values[:, None] + n_sigma * 0.4 * np.array([1.0, -1.0, 1.0])
    return EnsembleMatrix(data=data, layout=layout), obs


class TestNormalizedMismatch:
    """normalized_mismatch."""

    @pytest.mark.parametrize("n_sigma, expected", [(0.0, 0.0), (1.0, 0.5), (2.0, 2.0), (3.0, 4.5)])
    def test_calibration_values(self, n_sigma, expected):
        ens, obs = _offset_ensemble(n_sigma)
        report = normalized_mismatch(ens, obs)
        np.testing.assert_allclose(report.per_member, expected, rtol=1e-12, atol=1e-15)
        assert report.mean == pytest.approx(expected)
        assert report.std == pytest.approx(0.0, abs=1e-12)

    def test_spread_uses_sample_std(self):
        layout = make_layout(1, 0)
        obs = Observations.for_layout(layout, np.zeros(1))
        ens = EnsembleMatrix(data=np.array([[0.0, 1.0, 2.0]]), layout=layout)
        report = normalized_mismatch(ens, obs)
        np.testing.assert_allclose(report.per_member, [0.0, 0.5, 2.0])
        assert report.std == pytest.approx(np.std([0.0, 0.5, 2.0], ddof=1))
        assert report.as_row() == {"mean": report.mean, "std": report.std}

    def test_needs_history(self):
        layout = DataLayout(elements=[make_element("f", is_history=False)])
        ens = EnsembleMatrix(data=np.zeros((1, 2)), layout=layout)
        with pytest.raises(DataError):
            normalized_mismatch(ens, Observations(values=np.zeros(1), error_std=np.ones(1)))

    def test_observation_count_must_match(self, small_case):
        _, prior, _ = small_case
        with pytest.raises(DataError):
            normalized_mismatch(prior, Observations(values=np.zeros(2), error_std=np.ones(2)))

    @pytest.mark.property
    @pytest.mark.parametrize("seed", range(5))
    def test_invariant_under_joint_rescaling(self, seed):
        rng = np.random.default_rng(seed)
        n_history, n_members = int(rng.integers(1, 10)), int(rng.integers(2, 20))
        sigma, scale = float(rng.uniform(0.1, 3.0)), float(rng.uniform(1e-3, 1e3))
        data = rng.normal(size=(n_history + 2, n_members))
        values = rng.normal(size=n_history)

        layout = make_layout(n_history, 2, noise_std=sigma)
        scaled_layout = make_layout(n_history, 2, noise_std=scale * sigma)
        base = normalized_mismatch(
            EnsembleMatrix(data=data, layout=layout), Observations.for_layout(layout, values)
        )
        scaled = normalized_mismatch(
            EnsembleMatrix(data=scale * data, layout=scaled_layout),
            Observations.for_layout(scaled_layout, scale * values),
        )
        np.testing.assert_allclose(scaled.per_member, base.per_member, rtol=1e-10)


class TestPercentileBand:
    """percentile_band."""

    def test_median_of_three(self):
        band = percentile_band(np.array([[3.0, 1.0, 2.0]]))
        assert band.p50[0] == pytest.approx(2.0)

    def test_constant_ensemble(self):
        band = percentile_band(np.full((2, 5), 7.5))
        np.testing.assert_array_equal(band.values, 7.5)
        np.testing.assert_array_equal(band.width(), 0.0)

    def test_linear_interpolation_of_order_statistics(self):
        band = percentile_band(np.arange(101.0)[None, :], (0.1, 0.25))
        assert band.at(0.1)[0] == pytest.approx(10.0)
        assert band.at(0.25)[0] == pytest.approx(25.0)

    @pytest.mark.parametrize("probs", [(0.0, 0.5), (0.5, 1.0), (1.2,), ()])
    def test_rejects_probabilities_outside_unit_interval(self, probs):
        with pytest.raises(DataError):
            percentile_band(np.ones((2, 3)), probs)

    def test_unknown_probability(self):
        band = percentile_band(np.arange(10.0)[None, :])
        with pytest.raises(KeyError):
            band.at(0.33)

    @pytest.mark.property
    @pytest.mark.parametrize("seed", range(5))
    def test_shift_moves_every_percentile(self, seed):
        rng = np.random.default_rng(seed)
        data = rng.normal(size=(int(rng.integers(1, 8)), int(rng.integers(2, 50))))
        shift = float(rng.uniform(-100.0, 100.0))
        base = percentile_band(data, (0.05, 0.1, 0.5, 0.9, 0.95))
        moved = percentile_band(data + shift, (0.05, 0.1, 0.5, 0.9, 0.95))
        np.testing.assert_allclose(moved.values, base.values + shift, rtol=0, atol=1e-10)


class TestCoverage:
    """coverage."""

    def test_median_reference_is_covered(self, rng):
        data = rng.normal(size=(30, 11))
        assert coverage(data, np.median(data, axis=1)) == 1.0

    def test_reference_above_every_member(self, rng):
        data = rng.normal(size=(30, 11))
        assert coverage(data, data.max(axis=1) + 1.0) == 0.0

    def test_reference_from_same_distribution(self, rng):
        data = rng.normal(size=(2000, 1000))
        reference = rng.normal(size=2000)
        assert coverage(data, reference) == pytest.approx(0.8, abs=0.04)

    def test_rows_restrict_the_count(self):
        data = np.array([[0.0, 1.0, 2.0], [0.0, 1.0, 2.0]])
        reference = np.array([1.0, 10.0])
        assert coverage(data, reference, rows=np.array([0])) == 1.0
        assert coverage(data, reference, rows=np.array([1])) == 0.0
        assert coverage(data, reference) == 0.5

    def test_reference_length_must_match(self):
        with pytest.raises(DataError):
            coverage(np.ones((3, 4)), np.ones(2))


class TestCumulativeAndSpread:
    """cumulative_production and spread_ratio."""

    def test_constant_rates_over_two_wells(self):
        elements = [
            make_element(
                f"{well}:{k}",
                is_history=k < 2,
                well=well,
                time=30.0 * (k + 1),
                kind=DataKind.OIL_RATE,
            )
            for well in ("A", "B")
            for k in range(3)
        ]
        layout = DataLayout(elements=elements)
        ens = EnsembleMatrix(data=np.ones((6, 2)) * [[1.0, 2.0]], layout=layout)
        np.testing.assert_allclose(cumulative_production(ens), [120.0, 240.0])

    def test_missing_kind_gives_zero(self, small_case):
        _, prior, _ = small_case
        np.testing.assert_array_equal(
            cumulative_production(prior, DataKind.WATER_RATE), np.zeros(prior.n_members)
        )

    def test_spread_ratio(self):
        prior = np.array([[0.0, 2.0, 4.0], [1.0, 1.0, 1.0], [1.0, 1.0, 1.0]])
        posterior = np.array([[1.0, 2.0, 3.0], [1.0, 1.0, 1.0], [0.0, 1.0, 2.0]])
        np.testing.assert_allclose(spread_ratio(prior, posterior), [0.5, 1.0, np.inf])
