"""Tests for ensemble anomalies, energy-truncated SVD and the subspace inverse."""

import numpy as np
import pytest

from src.core.ensemble import (
    anomaly_matrix,
    subspace_inverse,
    subspace_inverse_apply,
    truncated_svd_energy,
)
from src.exceptions import DataError, NumericalError
from src.models.ensemble import EnsembleMatrix
from tests.helpers import make_layout


class TestAnomalyMatrix:
    """anomaly_matrix."""

    def test_two_member_hand_example(self):
        data = np.array([[1.0, 3.0], [2.0, 4.0]])
        np.testing.assert_allclose(anomaly_matrix(data), [[-1.0, 1.0], [-1.0, 1.0]])

    def test_identical_members_give_zero_matrix(self):
        data = np.full((4, 5), 0.1)
        assert not np.any(anomaly_matrix(data))

    def test_outer_product_matches_covariance(self, rng):
        data = rng.normal(size=(6, 3))
        delta = anomaly_matrix(data)
        expected = np.cov(data, ddof=1)
        np.testing.assert_allclose(delta @ delta.T, expected, rtol=1e-12, atol=1e-14)

    def test_history_subset_uses_layout_rows(self, small_case):
        layout, prior, _ = small_case
        delta_h = anomaly_matrix(prior, subset="history")
        assert delta_h.shape == (layout.n_history, prior.n_members)
        np.testing.assert_allclose(delta_h, anomaly_matrix(prior)[layout.history_indices])

    def test_single_member_is_degenerate(self):
        with pytest.raises(DataError, match="degenerate ensemble"):
            anomaly_matrix(np.ones((3, 1)))

    def test_history_subset_needs_layout(self):
        with pytest.raises(DataError):
            anomaly_matrix(np.ones((3, 4)), subset="history")

    def test_ensemble_matrix_rejects_single_member(self):
        with pytest.raises(DataError, match="degenerate ensemble"):
            EnsembleMatrix(data=np.ones((2, 1)), layout=make_layout(1, 1))


class TestTruncatedSvdEnergy:
    """truncated_svd_energy."""

    @pytest.mark.parametrize("xi, rank", [(0.9, 3), (0.8, 2), (0.5, 1)])
    def test_rank_from_energy_fraction(self, xi, rank):
        svd = truncated_svd_energy(np.diag([3.0, 2.0, 1.0]), xi)
        assert svd.rank == rank
        np.testing.assert_allclose(svd.singular_values, [3.0, 2.0, 1.0][:rank])

    def test_full_energy_keeps_full_rank(self):
        svd = truncated_svd_energy(np.eye(4) + 0.01 * np.diag(np.arange(4)), 1.0)
        assert svd.rank == 4
        assert svd.energy_kept == pytest.approx(1.0)

    def test_reconstruction_at_full_energy(self, rng):
        a = rng.normal(size=(8, 5))
        svd = truncated_svd_energy(a, 1.0)
        np.testing.assert_allclose(svd.reconstruct(), a, atol=1e-10)

    def test_max_rank_caps_kept_values(self, rng):
        svd = truncated_svd_energy(rng.normal(size=(6, 6)), 1.0, max_rank=2)
        assert svd.rank == 2

    def test_zero_matrix_is_rank_zero(self):
        with pytest.raises(NumericalError, match="rank zero"):
            truncated_svd_energy(np.zeros((3, 3)), 0.9)

    @pytest.mark.parametrize("xi", [0.0, -0.1, 1.5])
    def test_energy_out_of_range(self, xi):
        with pytest.raises(NumericalError):
            truncated_svd_energy(np.eye(2), xi)

    def test_non_finite_input(self):
        with pytest.raises(NumericalError):
            truncated_svd_energy(np.array([[1.0, np.nan], [0.0, 1.0]]), 0.9)

    @pytest.mark.property
    @pytest.mark.parametrize("seed", range(5))
    def test_rank_non_decreasing_in_energy(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=(int(rng.integers(2, 15)), int(rng.integers(2, 15))))
        ranks = [truncated_svd_energy(a, xi).rank for xi in np.linspace(0.05, 1.0, 40)]
        assert all(lo <= hi for lo, hi in zip(ranks, ranks[1:]))
        assert ranks[-1] == min(a.shape)


class TestSubspaceInverse:
    """subspace_inverse and subspace_inverse_apply."""

    def test_scalar_case(self):
        value = subspace_inverse_apply(
            np.array([[2.0]]), np.array([1.0]), alpha=1.0, xi=0.99, rhs=np.array([1.0])
        )
        assert value[0] == pytest.approx(0.2)

    def test_zero_anomalies_give_diagonal_inverse(self):
        ce = np.array([1.0, 4.0, 0.25])
        rhs = np.array([1.0, 2.0, 3.0])
        inverse = subspace_inverse(np.zeros((3, 5)), ce, alpha=2.0, xi=0.99)
        assert inverse.rank == 0
        np.testing.assert_allclose(inverse.apply(rhs), rhs / (2.0 * ce))

    def test_matches_dense_solve_at_full_energy(self, rng):
        delta = rng.normal(size=(5, 20))
        ce = rng.uniform(0.5, 2.0, size=5)
        rhs = rng.normal(size=(5, 3))
        dense = np.linalg.solve(delta @ delta.T + 1.5 * np.diag(ce), rhs)
        got = subspace_inverse_apply(delta, ce, alpha=1.5, xi=1.0, rhs=rhs)
        np.testing.assert_allclose(got, dense, rtol=1e-8)

    def test_dense_operator_is_symmetric(self, rng):
        inverse = subspace_inverse(rng.normal(size=(4, 6)), np.ones(4), 3.0, 0.9)
        dense = inverse.dense()
        np.testing.assert_allclose(dense, dense.T, atol=1e-14)

    def test_vector_and_matrix_rhs_agree(self, rng):
        inverse = subspace_inverse(rng.normal(size=(4, 6)), np.ones(4), 1.0, 0.95)
        rhs = rng.normal(size=4)
        np.testing.assert_allclose(inverse.apply(rhs), inverse.apply(rhs[:, None])[:, 0])

    @pytest.mark.parametrize("alpha", [0.0, -1.0, np.inf])
    def test_rejects_bad_alpha(self, alpha):
        with pytest.raises(NumericalError):
            subspace_inverse(np.ones((2, 3)), np.ones(2), alpha, 0.9)

    def test_rejects_non_positive_ce(self):
        with pytest.raises(NumericalError):
            subspace_inverse(np.ones((2, 3)), np.array([1.0, 0.0]), 1.0, 0.9)

    def test_rejects_shape_mismatch(self):
        with pytest.raises(DataError):
            subspace_inverse(np.ones((3, 3)), np.ones(2), 1.0, 0.9)
        with pytest.raises(DataError):
            subspace_inverse_apply(np.ones((2, 3)), np.ones(2), 1.0, 0.9, np.ones(4))
