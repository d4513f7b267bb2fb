"""Tests for the Gaspari-Cohn taper and the localization matrix."""

import math

import numpy as np
import pytest

from src.core.localization import (
    build_localization,
    composite_ratio,
    gaspari_cohn,
    rotate,
)
from src.exceptions import DataError, NumericalError
from src.models.schemas import DataLayout, LocalizationSpec
from tests.helpers import make_element, make_layout


def _two_well_layout(distance: float) -> DataLayout:
    return DataLayout(
        elements=[
            make_element("a1", well="A", x=0.0, time=30.0),
            make_element("b1", well="B", x=distance, time=30.0),
            make_element("a2", is_history=False, well="A", x=0.0, time=60.0),
        ]
    )


class TestGaspariCohn:
    """gaspari_cohn."""

    @pytest.mark.parametrize(
        "ratio, expected", [(0.0, 1.0), (1.0, 0.208333), (2.0, 0.0), (3.5, 0.0)]
    )
    def test_reference_values(self, ratio, expected):
        assert gaspari_cohn(ratio) == pytest.approx(expected, abs=1e-6)

    def test_scalar_in_scalar_out(self):
        assert isinstance(gaspari_cohn(0.5), float)

    def test_continuous_at_one(self):
        below = gaspari_cohn(1.0 - 1e-9)
        above = gaspari_cohn(1.0 + 1e-9)
        assert below == pytest.approx(above, abs=1e-7)

    def test_monotone_and_bounded(self):
        values = gaspari_cohn(np.linspace(0.0, 2.5, 501))
        assert np.all(np.diff(values) <= 1e-12)
        assert values.min() >= 0.0 and values.max() <= 1.0

    def test_rejects_negative_ratio(self):
        with pytest.raises(NumericalError):
            gaspari_cohn(-0.1)

    def test_rejects_nan(self):
        with pytest.raises(NumericalError):
            gaspari_cohn(np.array([0.5, np.nan]))


class TestCompositeRatio:
    """rotate and composite_ratio."""

    def test_time_only_distance(self):
        spec = LocalizationSpec(lx=100.0, ly=100.0, t=300.0, enabled=True)
        a = make_element("a", time=0.0)
        b = make_element("b", time=300.0)
        assert composite_ratio(a, b, spec) == pytest.approx(1.0)

    def test_x_distance_at_critical_length(self):
        spec = LocalizationSpec(lx=250.0, ly=100.0, t=300.0, enabled=True)
        a = make_element("a", x=0.0)
        b = make_element("b", x=250.0)
        assert composite_ratio(a, b, spec) == pytest.approx(1.0)

    def test_quarter_turn_maps_x_onto_y(self):
        dxp, dyp = rotate(1.0, 0.0, math.pi / 2)
        assert dxp == pytest.approx(0.0, abs=1e-15)
        assert dyp == pytest.approx(1.0)

    def test_rotation_swaps_critical_lengths(self):
        spec = LocalizationSpec(
            lx=1000.0, ly=100.0, t=1e6, theta=math.pi / 2, enabled=True
        )
        a = make_element("a", x=0.0)
        b = make_element("b", x=100.0)
        assert composite_ratio(a, b, spec) == pytest.approx(1.0)

    def test_symmetric(self):
        spec = LocalizationSpec(lx=300.0, ly=150.0, t=900.0, theta=0.4, enabled=True)
        a = make_element("a", x=10.0, y=-40.0, time=30.0)
        b = make_element("b", x=200.0, y=90.0, time=400.0)
        assert composite_ratio(a, b, spec) == pytest.approx(composite_ratio(b, a, spec))

    def test_needs_enabled_spec(self):
        a = make_element("a")
        with pytest.raises(DataError):
            composite_ratio(a, a, LocalizationSpec.disabled())

    @pytest.mark.property
    @pytest.mark.parametrize("seed", range(5))
    def test_rotation_inverts(self, seed):
        rng = np.random.default_rng(seed)
        dx, dy = rng.normal(scale=500.0, size=(2, 20))
        theta = float(rng.uniform(-math.pi, math.pi))
        back_x, back_y = rotate(*rotate(dx, dy, theta), -theta)
        np.testing.assert_allclose(back_x, dx, atol=1e-9)
        np.testing.assert_allclose(back_y, dy, atol=1e-9)

    @pytest.mark.property
    @pytest.mark.parametrize("seed", range(5))
    def test_translation_invariant(self, seed):
        rng = np.random.default_rng(seed)
        spec = LocalizationSpec(
            lx=float(rng.uniform(100.0, 3000.0)),
            ly=float(rng.uniform(100.0, 3000.0)),
            t=float(rng.uniform(100.0, 9000.0)),
            theta=float(rng.uniform(-math.pi, math.pi)),
            enabled=True,
        )
        ax, ay, bx, by = rng.uniform(0.0, 5000.0, 4)
        at, bt = rng.uniform(0.0, 1800.0, 2)
        sx, sy = rng.uniform(-1e4, 1e4, 2)
        st = float(rng.uniform(0.0, 1e4))
        a = make_element("a", x=ax, y=ay, time=at)
        b = make_element("b", x=bx, y=by, time=bt)
        shifted_a = make_element("a", x=ax + sx, y=ay + sy, time=at + st)
        shifted_b = make_element("b", x=bx + sx, y=by + sy, time=bt + st)
        assert composite_ratio(shifted_a, shifted_b, spec) == pytest.approx(
            composite_ratio(a, b, spec), rel=1e-9, abs=1e-12
        )


class TestBuildLocalization:
    """build_localization."""

    def test_disabled_gives_ones(self):
        layout = make_layout(3, 2)
        matrix = build_localization(layout, LocalizationSpec.disabled())
        assert matrix.shape == (5, 3)
        assert matrix.is_trivial

    def test_far_wells_are_decoupled(self):
        spec = LocalizationSpec(lx=100.0, ly=100.0, t=1000.0, enabled=True)
        matrix = build_localization(_two_well_layout(1000.0), spec)
        assert matrix.shape == (3, 2)
        assert matrix.values[0, 1] == 0.0
        assert matrix.values[1, 0] == 0.0
        assert matrix.values[2, 1] == 0.0

    def test_self_entries_are_one(self):
        spec = LocalizationSpec(lx=100.0, ly=100.0, t=1000.0, enabled=True)
        matrix = build_localization(_two_well_layout(1000.0), spec)
        assert matrix.values[0, 0] == 1.0
        assert matrix.values[1, 1] == 1.0

    def test_entries_match_composite_ratio(self):
        spec = LocalizationSpec(lx=800.0, ly=400.0, t=500.0, theta=0.3, enabled=True)
        layout = _two_well_layout(500.0)
        matrix = build_localization(layout, spec)
        elements = layout.elements
        for i, element in enumerate(elements):
            for k, row in enumerate(layout.history_indices):
                expected = gaspari_cohn(composite_ratio(element, elements[row], spec))
                assert matrix.values[i, k] == pytest.approx(expected, abs=1e-12)

    def test_needs_history(self):
        layout = DataLayout(elements=[make_element("f", is_history=False)])
        with pytest.raises(DataError):
            build_localization(layout, LocalizationSpec(enabled=True))

    @pytest.mark.property
    @pytest.mark.parametrize("seed", range(5))
    def test_entries_bounded_on_random_layouts(self, seed):
        rng = np.random.default_rng(seed)
        n_elements = int(rng.integers(2, 30))
        elements = [
            make_element(
                f"d{i}",
                is_history=i == 0 or bool(rng.random() < 0.5),
                x=float(rng.uniform(0.0, 5000.0)),
                y=float(rng.uniform(0.0, 5000.0)),
                time=float(rng.uniform(30.0, 1800.0)),
            )
            for i in range(n_elements)
        ]
        spec = LocalizationSpec(lx=1500.0, ly=800.0, t=600.0, theta=0.3, enabled=True)
        values = build_localization(DataLayout(elements=elements), spec).values
        assert np.all(values >= 0.0)
        assert np.all(values <= 1.0)
