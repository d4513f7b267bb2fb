"""Tests for CSV input parsing and the artifact writer."""

import json

import numpy as np
import pytest

from src.exceptions import DataError
from src.utils.file_handler import (
    FileHandler,
    load_inputs,
    read_ensemble,
    read_layout,
    read_observations,
    read_reference,
)

LAYOUT_HEADER = "id,well,x,y,time,kind,is_history,noise_std\n"
LAYOUT_ROWS = (
    "h1,W1,0,0,30,oil_rate,true,0.5\n"
    "h2,W1,0,0,60,oil_rate,true,0.5\n"
    "f1,W1,0,0,90,oil_rate,false,\n"
)


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


@pytest.fixture
def layout_path(tmp_path):
    return _write(tmp_path / "layout.csv", LAYOUT_HEADER + LAYOUT_ROWS)


class TestReadInputs:
    """read_layout, read_ensemble, read_observations and read_reference."""

    def test_written_case_reads_back(self, case_files, small_case):
        layout, prior, obs = small_case
        read_back, ensemble, observations = load_inputs(
            case_files["layout"], case_files["ensemble"], case_files["observations"]
        )
        assert read_back.ids == layout.ids
        np.testing.assert_array_equal(ensemble.data, prior.data)
        np.testing.assert_array_equal(observations.values, obs.values)
        np.testing.assert_array_equal(observations.error_std, obs.error_std)
        np.testing.assert_array_equal(
            read_reference(case_files["reference"], layout), prior.data[:, 0]
        )

    def test_layout_fields(self, layout_path):
        layout = read_layout(layout_path)
        assert layout.n_history == 2
        assert layout.elements[2].noise_std is None
        assert layout.elements[0].time == 30.0

    def test_unknown_kind_reports_line(self, tmp_path):
        path = _write(tmp_path / "layout.csv", LAYOUT_HEADER + "h1,W1,0,0,30,gas_rate,true,1\n")
        with pytest.raises(DataError, match="line 2: unknown data kind"):
            read_layout(path)

    def test_history_without_noise(self, tmp_path):
        path = _write(tmp_path / "layout.csv", LAYOUT_HEADER + "h1,W1,0,0,30,oil_rate,true,\n")
        with pytest.raises(DataError, match="noise_std"):
            read_layout(path)

    def test_duplicate_layout_ids(self, tmp_path):
        rows = "h1,W1,0,0,30,oil_rate,true,1\nh1,W1,0,0,60,oil_rate,true,1\n"
        with pytest.raises(DataError, match="duplicate element id"):
            read_layout(_write(tmp_path / "layout.csv", LAYOUT_HEADER + rows))

    def test_missing_column(self, tmp_path):
        path = _write(tmp_path / "layout.csv", "id,well,x\nh1,W1,0\n")
        with pytest.raises(DataError, match="missing column"):
            read_layout(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="file not found"):
            read_layout(tmp_path / "absent.csv")

    def test_ensemble_rows_arranged_in_layout_order(self, tmp_path, layout_path):
        layout = read_layout(layout_path)
        path = _write(tmp_path / "ens.csv", "id,m0001,m0002\nf1,5,6\nh1,1,2\nh2,3,4\n")
        ens = read_ensemble(path, layout)
        np.testing.assert_array_equal(ens.data, [[1, 2], [3, 4], [5, 6]])

    def test_ensemble_row_count_mismatch(self, tmp_path, layout_path):
        layout = read_layout(layout_path)
        path = _write(tmp_path / "ens.csv", "id,m0001,m0002\nh1,1,2\nh2,3,4\n")
        with pytest.raises(DataError, match="ensemble has 2 rows but the layout has 3 elements"):
            read_ensemble(path, layout)

    def test_ensemble_unknown_id(self, tmp_path, layout_path):
        layout = read_layout(layout_path)
        path = _write(tmp_path / "ens.csv", "id,m0001,m0002\nh1,1,2\nh2,3,4\nzz,5,6\n")
        with pytest.raises(DataError, match="line 4: element id 'zz' is not in the layout"):
            read_ensemble(path, layout)

    def test_ensemble_non_numeric(self, tmp_path, layout_path):
        layout = read_layout(layout_path)
        path = _write(tmp_path / "ens.csv", "id,m0001,m0002\nh1,1,2\nh2,3,x\nf1,5,6\n")
        with pytest.raises(DataError, match="m0002 is not a number"):
            read_ensemble(path, layout)

    def test_observation_noise_overrides_layout(self, tmp_path, layout_path):
        layout = read_layout(layout_path)
        path = _write(tmp_path / "obs.csv", "id,value,noise_std\nh2,3.5,\nh1,1.5,0.25\n")
        obs = read_observations(path, layout)
        np.testing.assert_array_equal(obs.values, [1.5, 3.5])
        np.testing.assert_array_equal(obs.error_std, [0.25, 0.5])

    def test_observation_noise_must_be_positive(self, tmp_path, layout_path):
        layout = read_layout(layout_path)
        path = _write(tmp_path / "obs.csv", "id,value,noise_std\nh1,1,0\nh2,2,\n")
        with pytest.raises(DataError, match="line 2: noise_std of 'h1' must be positive"):
            read_observations(path, layout)

    def test_observation_of_forecast_element(self, tmp_path, layout_path):
        layout = read_layout(layout_path)
        path = _write(tmp_path / "obs.csv", "id,value\nh1,1\nh2,2\nf1,3\n")
        with pytest.raises(DataError, match="observation targets non-history element"):
            read_observations(path, layout)

    def test_missing_observation(self, tmp_path, layout_path):
        layout = read_layout(layout_path)
        path = _write(tmp_path / "obs.csv", "id,value\nh1,1\n")
        with pytest.raises(DataError, match="no observation for history element"):
            read_observations(path, layout)

    def test_duplicate_observation(self, tmp_path, layout_path):
        layout = read_layout(layout_path)
        path = _write(tmp_path / "obs.csv", "id,value\nh1,1\nh1,2\nh2,3\n")
        with pytest.raises(DataError, match="duplicate observation"):
            read_observations(path, layout)

    def test_reference_must_cover_layout(self, tmp_path, layout_path):
        layout = read_layout(layout_path)
        path = _write(tmp_path / "ref.csv", "id,value\nh1,1\nh2,2\n")
        with pytest.raises(DataError, match="cover every layout element"):
            read_reference(path, layout)


class TestFileHandler:
    """FileHandler."""

    def test_tracks_and_removes_written_files(self, tmp_path):
        handler = FileHandler(str(tmp_path / "out"))
        first = handler.write_text("a.txt", "a\n")
        second = handler.write_json("nested/b.json", {"b": 1})
        assert handler.written == [first, second]
        assert handler.get_relative_path(str(second)) == "nested/b.json"

        removed = handler.remove_written()
        assert set(removed) == {first, second}
        assert not first.exists() and not second.exists()
        assert handler.written == []

    def test_json_is_sorted_and_indented(self, tmp_path):
        handler = FileHandler(str(tmp_path))
        path = handler.write_json("m.json", {"b": 2, "a": 1})
        text = path.read_text(encoding="utf-8")
        assert text == '{\n  "a": 1,\n  "b": 2\n}\n'
        assert json.loads(text) == {"a": 1, "b": 2}

    def test_ensemble_floats_round_trip_exactly(self, tmp_path, small_case):
        layout, prior, _ = small_case
        handler = FileHandler(str(tmp_path))
        path = handler.write_ensemble("e.csv", prior.data / 3.0, layout)
        assert path.read_text(encoding="utf-8").splitlines()[0].startswith("id,m0001,m0002")
        np.testing.assert_array_equal(read_ensemble(path, layout).data, prior.data / 3.0)
