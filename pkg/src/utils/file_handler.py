"""File handling utilities: CSV inputs, run artifacts and cleanup."""

import json
import logging
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd
from pydantic import ValidationError

from src.exceptions import DataError
from src.models.ensemble import EnsembleMatrix, Observations
from src.models.schemas import DataElement, DataKind, DataLayout

logger = logging.getLogger(__name__)

LAYOUT_COLUMNS = ["id", "well", "x", "y", "time", "kind", "is_history", "noise_std"]
OBSERVATION_COLUMNS = ["id", "value", "noise_std"]
FLOAT_FORMAT = "%.17g"

_TRUE = {"true", "1", "yes", "t", "y"}
_FALSE = {"false", "0", "no", "f", "n"}


def member_columns(n_members: int) -> list[str]:
    """Column names m0001, m0002, ... of an ensemble file."""
    return [f"m{j + 1:04d}" for j in range(n_members)]


def _line(row_index: int) -> int:
    """File line of a data row (header is line 1)."""
    return row_index + 2


def _read_frame(path: Path, required: list[str]) -> pd.DataFrame:
    try:
        frame = pd.read_csv(
            path, dtype=str, keep_default_na=False, skipinitialspace=True
        )
    except FileNotFoundError as e:
        raise DataError(f"file not found: {path}") from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DataError(f"{path}: cannot parse CSV: {e}") from e
    frame.columns = [c.strip() for c in frame.columns]
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise DataError(f"{path}: missing column(s) {', '.join(missing)}")
    return frame


def _float(path: Path, row_index: int, column: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise DataError(
            f"{path}, line {_line(row_index)}: {column} is not a number: {text!r}"
        ) from None


def _flag(path: Path, row_index: int, text: str) -> bool:
    value = text.strip().lower()
    if value in _TRUE:
        return True
    if value in _FALSE:
        return False
    raise DataError(f"{path}, line {_line(row_index)}: is_history is not a flag: {text!r}")


def read_layout(path: Path) -> DataLayout:
    """Parse a layout CSV with header id,well,x,y,time,kind,is_history,noise_std."""
    path = Path(path)
    frame = _read_frame(path, LAYOUT_COLUMNS)
    known_kinds = {k.value for k in DataKind}
    elements = []
    for i, row in enumerate(frame.itertuples(index=False)):
        record = row._asdict()
        kind = record["kind"].strip()
        if kind not in known_kinds:
            raise DataError(f"{path}, line {_line(i)}: unknown data kind {kind!r}")
        noise_text = record["noise_std"].strip()
        try:
            elements.append(
                DataElement(
                    id=record["id"].strip(),
                    well_id=record["well"].strip(),
                    x=_float(path, i, "x", record["x"]),
                    y=_float(path, i, "y", record["y"]),
                    time=_float(path, i, "time", record["time"]),
                    kind=DataKind(kind),
                    is_history=_flag(path, i, record["is_history"]),
                    noise_std=(
                        _float(path, i, "noise_std", noise_text) if noise_text else None
                    ),
                )
            )
        except ValidationError as e:
            raise DataError(
                f"{path}, line {_line(i)}: {e.errors()[0]['msg']}"
            ) from None
    try:
        return DataLayout(elements=elements)
    except ValidationError as e:
        raise DataError(f"{path}: {e.errors()[0]['msg']}") from None


def read_ensemble(path: Path, layout: DataLayout) -> EnsembleMatrix:
    """Parse an ensemble CSV: element id first, then one column per member.

    Rows may come in any order; they are arranged in layout order.
    """
    path = Path(path)
    frame = _read_frame(path, [])
    if frame.shape[1] < 2:
        raise DataError(f"{path}: an ensemble needs an id column and member columns")
    if len(frame) != len(layout):
        raise DataError(
            f"ensemble has {len(frame)} rows but the layout has {len(layout)} elements"
        )

    ids = [str(v).strip() for v in frame.iloc[:, 0]]
    index = layout.index_of()
    order = np.empty(len(ids), dtype=int)
    for i, element_id in enumerate(ids):
        if element_id not in index:
            raise DataError(
                f"{path}, line {_line(i)}: element id {element_id!r} is not in the layout"
            )
        order[i] = index[element_id]
    if len(set(order.tolist())) != len(order):
        raise DataError(f"{path}: duplicate element ids in the ensemble")

    data = np.empty((len(layout), frame.shape[1] - 1))
    for i, row in enumerate(frame.iloc[:, 1:].itertuples(index=False)):
        data[order[i]] = [
            _float(path, i, column, text) for column, text in zip(frame.columns[1:], row)
        ]
    return EnsembleMatrix(data=data, layout=layout)


def read_observations(path: Path, layout: DataLayout) -> Observations:
    """Parse observations ``id,value,noise_std``; a given noise_std overrides the layout."""
    path = Path(path)
    frame = _read_frame(path, OBSERVATION_COLUMNS[:2])
    has_noise = "noise_std" in frame.columns
    elements = layout.elements
    index = layout.index_of()
    history_position = {int(r): k for k, r in enumerate(layout.history_indices)}

    values = np.full(layout.n_history, np.nan)
    error_std = layout.history_noise_std.copy()
    for i, row in enumerate(frame.itertuples(index=False)):
        record = row._asdict()
        element_id = record["id"].strip()
        if element_id not in index:
            raise DataError(
                f"{path}, line {_line(i)}: element id {element_id!r} is not in the layout"
            )
        row_in_d = index[element_id]
        if not elements[row_in_d].is_history:
            raise DataError(
                f"{path}, line {_line(i)}: observation targets non-history element "
                f"{element_id!r}"
            )
        k = history_position[row_in_d]
        if not np.isnan(values[k]):
            raise DataError(f"{path}, line {_line(i)}: duplicate observation of {element_id!r}")
        values[k] = _float(path, i, "value", record["value"])
        noise_text = record["noise_std"].strip() if has_noise else ""
        if noise_text:
            error_std[k] = _float(path, i, "noise_std", noise_text)
            if not error_std[k] > 0:
                raise DataError(
                    f"{path}, line {_line(i)}: noise_std of {element_id!r} must be positive, "
                    f"got {noise_text}"
                )

    if np.any(np.isnan(values)):
        missing = [layout.ids[int(r)] for r in layout.history_indices[np.isnan(values)]]
        raise DataError(f"{path}: no observation for history element(s) {missing[:5]}")
    return Observations.for_layout(layout, values, error_std)


def read_reference(path: Path, layout: DataLayout) -> np.ndarray:
    """Parse a reference CSV ``id,value`` covering every element."""
    path = Path(path)
    frame = _read_frame(path, ["id", "value"])
    index = layout.index_of()
    reference = np.full(len(layout), np.nan)
    for i, row in enumerate(frame.itertuples(index=False)):
        record = row._asdict()
        element_id = record["id"].strip()
        if element_id not in index:
            raise DataError(
                f"{path}, line {_line(i)}: element id {element_id!r} is not in the layout"
            )
        reference[index[element_id]] = _float(path, i, "value", record["value"])
    if np.any(np.isnan(reference)):
        raise DataError(f"{path}: reference does not cover every layout element")
    return reference


def load_inputs(
    layout_path: Path, ensemble_path: Path, observations_path: Path
) -> tuple[DataLayout, EnsembleMatrix, Observations]:
    """Read and cross-validate layout, prior ensemble and observations."""
    layout = read_layout(layout_path)
    ensemble = read_ensemble(ensemble_path, layout)
    observations = read_observations(observations_path, layout)
    logger.info(
        "loaded %d elements (%d history) and %d members",
        layout.n_data,
        layout.n_history,
        ensemble.n_members,
    )
    return layout, ensemble, observations


def layout_frame(layout: DataLayout) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "id": layout.ids,
            "well": [e.well_id for e in layout.elements],
            "x": [e.x for e in layout.elements],
            "y": [e.y for e in layout.elements],
            "time": [e.time for e in layout.elements],
            "kind": [DataKind(e.kind).value for e in layout.elements],
            "is_history": ["true" if e.is_history else "false" for e in layout.elements],
            "noise_std": [e.noise_std for e in layout.elements],
        }
    )


def ensemble_frame(data: np.ndarray, layout: DataLayout) -> pd.DataFrame:
    frame = pd.DataFrame(data, columns=member_columns(data.shape[1]))
    frame.insert(0, "id", layout.ids)
    return frame


class FileHandler:
    """Writes run artifacts under one directory and remembers what it wrote."""

    def __init__(self, base_path: str = "."):
        """Initialize FileHandler with a base path.

        Args:
            base_path: Base directory for file operations
        """
        self.base_path = Path(base_path).resolve()
        self.written: list[Path] = []

    def ensure_directory(self, dir_path: str = ".") -> Path:
        path = self._resolve_path(dir_path)
        path.mkdir(parents=True, exist_ok=True)
        return path

    def write_text(self, file_path: str, content: str) -> Path:
        path = self._resolve_path(file_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content, encoding="utf-8")
        self._track(path)
        return path

    def write_frame(self, file_path: str, frame: pd.DataFrame) -> Path:
        """Write a DataFrame as CSV with round-trip float formatting."""
        path = self._resolve_path(file_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        self._track(path)
        return path

    def write_json(self, file_path: str, payload: dict) -> Path:
        return self.write_text(file_path, json.dumps(payload, indent=2, sort_keys=True) + "\n")

    def write_ensemble(self, file_path: str, data: np.ndarray, layout: DataLayout) -> Path:
        return self.write_frame(file_path, ensemble_frame(data, layout))

    def write_layout(self, file_path: str, layout: DataLayout) -> Path:
        return self.write_frame(file_path, layout_frame(layout))

    def write_observations(
        self, file_path: str, observations: Observations, layout: DataLayout
    ) -> Path:
        history_ids = [layout.ids[int(r)] for r in layout.history_indices]
        frame = pd.DataFrame(
            {
                "id": history_ids,
                "value": observations.values,
                "noise_std": observations.error_std,
            }
        )
        return self.write_frame(file_path, frame)

    def write_reference(
        self, file_path: str, reference: np.ndarray, layout: DataLayout
    ) -> Path:
        return self.write_frame(file_path, pd.DataFrame({"id": layout.ids, "value": reference}))

    def remove_written(self) -> list[Path]:
        """Delete every file written so far; used to drop partial outputs."""
        removed = []
        for path in reversed(self.written):
            try:
                path.unlink()
                removed.append(path)
            except FileNotFoundError:
                continue
            except OSError as e:
                logger.warning("could not remove %s: %s", path, e)
        self.written.clear()
        return removed

    def get_relative_path(self, file_path: str) -> str:
        path = self._resolve_path(file_path)
        try:
            return str(path.relative_to(self.base_path))
        except ValueError:
            return str(path)

    def _track(self, path: Path) -> None:
        if path not in self.written:
            self.written.append(path)

    def _resolve_path(self, file_path: str) -> Path:
        """Resolve a path relative to base_path or as absolute.

        Args:
            file_path: Path to resolve

        Returns:
            Resolved Path object
        """
        path = Path(file_path)
        if path.is_absolute():
            return path
        return self.base_path / path
