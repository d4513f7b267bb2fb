"""Builders shared by the test modules."""

from src.models.schemas import DataElement, DataKind, DataLayout


def make_element(
    element_id: str,
    is_history: bool = True,
    well: str = "W1",
    x: float = 0.0,
    y: float = 0.0,
    time: float = 30.0,
    kind: DataKind = DataKind.OTHER,
    noise_std: float = 1.0,
) -> DataElement:
    return DataElement(
        id=element_id,
        well_id=well,
        x=x,
        y=y,
        time=time,
        kind=kind,
        is_history=is_history,
        noise_std=noise_std if is_history else None,
    )


def make_layout(n_history: int, n_forecast: int, noise_std: float = 1.0) -> DataLayout:
    """Single-well layout, history first."""
    elements = [
        make_element(
            f"d{i + 1:03d}",
            is_history=i < n_history,
            time=30.0 * (i + 1),
            noise_std=noise_std,
        )
        for i in range(n_history + n_forecast)
    ]
    return DataLayout(elements=elements)
