"""Domain types: pydantic records and numeric containers."""

from .ensemble import EnsembleMatrix, Observations
from .schemas import (
    DataElement,
    DataKind,
    DataLayout,
    EmitFlags,
    EsmdaConfig,
    LocalizationSpec,
    MdaSchedule,
    RmlConfig,
    RunConfig,
    RunManifest,
    RunMethod,
    RunResult,
    SampleStatus,
)

__all__ = [
    "EnsembleMatrix",
    "Observations",
    "DataElement",
    "DataKind",
    "DataLayout",
    "EmitFlags",
    "EsmdaConfig",
    "LocalizationSpec",
    "MdaSchedule",
    "RmlConfig",
    "RunConfig",
    "RunManifest",
    "RunMethod",
    "RunResult",
    "SampleStatus",
]
