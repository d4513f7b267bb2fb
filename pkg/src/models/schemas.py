"""Pydantic models for data validation and structured output."""

import math
from enum import Enum
from pathlib import Path
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# Tolerance on the MDA condition sum(1/alpha_k) == 1.
SCHEDULE_TOLERANCE = 1e-9


class DataKind(str, Enum):
    """Quantity carried by one element of the predicted-data vector."""

    OIL_RATE = "oil_rate"
    WATER_RATE = "water_rate"
    INJECTION_RATE = "injection_rate"
    PRESSURE = "pressure"
    OTHER = "other"


class RunMethod(str, Enum):
    """Inversion methods available to the pipeline."""

    DSI_ESMDA = "dsi_esmda"
    DSI_RML = "dsi_rml"


class DataElement(BaseModel):
    """One datum of the predicted-data vector d."""

    id: str = Field(description="Unique element identifier")
    well_id: str = Field(description="Well the datum belongs to")
    x: float = Field(description="Well head x coordinate (m)")
    y: float = Field(description="Well head y coordinate (m)")
    time: float = Field(description="Time of the datum (days)")
    kind: DataKind = Field(description="Quantity kind")
    is_history: bool = Field(description="True for history data, False for forecast")
    noise_std: Optional[float] = Field(
        default=None,
        description="Data-error standard deviation, required for history data",
    )

    @model_validator(mode="after")
    def _check_values(self) -> "DataElement":
        if not all(math.isfinite(v) for v in (self.x, self.y, self.time)):
            raise ValueError(f"element {self.id}: coordinates and time must be finite")
        if self.time < 0:
            raise ValueError(f"element {self.id}: time must be non-negative")
        if self.noise_std is not None and not math.isfinite(self.noise_std):
            self.noise_std = None
        if self.is_history and (self.noise_std is None or self.noise_std <= 0):
            raise ValueError(
                f"element {self.id}: history data need a positive noise_std"
            )
        return self


class DataLayout(BaseModel):
    """Ordered metadata for every element of d."""

    elements: list[DataElement] = Field(default_factory=list)

    @field_validator("elements")
    @classmethod
    def _unique_ids(cls, elements: list[DataElement]) -> list[DataElement]:
        seen: set[str] = set()
        for element in elements:
            if element.id in seen:
                raise ValueError(f"duplicate element id: {element.id}")
            seen.add(element.id)
        return elements

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def n_data(self) -> int:
        return len(self.elements)

    @property
    def ids(self) -> list[str]:
        return [e.id for e in self.elements]

    @property
    def history_indices(self) -> np.ndarray:
        """Row indices of d_h inside d."""
        return np.array(
            [i for i, e in enumerate(self.elements) if e.is_history], dtype=int
        )

    @property
    def forecast_indices(self) -> np.ndarray:
        """Row indices of d_f inside d."""
        return np.array(
            [i for i, e in enumerate(self.elements) if not e.is_history], dtype=int
        )

    @property
    def n_history(self) -> int:
        return int(sum(e.is_history for e in self.elements))

    @property
    def coordinates(self) -> np.ndarray:
        """(N_d, 2) array of well head coordinates."""
        return np.array([[e.x, e.y] for e in self.elements], dtype=float).reshape(-1, 2)

    @property
    def times(self) -> np.ndarray:
        return np.array([e.time for e in self.elements], dtype=float)

    @property
    def kinds(self) -> list[DataKind]:
        return [DataKind(e.kind) for e in self.elements]

    @property
    def history_noise_std(self) -> np.ndarray:
        """Layout noise standard deviations of the history elements."""
        return np.array(
            [e.noise_std for e in self.elements if e.is_history], dtype=float
        )

    def index_of(self) -> dict[str, int]:
        """Map element id to its row in d."""
        return {e.id: i for i, e in enumerate(self.elements)}

    def rows_of_kind(self, kinds: list[DataKind]) -> np.ndarray:
        """Row indices of the elements whose kind is in ``kinds``."""
        wanted = {DataKind(k) for k in kinds}
        return np.array(
            [i for i, e in enumerate(self.elements) if DataKind(e.kind) in wanted],
            dtype=int,
        )


class LocalizationSpec(BaseModel):
    """Critical lengths and rotation of the spatio-temporal taper."""

    lx: float = Field(default=2000.0, description="Critical length along x' (m)")
    ly: float = Field(default=2000.0, description="Critical length along y' (m)")
    t: float = Field(default=6000.0, description="Critical time (days)")
    theta: float = Field(default=0.0, description="Counterclockwise rotation (rad)")
    enabled: bool = Field(default=False)

    @model_validator(mode="after")
    def _check_lengths(self) -> "LocalizationSpec":
        if self.enabled and not (self.lx > 0 and self.ly > 0 and self.t > 0):
            raise ValueError("localization lengths lx, ly and t must be positive")
        if not math.isfinite(self.theta):
            raise ValueError("localization angle must be finite")
        return self

    @classmethod
    def disabled(cls) -> "LocalizationSpec":
        return cls(enabled=False)


class MdaSchedule(BaseModel):
    """Inflation coefficients alpha_1..alpha_Na of the MDA loop."""

    alphas: list[float] = Field(description="Inflation coefficients, sum(1/a) == 1")

    @field_validator("alphas")
    @classmethod
    def _check_alphas(cls, alphas: list[float]) -> list[float]:
        if len(alphas) < 1:
            raise ValueError("alpha schedule needs at least one coefficient")
        if any(not math.isfinite(a) or a <= 0 for a in alphas):
            raise ValueError("alpha coefficients must be positive")
        if abs(sum(1.0 / a for a in alphas) - 1.0) > SCHEDULE_TOLERANCE:
            raise ValueError("alpha schedule does not sum to one")
        return alphas

    @classmethod
    def uniform(cls, n_assimilations: int = 4) -> "MdaSchedule":
        """alpha_k = N_a for every iteration."""
        if n_assimilations < 1:
            raise ValueError("the number of assimilations must be 1 or more")
        return cls(alphas=[float(n_assimilations)] * n_assimilations)

    @property
    def n_assimilations(self) -> int:
        return len(self.alphas)


def _check_energy(value: float) -> float:
    if not 0 < value <= 1:
        raise ValueError(f"energy threshold must lie in (0, 1], got {value}")
    return value


class EsmdaConfig(BaseModel):
    """Settings of one DSI-ESMDA run."""

    schedule: MdaSchedule = Field(default_factory=MdaSchedule.uniform)
    energy_xi: float = Field(default=0.99, description="SVD energy threshold")
    localization: LocalizationSpec = Field(default_factory=LocalizationSpec.disabled)
    rng_seed: int = Field(default=0, ge=0, description="Seed of every random draw")
    truncate_negative_kinds: list[DataKind] = Field(
        default_factory=lambda: [DataKind.WATER_RATE],
        description="Kinds clamped at zero after the last iteration",
    )
    perturb_observations: bool = Field(default=True)

    @field_validator("energy_xi")
    @classmethod
    def _check_energy_xi(cls, value: float) -> float:
        return _check_energy(value)

    @field_validator("truncate_negative_kinds")
    @classmethod
    def _sorted_kinds(cls, kinds: list[DataKind]) -> list[DataKind]:
        return sorted({DataKind(k) for k in kinds}, key=lambda k: k.value)


class RmlConfig(BaseModel):
    """Settings of one DSI (PCA + RML) run."""

    n_samples: int = Field(default=100, description="Number of posterior samples")
    energy_xi: float = Field(default=0.99)
    anamorphosis: bool = Field(default=False)
    rescale_by_ce: bool = Field(default=False)
    memory: int = Field(default=10, ge=1)
    max_iter: int = Field(default=500, ge=1)
    gtol: float = Field(default=1e-6, gt=0)
    c1: float = Field(default=1e-4, gt=0, lt=1)
    c2: float = Field(default=0.9, gt=0, lt=1)
    rng_seed: int = Field(default=0, ge=0, description="Seed of every random draw")
    n_jobs: int = Field(
        default=1, description="Parallel minimizations; negative counts back from the CPU total"
    )
    n_cdf_draws: Optional[int] = Field(
        default=None, description="PCA draws for cdf2; defaults to N_e"
    )

    @field_validator("energy_xi")
    @classmethod
    def _check_energy_xi(cls, value: float) -> float:
        return _check_energy(value)

    @field_validator("n_samples")
    @classmethod
    def _positive_samples(cls, value: int) -> int:
        if value < 1:
            raise ValueError("rml.samples must be at least 1")
        return value

    @field_validator("n_jobs")
    @classmethod
    def _nonzero_jobs(cls, value: int) -> int:
        if value == 0:
            raise ValueError("rml.n_jobs must not be 0")
        return value


class EmitFlags(BaseModel):
    """Which artifacts a run writes."""

    posterior: bool = True
    percentiles: bool = True
    mismatch: bool = True
    coverage: bool = False
    cumulative: bool = False


class RunConfig(BaseModel):
    """Complete, validated description of one pipeline run."""

    model_config = ConfigDict(use_enum_values=False)

    method: RunMethod = Field(default=RunMethod.DSI_ESMDA)
    layout_path: Path
    ensemble_path: Path
    observations_path: Path
    reference_path: Optional[Path] = None
    output_dir: Path = Field(default=Path("output/run"))
    esmda: EsmdaConfig = Field(default_factory=EsmdaConfig)
    rml: RmlConfig = Field(default_factory=RmlConfig)
    emit: EmitFlags = Field(default_factory=EmitFlags)
    verbose: bool = True

    @model_validator(mode="after")
    def _check_files(self) -> "RunConfig":
        for name in ("layout_path", "ensemble_path", "observations_path"):
            path = getattr(self, name)
            if not path.is_file():
                raise ValueError(f"{name} does not exist: {path}")
        if self.reference_path is not None and not self.reference_path.is_file():
            raise ValueError(f"reference_path does not exist: {self.reference_path}")
        if self.emit.coverage and self.reference_path is None:
            raise ValueError("emit.coverage needs input.reference")
        return self


class SampleStatus(BaseModel):
    """Convergence record of one RML minimization."""

    index: int
    converged: bool
    iterations: int
    grad_norm: float
    objective: float
    message: str = ""


class RunManifest(BaseModel):
    """Everything needed to reproduce a run, plus its inversion time."""

    settings: dict[str, str] = Field(description="Resolved dotted config keys")
    method: RunMethod
    n_data: int
    n_history: int
    n_members: int
    n_posterior: int
    svd_ranks: list[int] = Field(default_factory=list)
    unconverged_samples: int = 0
    median_forecast_spread_ratio: Optional[float] = None
    inversion_seconds: float = Field(description="Wall-clock time of the inversion step")


class RunResult(BaseModel):
    """Result of a pipeline invocation."""

    output_dir: str
    written_files: list[str] = Field(default_factory=list)
    manifest: Optional[RunManifest] = None
    prior_mismatch_mean: Optional[float] = None
    posterior_mismatch_mean: Optional[float] = None
    success: bool = True
    errors: list[str] = Field(default_factory=list)
    warnings: list[str] = Field(default_factory=list)
