"""Configuration settings for dsi-forecast.

Settings come from three layers: dataclass defaults, a flat ``key=value``
config file with dotted section keys, and command-line flags of the same
names. Later layers win.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from pydantic import ValidationError

from src.exceptions import ConfigError
from src.models.schemas import (
    DataKind,
    EmitFlags,
    EsmdaConfig,
    LocalizationSpec,
    MdaSchedule,
    RmlConfig,
    RunConfig,
    RunMethod,
)

# Field-scale critical lengths, used when localization is switched on
# without explicit lengths.
DEFAULT_LX = 2000.0
DEFAULT_LY = 2000.0
DEFAULT_T = 6000.0


@dataclass
class InputSettings:
    """Input file locations."""

    layout: Optional[str] = None
    ensemble: Optional[str] = None
    observations: Optional[str] = None
    reference: Optional[str] = None


@dataclass
class OutputSettings:
    """Output configuration."""

    dir: str = "output/run"


@dataclass
class SvdSettings:
    energy: float = 0.99


@dataclass
class EsmdaSettings:
    """DSI-ESMDA settings."""

    na: int = 4
    alphas: Optional[list[float]] = None
    perturb: bool = True
    truncate_kinds: list[str] = field(default_factory=lambda: ["water_rate"])

    def schedule(self) -> MdaSchedule:
        if self.alphas:
            return MdaSchedule(alphas=self.alphas)
        return MdaSchedule.uniform(self.na)


@dataclass
class LocalizationSettings:
    """Gaspari-Cohn taper lengths; off unless lengths are given or it is enabled."""

    enabled: Optional[bool] = None
    lx: Optional[float] = None
    ly: Optional[float] = None
    t: Optional[float] = None
    theta: float = 0.0

    def is_enabled(self) -> bool:
        if self.enabled is not None:
            return self.enabled
        return None not in (self.lx, self.ly, self.t)

    def spec(self) -> LocalizationSpec:
        if not self.is_enabled():
            return LocalizationSpec.disabled()
        return LocalizationSpec(
            lx=DEFAULT_LX if self.lx is None else self.lx,
            ly=DEFAULT_LY if self.ly is None else self.ly,
            t=DEFAULT_T if self.t is None else self.t,
            theta=self.theta,
            enabled=True,
        )


@dataclass
class RmlSettings:
    """DSI (PCA + RML) settings."""

    samples: int = 100
    anamorphosis: bool = False
    rescale: bool = False
    memory: int = 10
    max_iter: int = 500
    gtol: float = 1e-6
    n_jobs: int = 1


@dataclass
class EmitSettings:
    """Artifacts written by a run."""

    posterior: bool = True
    percentiles: bool = True
    mismatch: bool = True
    coverage: bool = False
    cumulative: bool = False


@dataclass
class Settings:
    """Main configuration class."""

    method: str = RunMethod.DSI_ESMDA.value
    seed: int = 0
    input: InputSettings = field(default_factory=InputSettings)
    output: OutputSettings = field(default_factory=OutputSettings)
    svd: SvdSettings = field(default_factory=SvdSettings)
    esmda: EsmdaSettings = field(default_factory=EsmdaSettings)
    localization: LocalizationSettings = field(default_factory=LocalizationSettings)
    rml: RmlSettings = field(default_factory=RmlSettings)
    emit: EmitSettings = field(default_factory=EmitSettings)

    # Verbose mode
    verbose: bool = True

    def set(self, key: str, text: str) -> None:
        """Assign one dotted key from its text form."""
        if key not in KEYS:
            raise ConfigError(f"unknown config key: {key}")
        value = KEYS[key](key, text.strip())
        section, _, name = key.rpartition(".")
        target = getattr(self, section) if section else self
        setattr(target, name, value)

    def get(self, key: str):
        section, _, name = key.rpartition(".")
        target = getattr(self, section) if section else self
        return getattr(target, name)

    def update(self, values: dict) -> "Settings":
        for key, text in values.items():
            self.set(key, text)
        return self

    def to_flat(self, exclude: tuple = ()) -> dict[str, str]:
        """Every set key in canonical text form, ready to be re-read."""
        flat = {}
        for key in KEYS:
            if key in exclude:
                continue
            text = _format(self.get(key))
            if text is not None:
                flat[key] = text
        return flat

    def validate(self) -> list[str]:
        """Validate settings and return list of warnings."""
        warnings = []
        loc = self.localization
        given = [v is not None for v in (loc.lx, loc.ly, loc.t)]
        if any(given) and not all(given) and loc.enabled is None:
            warnings.append(
                "localization lengths only partly given; localization stays off"
            )
        if self.esmda.alphas and self.esmda.na != len(self.esmda.alphas):
            warnings.append(
                f"esmda.alphas has {len(self.esmda.alphas)} values; esmda.na is ignored"
            )
        if self.method == RunMethod.DSI_RML.value and loc.is_enabled():
            warnings.append("localization applies to dsi_esmda only")
        return warnings

    def esmda_config(self) -> EsmdaConfig:
        return _validated(
            lambda: EsmdaConfig(
                schedule=self.esmda.schedule(),
                energy_xi=self.svd.energy,
                localization=self.localization.spec(),
                rng_seed=self.seed,
                truncate_negative_kinds=[DataKind(k) for k in self.esmda.truncate_kinds],
                perturb_observations=self.esmda.perturb,
            )
        )

    def rml_config(self) -> RmlConfig:
        return _validated(
            lambda: RmlConfig(
                n_samples=self.rml.samples,
                energy_xi=self.svd.energy,
                anamorphosis=self.rml.anamorphosis,
                rescale_by_ce=self.rml.rescale,
                memory=self.rml.memory,
                max_iter=self.rml.max_iter,
                gtol=self.rml.gtol,
                rng_seed=self.seed,
                n_jobs=self.rml.n_jobs,
            )
        )

    def to_run_config(self) -> RunConfig:
        """Build the validated run description; errors become ConfigError."""
        for key in ("input.layout", "input.ensemble", "input.observations"):
            if not self.get(key):
                raise ConfigError(f"{key} is required")
        method = _validated(lambda: RunMethod(self.method))
        esmda = self.esmda_config() if method == RunMethod.DSI_ESMDA else EsmdaConfig()
        rml = self.rml_config() if method == RunMethod.DSI_RML else RmlConfig()
        return _validated(
            lambda: RunConfig(
                method=method,
                layout_path=Path(self.input.layout),
                ensemble_path=Path(self.input.ensemble),
                observations_path=Path(self.input.observations),
                reference_path=Path(self.input.reference) if self.input.reference else None,
                output_dir=Path(self.output.dir),
                esmda=esmda,
                rml=rml,
                emit=EmitFlags(
                    posterior=self.emit.posterior,
                    percentiles=self.emit.percentiles,
                    mismatch=self.emit.mismatch,
                    coverage=self.emit.coverage,
                    cumulative=self.emit.cumulative,
                ),
                verbose=self.verbose,
            )
        )


def _validated(build: Callable):
    try:
        return build()
    except ValidationError as e:
        error = e.errors()[0]
        location = ".".join(str(p) for p in error.get("loc", ()))
        message = str(error["msg"]).removeprefix("Value error, ")
        raise ConfigError(f"{location}: {message}" if location else message) from None
    except ValueError as e:
        raise ConfigError(str(e)) from None


def _parse_bool(key: str, text: str) -> bool:
    value = text.lower()
    if value in ("true", "yes", "on", "1"):
        return True
    if value in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"{key}: expected true or false, got {text!r}")


def _parse_int(key: str, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {text!r}") from None


def _parse_float(key: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {text!r}") from None


def _parse_str(key: str, text: str) -> str:
    if not text:
        raise ConfigError(f"{key}: empty value")
    return text


def _parse_float_list(key: str, text: str) -> list[float]:
    return [_parse_float(key, part) for part in text.split(",") if part.strip()]


def _parse_kinds(key: str, text: str) -> list[str]:
    kinds = [part.strip() for part in text.split(",") if part.strip()]
    known = {k.value for k in DataKind}
    for kind in kinds:
        if kind not in known:
            raise ConfigError(f"{key}: unknown data kind {kind!r}")
    return kinds


def _parse_method(key: str, text: str) -> str:
    known = [m.value for m in RunMethod]
    if text not in known:
        raise ConfigError(f"{key}: expected one of {', '.join(known)}, got {text!r}")
    return text


KEYS: dict[str, Callable] = {
    "method": _parse_method,
    "seed": _parse_int,
    "input.layout": _parse_str,
    "input.ensemble": _parse_str,
    "input.observations": _parse_str,
    "input.reference": _parse_str,
    "output.dir": _parse_str,
    "svd.energy": _parse_float,
    "esmda.na": _parse_int,
    "esmda.alphas": _parse_float_list,
    "esmda.perturb": _parse_bool,
    "esmda.truncate_kinds": _parse_kinds,
    "localization.enabled": _parse_bool,
    "localization.lx": _parse_float,
    "localization.ly": _parse_float,
    "localization.t": _parse_float,
    "localization.theta": _parse_float,
    "rml.samples": _parse_int,
    "rml.anamorphosis": _parse_bool,
    "rml.rescale": _parse_bool,
    "rml.memory": _parse_int,
    "rml.max_iter": _parse_int,
    "rml.gtol": _parse_float,
    "rml.n_jobs": _parse_int,
    "emit.posterior": _parse_bool,
    "emit.percentiles": _parse_bool,
    "emit.mismatch": _parse_bool,
    "emit.coverage": _parse_bool,
    "emit.cumulative": _parse_bool,
    "verbose": _parse_bool,
}


def _format(value) -> Optional[str]:
    if value is None:
        return None
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return ",".join(_format(v) for v in value)
    return str(value)


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Read ``key=value`` lines; ``#`` starts a comment, blank lines are skipped."""
    values: dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"{source}, line {number}: expected key=value, got {raw!r}")
        if key not in KEYS:
            raise ConfigError(f"{source}, line {number}: unknown config key {key!r}")
        values[key] = value.strip()
    return values


def load_config_file(path: str) -> dict[str, str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from None
    return parse_config_text(text, source=str(path))


# Singleton instance
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Get the global settings instance."""
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings


def configure_settings(
    config_path: Optional[str] = None,
    overrides: Optional[dict[str, str]] = None,
    base: Optional[dict[str, str]] = None,
) -> Settings:
    """Configure and return settings: defaults, then ``base``, file, and flags.

    Args:
        config_path: Optional key=value config file
        overrides: Dotted keys from the command line; these win
        base: Dotted keys applied before the config file (e.g. a run manifest)

    Returns:
        The new global Settings
    """
    global _settings

    settings = Settings()
    settings.update(base or {})
    if config_path:
        settings.update(load_config_file(config_path))
    settings.update(overrides or {})

    _settings = settings
    return _settings
