"""Orchestration of inversion runs, diagnostics and testbed export."""

import logging
import time
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from src.diagnostics.metrics import (
    DEFAULT_PROBS,
    coverage,
    cumulative_production,
    normalized_mismatch,
    percentile_band,
    spread_ratio,
)
from src.exceptions import ConfigError, DataError, DsiError, NumericalError
from src.methods.dsi_esmda import run_dsi_esmda
from src.methods.dsi_rml import run_dsi_rml
from src.models.ensemble import EnsembleMatrix, Observations
from src.models.schemas import (
    DataKind,
    DataLayout,
    RunConfig,
    RunManifest,
    RunMethod,
    RunResult,
)
from src.testbed.decline import build_decline_case
from src.testbed.linear import build_linear_case
from src.utils.file_handler import (
    FileHandler,
    load_inputs,
    member_columns,
    read_ensemble,
    read_layout,
    read_observations,
    read_reference,
)
from src.utils.report_templates import ReportTemplates

logger = logging.getLogger(__name__)

# Keys that do not influence the numbers a run produces.
MANIFEST_EXCLUDED_KEYS = ("output.dir", "verbose")

RATE_KINDS = (DataKind.OIL_RATE, DataKind.WATER_RATE, DataKind.INJECTION_RATE)


def _fail(handler: FileHandler, error: BaseException) -> None:
    """Remove partial outputs and re-raise, numerical failures as NumericalError."""
    removed = handler.remove_written()
    if removed:
        logger.info("removed %d partial output file(s)", len(removed))
    if isinstance(error, (np.linalg.LinAlgError, ValueError)) and not isinstance(
        error, DsiError
    ):
        raise NumericalError(f"numerical failure: {error}") from error
    raise error


def _percentile_name(prob: float) -> str:
    return f"p{round(100 * prob):02d}"


class InversionPipeline:
    """Runs one configured inversion and writes its artifacts."""

    def __init__(
        self,
        config: RunConfig,
        settings: Optional[dict[str, str]] = None,
        verbose: bool = True,
    ):
        """Initialize the pipeline.

        Args:
            config: Validated run description
            settings: Resolved dotted config keys, recorded in the manifest
            verbose: Whether to print progress lines
        """
        self.config = config
        self.settings = {
            k: v for k, v in (settings or {}).items() if k not in MANIFEST_EXCLUDED_KEYS
        }
        self.verbose = verbose
        self.file_handler = FileHandler(str(config.output_dir))

    def _say(self, message: str) -> None:
        if self.verbose:
            print(message)

    def run(self) -> RunResult:
        """Load inputs, invert, and write every requested artifact.

        Partial outputs are removed when any step fails.
        """
        try:
            return self._run()
        except BaseException as e:
            _fail(self.file_handler, e)

    def _run(self) -> RunResult:
        cfg = self.config
        self._say("📥 Loading inputs...")
        layout, prior, obs = load_inputs(
            cfg.layout_path, cfg.ensemble_path, cfg.observations_path
        )
        reference = None
        if cfg.reference_path is not None:
            reference = read_reference(cfg.reference_path, layout)
        self._say(
            f"   {layout.n_data} elements ({layout.n_history} history), "
            f"{prior.n_members} members"
        )

        result = RunResult(output_dir=str(self.file_handler.base_path))
        svd_ranks: list[int] = []
        unconverged = 0

        self._say(f"🧮 Running {cfg.method.value}...")
        start = time.perf_counter()
        if cfg.method == RunMethod.DSI_ESMDA:
            history: list = []
            posterior_data = run_dsi_esmda(prior, obs, cfg.esmda, history=history).data
            svd_ranks = [record.svd_rank for record in history]
        else:
            rml = run_dsi_rml(prior, obs, cfg.rml)
            posterior_data = rml.data
            svd_ranks = [rml.pca_rank]
            unconverged = len(rml.unconverged)
            if unconverged:
                result.warnings.append(
                    f"{unconverged} of {len(rml.samples)} RML samples did not converge"
                )
        seconds = time.perf_counter() - start
        self._say(f"   inversion took {seconds:.3f} s")

        self.file_handler.ensure_directory()
        self._say("💾 Writing artifacts...")
        if cfg.method == RunMethod.DSI_RML:
            self.file_handler.write_frame(
                "rml_samples.csv",
                pd.DataFrame([s.model_dump() for s in rml.samples]),
            )

        posterior = None
        if posterior_data.shape[1] >= 2:
            posterior = EnsembleMatrix(data=posterior_data, layout=layout)
        else:
            result.warnings.append(
                "posterior has a single sample; ensemble statistics are skipped"
            )

        if cfg.emit.posterior:
            self.file_handler.write_ensemble("posterior.csv", posterior_data, layout)
        if posterior is not None:
            self._write_statistics(result, prior, posterior, obs, reference)

        median_ratio = None
        if posterior is not None and layout.forecast_indices.size:
            ratios = spread_ratio(prior, posterior)[layout.forecast_indices]
            finite = ratios[np.isfinite(ratios)]
            median_ratio = float(np.median(finite)) if finite.size else None

        result.manifest = RunManifest(
            settings=self.settings,
            method=cfg.method,
            n_data=layout.n_data,
            n_history=layout.n_history,
            n_members=prior.n_members,
            n_posterior=posterior_data.shape[1],
            svd_ranks=svd_ranks,
            unconverged_samples=unconverged,
            median_forecast_spread_ratio=median_ratio,
            inversion_seconds=seconds,
        )
        self.file_handler.write_json(
            "manifest.json", result.manifest.model_dump(mode="json")
        )
        result.written_files = [
            self.file_handler.get_relative_path(str(p)) for p in self.file_handler.written
        ]
        return result

    def _write_statistics(
        self,
        result: RunResult,
        prior: EnsembleMatrix,
        posterior: EnsembleMatrix,
        obs: Observations,
        reference: Optional[np.ndarray],
    ) -> None:
        emit = self.config.emit
        layout = prior.layout
        if emit.percentiles:
            self.file_handler.write_frame(
                "percentiles.csv", percentile_frame(layout, prior, posterior)
            )
        if emit.mismatch:
            prior_report = normalized_mismatch(prior, obs)
            post_report = normalized_mismatch(posterior, obs)
            result.prior_mismatch_mean = prior_report.mean
            result.posterior_mismatch_mean = post_report.mean
            write_mismatch(
                self.file_handler,
                layout,
                [("prior", prior_report), ("posterior", post_report)],
            )
            self._say(
                f"   mismatch: prior {prior_report.mean:.4g}, "
                f"posterior {post_report.mean:.4g}"
            )
        if emit.coverage and reference is not None:
            self.file_handler.write_frame(
                "coverage.csv",
                coverage_frame(layout, reference, [("prior", prior), ("posterior", posterior)]),
            )
        if emit.cumulative:
            self.file_handler.write_frame(
                "cumulative.csv",
                cumulative_frame([("prior", prior), ("posterior", posterior)]),
            )


def percentile_frame(layout: DataLayout, *ensembles: EnsembleMatrix) -> pd.DataFrame:
    """P10/P50/P90 per element; with two ensembles the first is prefixed ``prior_``."""
    frame = pd.DataFrame({"id": layout.ids})
    prefixes = ["prior_", ""] if len(ensembles) == 2 else [""]
    for prefix, ens in zip(prefixes, ensembles):
        band = percentile_band(ens, DEFAULT_PROBS)
        for prob, values in zip(band.probs, band.values):
            frame[f"{prefix}{_percentile_name(prob)}"] = values
    return frame


def write_mismatch(handler: FileHandler, layout: DataLayout, reports: list) -> None:
    """Per-member values as CSV plus the mean/std table as text."""
    rows = []
    for label, report in reports:
        for j, value in enumerate(report.per_member):
            rows.append({"ensemble": label, "member": f"m{j + 1:04d}", "mismatch": value})
    handler.write_frame("mismatch.csv", pd.DataFrame(rows))
    table = ReportTemplates.mismatch_table(
        [
            {
                "label": label,
                "members": report.per_member.size,
                "mean": report.mean,
                "std": report.std,
            }
            for label, report in reports
        ],
        n_history=layout.n_history,
    )
    handler.write_text("mismatch.txt", table)


def coverage_frame(
    layout: DataLayout, reference: np.ndarray, ensembles: list
) -> pd.DataFrame:
    subsets = {
        "all": None,
        "history": layout.history_indices,
        "forecast": layout.forecast_indices,
    }
    rows = []
    for label, ens in ensembles:
        row = {"ensemble": label}
        for name, subset in subsets.items():
            row[name] = coverage(ens, reference, 0.1, 0.9, rows=subset)
        rows.append(row)
    return pd.DataFrame(rows)


def cumulative_frame(ensembles: list) -> pd.DataFrame:
    """Field cumulative volume per member for every rate kind present."""
    frames = []
    for label, ens in ensembles:
        present = set(ens.layout.kinds)
        frame = pd.DataFrame(
            {"ensemble": label, "member": member_columns(ens.n_members)}
        )
        for kind in RATE_KINDS:
            if kind in present:
                frame[kind.value] = cumulative_production(ens, kind)
        frames.append(frame)
    return pd.concat(frames, ignore_index=True)


def diagnose(
    layout_path: Path,
    ensemble_path: Path,
    output_dir: Path,
    observations_path: Optional[Path] = None,
    reference_path: Optional[Path] = None,
    cumulative: bool = False,
) -> list[str]:
    """Write percentiles, mismatch, coverage and cumulative tables for one ensemble."""
    handler = FileHandler(str(output_dir))
    try:
        layout = read_layout(layout_path)
        ens = read_ensemble(ensemble_path, layout)
        handler.write_frame("percentiles.csv", percentile_frame(layout, ens))
        if observations_path is not None:
            obs = read_observations(observations_path, layout)
            write_mismatch(handler, layout, [("ensemble", normalized_mismatch(ens, obs))])
        if reference_path is not None:
            reference = read_reference(reference_path, layout)
            handler.write_frame(
                "coverage.csv", coverage_frame(layout, reference, [("ensemble", ens)])
            )
        if cumulative:
            handler.write_frame("cumulative.csv", cumulative_frame([("ensemble", ens)]))
    except BaseException as e:
        _fail(handler, e)
    return [handler.get_relative_path(str(p)) for p in handler.written]


def make_testcase(
    kind: str,
    output_dir: Path,
    seed: int = 0,
    biased: bool = False,
    n_members: Optional[int] = None,
    n_wells: Optional[int] = None,
    history_cut: Optional[int] = None,
    noise_frac: Optional[float] = None,
    n_injectors: Optional[int] = None,
) -> list[str]:
    """Export a testbed case as input files plus a ready-to-run config.

    ``biased``, ``n_wells``, ``history_cut``, ``noise_frac`` and ``n_injectors``
    shape the decline case; unset values keep its defaults.
    """
    if seed < 0:
        raise ConfigError(f"--seed must be non-negative, got {seed}")
    decline_options = {
        "n_wells": n_wells,
        "history_cut": history_cut,
        "noise_frac": noise_frac,
        "n_injectors": n_injectors,
    }
    decline_options = {k: v for k, v in decline_options.items() if v is not None}
    handler = FileHandler(str(output_dir))
    try:
        if kind == "linear":
            if biased or decline_options:
                raise ConfigError(
                    "--biased, --wells, --injectors, --history-cut and --noise-frac "
                    "apply to the decline case only"
                )
            case = build_linear_case(n_members=n_members or 200, rng_seed=seed)
        elif kind == "decline":
            case = build_decline_case(
                n_members=n_members or 200, rng_seed=seed, biased=biased, **decline_options
            )
        else:
            raise ConfigError(f"unknown testcase kind {kind!r}; expected linear or decline")
    except DataError as e:
        raise ConfigError(str(e)) from None
    layout, prior, obs, reference = case.layout, case.prior, case.observations, case.reference

    base = Path(output_dir)
    config_lines = [
        f"# {kind} testbed case, seed {seed}",
        f"seed={seed}",
        f"input.layout={base / 'layout.csv'}",
        f"input.ensemble={base / 'ensemble.csv'}",
        f"input.observations={base / 'observations.csv'}",
        f"input.reference={base / 'reference.csv'}",
        f"output.dir={base / 'run'}",
        "emit.coverage=true",
        "",
    ]
    try:
        handler.write_layout("layout.csv", layout)
        handler.write_ensemble("ensemble.csv", prior.data, layout)
        handler.write_observations("observations.csv", obs, layout)
        handler.write_reference("reference.csv", reference, layout)
        handler.write_text("config.txt", "\n".join(config_lines))
    except BaseException as e:
        _fail(handler, e)
    return [handler.get_relative_path(str(p)) for p in handler.written]
