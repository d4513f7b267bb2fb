"""Main entry point for dsi-forecast.

Usage:
    python -m src.main run --config run.txt
    python -m src.main run --config run.txt --esmda.na 8 --localization.lx 1500
    python -m src.main run --manifest output/run/manifest.json --output.dir output/rerun
    python -m src.main make-testcase --kind decline --output output/decline
    python -m src.main diagnose --layout layout.csv --ensemble posterior.csv -o output/diag
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional

from src.config.settings import KEYS, configure_settings
from src.exceptions import ConfigError, DsiError
from src.pipeline.inversion_pipeline import InversionPipeline, diagnose, make_testcase
from src.utils.report_templates import ReportTemplates


def print_banner():
    """Print the application banner."""
    banner = """
╔═══════════════════════════════════════════════════════════════╗
║           dsi-forecast: data-space inversion                  ║
║           DSI-ESMDA and PCA + RML production forecasts        ║
╚═══════════════════════════════════════════════════════════════╝
    """
    print(banner)


def configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )


def build_parser() -> argparse.ArgumentParser:
    """Build the command line parser.

    Returns:
        Configured parser
    """
    parser = argparse.ArgumentParser(
        prog="dsi-forecast",
        description="Condition production forecasts on observed history in data space",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  Export a synthetic case and invert it with DSI-ESMDA:
    python -m src.main make-testcase --kind decline --output output/decline
    python -m src.main run --config output/decline/config.txt

  Same run with localization and eight assimilations:
    python -m src.main run --config output/decline/config.txt \\
        --esmda.na 8 --localization.lx 2000 --localization.ly 2000 --localization.t 6000

  PCA + RML instead:
    python -m src.main run --config output/decline/config.txt --method dsi_rml

  Statistics of an existing ensemble:
    python -m src.main diagnose --layout output/decline/layout.csv \\
        --ensemble output/decline/run/posterior.csv --output output/diag
        """,
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    run = subparsers.add_parser("run", help="Run an inversion")
    run.add_argument("-c", "--config", help="key=value config file")
    run.add_argument(
        "--manifest", help="Re-run the settings recorded in a run manifest"
    )
    run.add_argument("-q", "--quiet", action="store_true", help="Disable verbose output")
    settings_group = run.add_argument_group("settings (override the config file)")
    for key in KEYS:
        settings_group.add_argument(f"--{key}", dest=key, metavar="VALUE", default=None)

    diag = subparsers.add_parser("diagnose", help="Statistics of an existing ensemble")
    diag.add_argument("--layout", required=True, help="Layout CSV")
    diag.add_argument("--ensemble", required=True, help="Ensemble CSV")
    diag.add_argument("--observations", help="Observations CSV, enables mismatch")
    diag.add_argument("--reference", help="Reference CSV, enables coverage")
    diag.add_argument("--cumulative", action="store_true", help="Write cumulative.csv")
    diag.add_argument("-o", "--output", default="output/diagnose", help="Output directory")
    diag.add_argument("-q", "--quiet", action="store_true", help="Disable verbose output")

    case = subparsers.add_parser("make-testcase", help="Export a synthetic testbed case")
    case.add_argument("--kind", choices=["linear", "decline"], default="decline")
    case.add_argument("-o", "--output", default="output/testcase", help="Output directory")
    case.add_argument("--seed", type=int, default=0, help="Random seed (default: 0)")
    case.add_argument("--members", type=int, default=None, help="Prior ensemble size")
    case.add_argument(
        "--biased",
        action="store_true",
        help="Reference at the prior's 99th production percentile (decline only)",
    )
    case.add_argument(
        "--wells", type=int, default=None, help="Producers (decline only, default: 4)"
    )
    case.add_argument(
        "--injectors", type=int, default=None, help="Water injectors (decline only, default: 0)"
    )
    case.add_argument(
        "--history-cut",
        type=int,
        default=None,
        help="Observed monthly steps out of 60 (decline only, default: 24)",
    )
    case.add_argument(
        "--noise-frac",
        type=float,
        default=None,
        help="Noise std as a fraction of the truth (decline only, default: 0.1)",
    )
    case.add_argument("-q", "--quiet", action="store_true", help="Disable verbose output")
    return parser


def _read_manifest(path: str) -> dict[str, str]:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        return {str(k): str(v) for k, v in payload["settings"].items()}
    except (OSError, ValueError, KeyError, TypeError, AttributeError) as e:
        raise ConfigError(f"cannot read run manifest {path}: {e}") from None


def command_run(args: argparse.Namespace) -> int:
    overrides = {key: vars(args)[key] for key in KEYS if vars(args)[key] is not None}
    if args.quiet:
        overrides["verbose"] = "false"
    base = _read_manifest(args.manifest) if args.manifest else None
    settings = configure_settings(config_path=args.config, overrides=overrides, base=base)
    verbose = settings.verbose
    configure_logging(verbose)
    if verbose:
        print_banner()
        for warning in settings.validate():
            print(f"⚠️  {warning}")

    config = settings.to_run_config()
    if verbose:
        print(f"📄 Layout: {config.layout_path}")
        print(f"📄 Ensemble: {config.ensemble_path}")
        print(f"📄 Observations: {config.observations_path}")
        print(f"📁 Output directory: {config.output_dir}")
        print()

    pipeline = InversionPipeline(config, settings=settings.to_flat(), verbose=verbose)
    result = pipeline.run()

    print("\n" + "=" * 60)
    print("✅ Inversion completed successfully!")
    if result.prior_mismatch_mean is not None:
        print(
            f"   Mismatch: prior {result.prior_mismatch_mean:.4g} → "
            f"posterior {result.posterior_mismatch_mean:.4g}"
        )
    for warning in result.warnings:
        print(f"⚠️  {warning}")
    if verbose and result.manifest is not None:
        print()
        print(ReportTemplates.manifest_summary(result.manifest), end="")
    if verbose:
        print()
        print("📁 Written files:")
        for name in result.written_files:
            print(f"   ✓ {config.output_dir}/{name}")
    print("=" * 60)
    return 0


def command_diagnose(args: argparse.Namespace) -> int:
    configure_logging(not args.quiet)
    written = diagnose(
        layout_path=Path(args.layout),
        ensemble_path=Path(args.ensemble),
        output_dir=Path(args.output),
        observations_path=Path(args.observations) if args.observations else None,
        reference_path=Path(args.reference) if args.reference else None,
        cumulative=args.cumulative,
    )
    if not args.quiet:
        print("📁 Written files:")
        for name in written:
            print(f"   ✓ {args.output}/{name}")
    return 0


def command_make_testcase(args: argparse.Namespace) -> int:
    configure_logging(not args.quiet)
    written = make_testcase(
        kind=args.kind,
        output_dir=Path(args.output),
        seed=args.seed,
        biased=args.biased,
        n_members=args.members,
        n_wells=args.wells,
        history_cut=args.history_cut,
        noise_frac=args.noise_frac,
        n_injectors=args.injectors,
    )
    if not args.quiet:
        print(f"🧪 {args.kind} testbed case written:")
        for name in written:
            print(f"   ✓ {args.output}/{name}")
        print()
        print("🚀 To invert it:")
        print(f"   python -m src.main run --config {Path(args.output) / 'config.txt'}")
    return 0


COMMANDS = {
    "run": command_run,
    "diagnose": command_diagnose,
    "make-testcase": command_make_testcase,
}


def main(argv: Optional[list[str]] = None) -> int:
    """Main entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    verbose = not args.quiet
    try:
        return COMMANDS[args.command](args)
    except DsiError as e:
        print(f"❌ {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code
    except KeyboardInterrupt:
        print("\n\n⚠️  Interrupted by user", file=sys.stderr)
        return 130
    except Exception as e:
        print(f"\n❌ Unexpected error: {e}", file=sys.stderr)
        if verbose:
            import traceback

            traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
