"""Command-line entry point: run, validate, print-defaults.

Exit codes: 0 ok, 1 config error, 2 numerical error, 3 I/O error.  The
config file is the single source of truth; only --parallelism and
--output-dir may override it.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import default_config_text, parse_config
from .errors import (
    DelayRunError,
    NumericalBlowupError,
    PhysicsInvariantError,
    ValidationError,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fringesim",
        description=(
            "Delay-scan simulator of two-pulse fringe formation in a "
            "quantum-dot optical amplifier"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the configured delay scan")
    run.add_argument("config", type=Path)
    run.add_argument("--parallelism", type=int, default=None, metavar="N")
    run.add_argument("--output-dir", type=Path, default=None, metavar="PATH")

    val = sub.add_parser("validate", help="parse and validate a config file")
    val.add_argument("config", type=Path)

    sub.add_parser("print-defaults", help="print the full default config")
    return parser


def _load_config(path: Path):
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_IO)
    try:
        return parse_config(text)
    except ValidationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "print-defaults":
        print(default_config_text())
        return EXIT_OK

    config = _load_config(args.config)

    if args.command == "validate":
        print(f"{args.config}: ok")
        return EXIT_OK

    from .runner import run_scan

    try:
        result = run_scan(
            config,
            output_dir=str(args.output_dir) if args.output_dir else None,
            parallelism=args.parallelism,
        )
    except (NumericalBlowupError, PhysicsInvariantError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DelayRunError as exc:
        print(f"scan aborted, {exc}", file=sys.stderr)
        return EXIT_NUMERICAL if exc.kind == "numerical" else EXIT_CONFIG
    except ValidationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO

    coh = result.summary["coherence"]
    print(f"wrote {result.results_csv} ({len(result.records)} rows)")
    print(f"wrote {result.summary_json}")
    if coh is not None:
        print(
            f"coherence time {coh['t_coh_fs']:.1f} fs (r^2 = {coh['r_squared']:.3f})"
        )
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
