"""Command line interface: run, validate, list-presets.

Exit codes: 0 success, 1 task failure (manifest still written), 2 invalid
configuration.  The environment variable DIRACLAB_OUTPUT_ROOT, when set,
is prepended to the configured output directory.
"""
from __future__ import annotations

import argparse
import sys

from .config import ConfigError, load_config, parse_config_dict
from .presets import list_presets
from .runner import run


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diraclab",
        description="Spectral experiments with deformed Dirac operators "
                    "on flat tori")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute an experiment configuration")
    run_p.add_argument("config", nargs="?", help="path to a TOML config file")
    run_p.add_argument("--preset", help="run a built-in preset instead of a file")
    run_p.add_argument("--output-root", help="override the output root directory")
    run_p.add_argument("--parallel", action="store_true",
                       help="run independent tasks concurrently "
                            "(results are identical to a sequential run)")

    val_p = sub.add_parser("validate", help="validate a configuration file")
    val_p.add_argument("config", help="path to a TOML config file")

    sub.add_parser("list-presets", help="list built-in experiments")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "list-presets":
        for name, description in list_presets():
            print(f"{name:24s} {description}")
        return 0
    if args.command == "validate":
        try:
            config = load_config(args.config)
        except ConfigError as exc:
            print(f"invalid: {exc}", file=sys.stderr)
            return 2
        print(f"ok: {len(config.tasks)} task(s), "
              f"config hash {config.config_hash()[:16]}")
        return 0
    # run
    try:
        if args.preset and args.config:
            raise ConfigError("give either a config file or --preset, not both")
        if args.preset:
            config = parse_config_dict({"preset": args.preset})
        elif args.config:
            config = load_config(args.config)
        else:
            raise ConfigError("a config file or --preset is required")
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2
    manifest = run(config, parallel=args.parallel,
                   output_root=args.output_root)
    for label, status in manifest.task_status.items():
        seconds = manifest.wall_clock[label]
        print(f"{label:28s} {status}  ({seconds:.2f} s)")
    if manifest.failed:
        print("one or more tasks failed; see the manifest", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
