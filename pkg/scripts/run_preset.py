#!/usr/bin/env python3
"""Run one of the built-in experiment presets and print the manifest."""
import argparse
import sys

from diraclab import list_presets, parse_config_dict, run


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("preset", nargs="?", help="preset name (omit to list)")
    parser.add_argument("--output-root", default=None,
                        help="directory the preset output tree is rooted in")
    parser.add_argument("--parallel", action="store_true")
    args = parser.parse_args()
    if not args.preset:
        for name, description in list_presets():
            print(f"{name:24s} {description}")
        return 0
    config = parse_config_dict({"preset": args.preset})
    manifest = run(config, parallel=args.parallel, output_root=args.output_root)
    for label, status in manifest.task_status.items():
        print(f"{label:28s} {status}  ({manifest.wall_clock[label]:.2f} s)")
    return 1 if manifest.failed else 0


if __name__ == "__main__":
    sys.exit(main())
