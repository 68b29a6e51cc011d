#!/usr/bin/env python3
"""Run every canned preset and write one CSV per preset.

Usage: python3 scripts/run_presets.py [--out-dir results] [--seed 0]
"""

import argparse
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from incsim.cli import PRESETS, cmd_preset  # noqa: E402


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="results")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--format", default="csv", choices=("csv", "json"))
    args = parser.parse_args()

    out_dir = pathlib.Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ext = args.format
    for name in PRESETS:
        target = out_dir / f"{name}.{ext}"
        cmd_preset(name, str(target), args.format, seed=args.seed)
        print(f"wrote {target}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
