#!/usr/bin/env python3
"""Build every scenario preset, analyze it, and print the metric trees.

Usage: python scripts/run_presets.py [--scale K] [--json]
"""

import argparse
import json
import sys

from heteff import (
    PRESET_NAMES,
    RenderOptions,
    build,
    compute_report,
    preset,
    render_json,
    render_text,
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--scale", type=int, default=1, help="duration multiplier")
    parser.add_argument("--json", action="store_true", help="emit one JSON object per preset")
    args = parser.parse_args()

    out = {}
    for name in PRESET_NAMES:
        report = compute_report(build(preset(name, args.scale)))
        if args.json:
            out[name] = json.loads(render_json(report))
        else:
            print(f"=== {name} ===")
            print(render_text(report, RenderOptions(show_raw=True)))
    if args.json:
        json.dump(out, sys.stdout, indent=2)
        print()
    return 0


if __name__ == "__main__":
    sys.exit(main())
