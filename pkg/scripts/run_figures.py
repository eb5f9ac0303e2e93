#!/usr/bin/env python3
"""Run one or more figure presets end to end.

Usage:
    python scripts/run_figures.py fig1 fig2 --out results
    python scripts/run_figures.py all
"""

import argparse
import sys

from fhn_meanfield import presets
from fhn_meanfield.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("names", nargs="+",
                        help="preset names (fig1..fig5) or 'all'")
    parser.add_argument("--out", default="out", help="output root directory")
    args = parser.parse_args()

    names = presets.available() if "all" in args.names else args.names
    for name in names:
        print(f"== scenario {name} ==", flush=True)
        code = cli_main(["scenario", name, "--out", args.out])
        if code != 0:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
