#!/usr/bin/env python3
"""Amplitude sweep of the alternating shear on blow-up-prone data: finds
the least amplitude that outlives the zero-flow baseline fivefold.
Expect roughly ten minutes of runtime at the configured n=512."""

import argparse
import sys
from pathlib import Path

from ksmix.cli import main as cli_main

ROOT = Path(__file__).resolve().parent.parent


def run() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/suppress")
    ap.add_argument("--resolution", type=int, default=None)
    args = ap.parse_args()
    argv = ["suppress", "--config", str(ROOT / "configs" / "suppress.cfg"),
            "--out", args.out]
    if args.resolution:
        argv += ["--resolution", str(args.resolution)]
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(run())
