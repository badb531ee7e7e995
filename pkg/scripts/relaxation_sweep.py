#!/usr/bin/env python3
"""Relaxation-rate sweep: fitted exponential decay rate of the L2
deviation versus shear amplitude on supercritical-mass data."""

import argparse
import sys
from pathlib import Path

from ksmix.cli import main as cli_main

ROOT = Path(__file__).resolve().parent.parent


def run() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/relax")
    args = ap.parse_args()
    return cli_main(["relax", "--config", str(ROOT / "configs" / "relax.cfg"),
                     "--out", args.out])


if __name__ == "__main__":
    sys.exit(run())
