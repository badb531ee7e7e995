#!/usr/bin/env python3
"""Empirical constants of the functional inequalities over a random
ensemble at two resolutions, with the refinement-stability factor."""

import argparse
import sys
from pathlib import Path

from ksmix.cli import main as cli_main

ROOT = Path(__file__).resolve().parent.parent


def run() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/ineq")
    args = ap.parse_args()
    return cli_main(["ineq", "--config", str(ROOT / "configs" / "ineq.cfg"),
                     "--out", args.out])


if __name__ == "__main__":
    sys.exit(run())
