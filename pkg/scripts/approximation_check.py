#!/usr/bin/env python3
"""Paired runs of the full dynamics against pure transport over a fixed
flow-time budget: the sup L2 distance should fall as amplitude doubles."""

import argparse
import sys
from pathlib import Path

from ksmix.cli import main as cli_main

ROOT = Path(__file__).resolve().parent.parent


def run() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/approx")
    args = ap.parse_args()
    return cli_main(["approx", "--config", str(ROOT / "configs" / "approx.cfg"),
                     "--out", args.out])


if __name__ == "__main__":
    sys.exit(run())
