#!/usr/bin/env python3
"""Blow-up baseline: supercritical collapse at two resolutions plus the
subcritical control. Prints the firing times and their relative spread."""

import argparse
import sys
from pathlib import Path

from ksmix.cli import main as cli_main

ROOT = Path(__file__).resolve().parent.parent


def run() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/blowup")
    args = ap.parse_args()
    cfg = str(ROOT / "configs" / "blowup.cfg")
    rc = 0
    for n in (128, 256):
        print(f"--- supercritical bump, n={n} ---")
        rc |= cli_main(["blowup", "--config", cfg, "--resolution", str(n),
                        "--out", f"{args.out}/n{n}"])
    print("--- subcritical control ---")
    sub = str(ROOT / "configs" / "blowup_subcritical.cfg")
    rc |= cli_main(["blowup", "--config", sub, "--out", f"{args.out}/subcritical"])
    return rc


if __name__ == "__main__":
    sys.exit(run())
