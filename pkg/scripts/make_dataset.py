#!/usr/bin/env python3
"""Write the multi-resolution ladder from procedural faces and/or 96x96 crops."""

import argparse

from ahgmm.cli import run

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="data/ladder")
    ap.add_argument("--synthetic", type=int, default=10)
    ap.add_argument("--src", nargs="*", default=[])
    args = ap.parse_args()
    raise SystemExit(run(["dataset", "--out", args.out, "--synthetic", str(args.synthetic),
                          "--src", *args.src]))
