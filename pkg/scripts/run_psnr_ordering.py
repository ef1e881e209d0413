#!/usr/bin/env python3
"""Pooled and mean PSNR of AGB, SVGB, AHGMM and FGB over ladder faces."""

import argparse
import csv
import sys

from ahgmm.bench import psnr_ordering

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--rho-o", type=float, nargs="+", default=[0.5])
    ap.add_argument("--out", help="CSV path (default stdout)")
    args = ap.parse_args()
    rows = [dict(rho_o=r, **row) for r in args.rho_o for row in psnr_ordering(args.n, r)]
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.DictWriter(fh, fieldnames=list(rows[0]))
    w.writeheader()
    w.writerows(rows)
