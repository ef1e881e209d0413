#!/usr/bin/env python3
"""Wiener reconstruction attacks.

``asymmetry``: accurate-plan attack on AHGMM against the optimal-kernel attack
on AGB, per threshold.  ``knowledge``: optimal, pseudo and accurate attacks
on the same AHGMM faces for several noise-to-signal ratios.
"""

import argparse
import csv
import sys

import numpy as np

from ahgmm.attacks import AdversaryModel, attack_inverse
from ahgmm.bench import attack_asymmetry, derive_key
from ahgmm.dataset import build_ladder, synthetic_faces
from ahgmm.filter import filter_ahgmm
from ahgmm.geometry import DensityThreshold, FaceRegion
from ahgmm.hopping import HoppingConfig
from ahgmm.kernel import optimal_spec
from ahgmm.metrics import mse

MASTER = bytes(32)
WRONG = b"\x01" * 32


def knowledge(n, factor, nsrs, rho_o=0.5):
    thr = DensityThreshold.uniform(rho_o)
    rows = []
    for nsr in nsrs:
        err = {k: [] for k in ("optimal", "pseudo", "accurate")}
        for i, src in enumerate(synthetic_faces(n, seed=31)):
            r = build_ladder(src, (factor,), (i % 4) * 10)[0]
            face = FaceRegion.full(r.size, r.size)
            cfg = HoppingConfig(seed=derive_key(MASTER, i))
            prot, _ = filter_ahgmm(r.image, face, r.density, thr, cfg)
            so = optimal_spec(r.density, thr)
            for kind, seed in (("optimal", None), ("pseudo", derive_key(WRONG, i)),
                               ("accurate", cfg.seed)):
                rec = attack_inverse(prot, face, AdversaryModel(kind, seed=seed), so, nsr)
                err[kind].append(mse(r.image, rec))
        rows.append({"size": r.size, "nsr": nsr, "n_faces": n,
                     **{f"{k}_mse": float(np.mean(v)) for k, v in err.items()}})
    return rows


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("mode", choices=("asymmetry", "knowledge"))
    ap.add_argument("--n", type=int, default=50)
    ap.add_argument("--factor", type=int, default=1, help="ladder factor (knowledge mode)")
    ap.add_argument("--nsr", type=float, nargs="+", default=[1e-2, 1e-3, 1e-4])
    ap.add_argument("--out")
    args = ap.parse_args()
    if args.mode == "asymmetry":
        rows = [attack_asymmetry(args.n, rho, nsr) for nsr in args.nsr for rho in (0.7, 0.6, 0.5)]
    else:
        rows = knowledge(args.n, args.factor, args.nsr)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.DictWriter(fh, fieldnames=list(rows[0]))
    w.writeheader()
    w.writerows(rows)
