#!/usr/bin/env python3
"""Energy kept above the threshold frequency, split by filter variant.

Shows which part of the AHGMM design lets high frequencies through: the
hops, the supplementary kernel, or the block seams the global pass smooths.
"""

import argparse

import numpy as np

from ahgmm.baselines import filter_agb
from ahgmm.bench import derive_key
from ahgmm.dataset import DEFAULT_PITCHES_DEG, build_ladder, synthetic_faces
from ahgmm.filter import filter_ahgmm
from ahgmm.geometry import DensityThreshold, FaceRegion
from ahgmm.hopping import HoppingConfig
from ahgmm.metrics import band_power

VARIANTS = {
    "agb": None,
    "ahgmm": dict(),
    "ahgmm zero hops": dict(zero_hops=True),
    "ahgmm M=0": dict(m=0),
    "ahgmm M=0 zero hops": dict(m=0, zero_hops=True),
    "ahgmm gamma=1": dict(gamma=1.0),
    "ahgmm no global pass": dict(global_smoothing=False),
}

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=50)
    ap.add_argument("--rho-o", type=float, default=0.5)
    args = ap.parse_args()
    thr = DensityThreshold.uniform(args.rho_o)
    faces = synthetic_faces(args.n, seed=404)
    face = FaceRegion.full(96, 96)
    print(f"{'variant':24s} {'mirror %':>9s} {'periodic %':>11s}")
    for name, kw in VARIANTS.items():
        mirror, periodic = [], []
        for i, img in enumerate(faces):
            d = build_ladder(img, (1,), DEFAULT_PITCHES_DEG[i % 8])[0].density
            c = (thr.rho_h_o / (2 * d.rho_h), thr.rho_v_o / (2 * d.rho_v))
            if kw is None:
                out = filter_agb(img, face, d, thr)
            else:
                opts = dict(kw)
                cfg = HoppingConfig(num_supplementary=opts.pop("m", 1),
                                    gamma=opts.pop("gamma", 0.5),
                                    seed=derive_key(bytes.fromhex("a5" * 32), i))
                out, _ = filter_ahgmm(img, face, d, thr, cfg, **opts)
            mirror.append(band_power(out, c, mirror=True) / band_power(img, c, mirror=True))
            periodic.append(band_power(out, c) / band_power(img, c))
        print(f"{name:24s} {100 * np.mean(mirror):9.3f} {100 * np.mean(periodic):11.3f}")
