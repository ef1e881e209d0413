"""Experiment drivers shared by the CLI ``bench`` command, scripts/ and the
acceptance tests."""

from __future__ import annotations

import hashlib
import math
import time
from dataclasses import replace

import numpy as np

from .attacks import AdversaryModel, attack_inverse
from .baselines import SvgbConfig, filter_agb, filter_fgb, filter_svgb
from .dataset import DEFAULT_PITCHES_DEG, Rung, build_ladder, synthetic_faces
from .filter import filter_ahgmm
from .geometry import DensityThreshold, FaceRegion, PixelDensity, gate
from .hopping import SEED_BYTES, HoppingConfig
from .imageio import ImagePlane
from .kernel import optimal_spec
from .metrics import dataset_psnr, mse, psnr

ALGORITHMS = ("agb", "svgb", "ahgmm", "fgb")
LADDER_FACTORS = (1, 2, 4, 8)  # the 6x6 rung is left out as inherently protected


def derive_key(master: bytes, index: int) -> bytes:
    """Per-item key from a master key, so a batch never reuses one plan."""
    return hashlib.blake2b(index.to_bytes(8, "little"), key=master,
                           digest_size=SEED_BYTES, person=b"ahgmm-item").digest()


def apply_filter(algo: str, img: ImagePlane, face: FaceRegion, density: PixelDensity,
                 thr: DensityThreshold, cfg: HoppingConfig = HoppingConfig(),
                 svgb: SvgbConfig = SvgbConfig(), threads: int = 1, **ahgmm_kw):
    """Run one of the four filters; returns ``(image, FilterReport or None)``."""
    if algo == "ahgmm":
        return filter_ahgmm(img, face, density, thr, cfg, threads=threads, **ahgmm_kw)
    if algo == "agb":
        return filter_agb(img, face, density, thr, threads), None
    if algo == "svgb":
        return filter_svgb(img, face, density, thr, svgb, threads), None
    if algo == "fgb":
        return filter_fgb(img, face, thr, threads=threads), None
    raise ValueError(f"unknown algorithm {algo!r}")


def ladder_faces(n: int, seed: int = 0, factors=LADDER_FACTORS) -> list[Rung]:
    """``n`` rungs from synthetic sources; source i is labelled with the i-th pitch (cyclic)."""
    per_source = len(factors)
    sources = synthetic_faces(math.ceil(n / per_source), seed)
    rungs = []
    for i, src in enumerate(sources):
        pitch = DEFAULT_PITCHES_DEG[i % len(DEFAULT_PITCHES_DEG)]
        rungs.extend(build_ladder(src, factors, pitch))
    return rungs[:n]


def psnr_ordering(n: int = 100, rho_o: float = 0.5, master: bytes = bytes(SEED_BYTES),
                  face_seed: int = 0, threads: int = 1) -> list[dict]:
    """Pooled and per-image mean PSNR of every filter over ``n`` ladder faces."""
    thr = DensityThreshold.uniform(rho_o)
    rungs = ladder_faces(n, face_seed)
    rows = []
    for algo in ALGORITHMS:
        pairs, per_image = [], []
        t0 = time.perf_counter()
        for i, r in enumerate(rungs):
            face = FaceRegion.full(r.image.width, r.image.height)
            cfg = HoppingConfig(seed=derive_key(master, i))
            out, _ = apply_filter(algo, r.image, face, r.density, thr, cfg, threads=threads)
            pairs.append((r.image, out))
            per_image.append(psnr(r.image, out))
        finite = [p for p in per_image if math.isfinite(p)]
        rows.append({
            "filter": algo,
            "n_faces": len(rungs),
            "n_filtered": len(finite),
            "pooled_psnr_db": dataset_psnr(pairs),
            "mean_psnr_db": float(np.mean(finite)) if finite else math.inf,
            "seconds": time.perf_counter() - t0,
        })
    return rows


def attack_asymmetry(n: int = 50, rho_o: float = 0.5, nsr: float = 1e-4,
                     master: bytes = bytes(SEED_BYTES), face_seed: int = 1) -> dict:
    """Mean accurate-attack reconstruction MSE on AGB- and AHGMM-protected 96x96 faces."""
    thr = DensityThreshold.uniform(rho_o)
    faces = synthetic_faces(n, face_seed)
    face = FaceRegion.full(faces[0].width, faces[0].height)
    agb_err, ahgmm_err = [], []
    for i, img in enumerate(faces):
        density = build_ladder(img, (1,), DEFAULT_PITCHES_DEG[i % 4])[0].density
        if not gate(density, thr):
            continue
        sigma_o = optimal_spec(density, thr)
        cfg = HoppingConfig(seed=derive_key(master, i))
        protected = filter_agb(img, face, density, thr)
        agb_err.append(mse(img, attack_inverse(protected, face, AdversaryModel("optimal"),
                                               sigma_o, nsr)))
        protected, _ = filter_ahgmm(img, face, density, thr, cfg)
        adversary = AdversaryModel("accurate", seed=cfg.seed)
        ahgmm_err.append(mse(img, attack_inverse(protected, face, adversary, sigma_o, nsr, cfg)))
    return {"rho_o": rho_o, "n_faces": len(agb_err), "nsr": nsr,
            "agb_mse": float(np.mean(agb_err)), "ahgmm_mse": float(np.mean(ahgmm_err))}


def timing(n: int = 5, rho_o: float = 0.5, threads: int = 1) -> list[dict]:
    """Wall-clock per filter on frontal 96x96 faces (reported, never asserted)."""
    thr = DensityThreshold.uniform(rho_o)
    rungs = [build_ladder(src, (1,))[0] for src in synthetic_faces(n, 2)]
    rows = []
    for algo in ALGORITHMS:
        t0 = time.perf_counter()
        for i, r in enumerate(rungs):
            face = FaceRegion.full(r.image.width, r.image.height)
            cfg = replace(HoppingConfig(), seed=derive_key(bytes(SEED_BYTES), i))
            apply_filter(algo, r.image, face, r.density, thr, cfg, threads=threads)
        rows.append({"filter": algo, "n_faces": n,
                     "seconds_per_face": (time.perf_counter() - t0) / n})
    return rows
