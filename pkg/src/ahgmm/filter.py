"""The adaptive hopping Gaussian mixture filter.

Steps: gate on pixel density, size the optimal kernel, split the face into
Q_h x Q_v blocks, hop a mixture kernel per block, filter every block from the
original face pixels, smooth the whole face with sigma_o / Q, paste back.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .baselines import apply_to_face
from .geometry import DensityThreshold, FaceRegion, PixelDensity, gate
from .hopping import (HoppingConfig, HoppingPlan, build_mixtures, derive_plan,
                      partition, region_index_map)
from .imageio import ImagePlane, crop
from .kernel import (MAX_SUPPORT, KernelSpec, convolve, correlate_space_variant,
                     discretize, optimal_spec)
from .metrics import format_db, psnr

REPORT_VERSION = 1


@dataclass
class FilterReport:
    gated: bool
    sigma_o: Optional[tuple] = None
    n_regions: Optional[int] = None
    global_sigma: Optional[tuple] = None
    psnr_vs_original: Optional[float] = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {"version": REPORT_VERSION, "gated": self.gated}
        if self.gated:
            d.update(sigma_o=list(self.sigma_o), n_regions=self.n_regions,
                     global_sigma=list(self.global_sigma) if self.global_sigma else None,
                     psnr_vs_original=format_db(self.psnr_vs_original))
        d.update(self.extra)
        return d


def global_spec(sigma_o: KernelSpec, q_h: int, q_v: int) -> KernelSpec:
    return KernelSpec.centered(sigma_o.sigma_h / q_h, sigma_o.sigma_v / q_v)


def plan_for_face(face: FaceRegion, density: PixelDensity, thr: DensityThreshold,
                  cfg: HoppingConfig, zero_hops: bool = False) -> HoppingPlan:
    sigma_o = optimal_spec(density, thr)
    return derive_plan(sigma_o, len(partition(face, cfg)), cfg, zero_hops=zero_hops)


def local_filter_plane(plane: np.ndarray, plan: HoppingPlan, threads: int = 1,
                       max_support: int = MAX_SUPPORT, mixtures=None) -> np.ndarray:
    """Filter each block of a face plane with its own mixture, reading original pixels."""
    h, w = plane.shape
    index = region_index_map(w, h, HoppingConfig(plan.q_h, plan.q_v))
    if index.max() + 1 != plan.n_regions:
        raise ValueError(f"plan has {plan.n_regions} regions, face needs {index.max() + 1}")
    if mixtures is None:
        mixtures = build_mixtures(plan, max_support)
    return correlate_space_variant(plane, mixtures, index, "mirror", threads)


def filter_region_local_only(img: ImagePlane, face: FaceRegion, plan: HoppingPlan,
                             threads: int = 1, max_support: int = MAX_SUPPORT) -> ImagePlane:
    mixtures = build_mixtures(plan, max_support)
    return apply_to_face(img, face, lambda p: local_filter_plane(p, plan, threads, mixtures=mixtures))


def apply_plan(img: ImagePlane, face: FaceRegion, plan: HoppingPlan,
               global_smoothing: bool = True, threads: int = 1,
               max_support: int = MAX_SUPPORT) -> ImagePlane:
    out = filter_region_local_only(img, face, plan, threads, max_support)
    if global_smoothing:
        grid = discretize(global_spec(plan.sigma_o, plan.q_h, plan.q_v), max_support)
        out = apply_to_face(out, face, lambda p: convolve(p, grid, "mirror", "direct", threads))
    return out


def filter_ahgmm(img: ImagePlane, face: FaceRegion, density: PixelDensity,
                 thr: DensityThreshold, cfg: HoppingConfig, *,
                 global_smoothing: bool = True, zero_hops: bool = False,
                 threads: int = 1, max_support: int = MAX_SUPPORT):
    """Protect ``face`` inside ``img``. Returns ``(protected image, FilterReport)``.

    Faces whose density does not exceed the threshold on both axes are
    returned untouched.
    """
    crop(img, face)  # bounds check before anything else
    if not gate(density, thr):
        return img, FilterReport(gated=False)
    plan = plan_for_face(face, density, thr, cfg, zero_hops)
    out = apply_plan(img, face, plan, global_smoothing, threads, max_support)
    g = global_spec(plan.sigma_o, cfg.q_h, cfg.q_v) if global_smoothing else None
    report = FilterReport(
        gated=True,
        sigma_o=(plan.sigma_o.sigma_h, plan.sigma_o.sigma_v),
        n_regions=plan.n_regions,
        global_sigma=(g.sigma_h, g.sigma_v) if g else None,
        psnr_vs_original=psnr(crop(img, face), crop(out, face)),
    )
    return out, report
