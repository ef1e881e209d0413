"""Comparison filters: fixed (FGB), adaptive anisotropic (AGB) and space-variant
ring-wise (SVGB) Gaussian blur."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (DensityThreshold, FaceRegion, PixelDensity,
                       density_from_face_size, gate)
from .imageio import ImagePlane, crop, paste
from .kernel import (MAX_SUPPORT, KernelGrid, KernelSpec, convolve,
                     correlate_space_variant, discretize, optimal_spec)

# Frontal 96x96 crop: the highest-resolution face of the dataset ladder.
REFERENCE_DENSITY = density_from_face_size(96, 0.0)


def apply_to_face(img: ImagePlane, face: FaceRegion, plane_fn) -> ImagePlane:
    """Run ``plane_fn`` on each channel of the face crop and paste the result back."""
    region = crop(img, face)
    planes = np.stack([plane_fn(p) for p in region.data])
    return paste(region.replace(np.clip(planes, 0.0, img.r_max)), img, face)


def blur_face(img: ImagePlane, face: FaceRegion, grid: KernelGrid,
              threads: int = 1, method: str = "direct") -> ImagePlane:
    return apply_to_face(img, face, lambda p: convolve(p, grid, "mirror", method, threads))


def filter_agb(img: ImagePlane, face: FaceRegion, density: PixelDensity,
               thr: DensityThreshold, threads: int = 1, method: str = "direct",
               max_support: int = MAX_SUPPORT) -> ImagePlane:
    if not gate(density, thr):
        return img
    grid = discretize(optimal_spec(density, thr), max_support)
    return blur_face(img, face, grid, threads, method)


def filter_fgb(img: ImagePlane, face: FaceRegion, thr: DensityThreshold,
               ref_density: PixelDensity = REFERENCE_DENSITY, threads: int = 1,
               max_support: int = MAX_SUPPORT) -> ImagePlane:
    """One kernel sized for ``ref_density``, applied whatever the face's own density."""
    grid = discretize(optimal_spec(ref_density, thr), max_support)
    return blur_face(img, face, grid, threads)


@dataclass(frozen=True)
class SvgbConfig:
    n_rings: int = 4
    decay: float = 0.05

    def __post_init__(self):
        if self.n_rings < 1:
            raise ValueError("need at least one ring")
        if not 0 <= self.decay < 1:
            raise ValueError("decay must lie in [0, 1)")


def ring_sigmas(sigma0: float, cfg: SvgbConfig) -> list[float]:
    return [sigma0 * (1.0 - cfg.decay) ** k for k in range(cfg.n_rings)]


def ring_index_map(width: int, height: int, n_rings: int) -> np.ndarray:
    """Ring number of every pixel; equal-width annuli out to half the diagonal."""
    cy, cx = (height - 1) / 2.0, (width - 1) / 2.0
    yy, xx = np.mgrid[0:height, 0:width]
    r = np.hypot(yy - cy, xx - cx)
    r_outer = math.hypot(width, height) / 2.0
    return np.minimum((r / (r_outer / n_rings)).astype(np.int64), n_rings - 1)


def filter_svgb(img: ImagePlane, face: FaceRegion, density: PixelDensity,
                thr: DensityThreshold, cfg: SvgbConfig = SvgbConfig(),
                threads: int = 1, max_support: int = MAX_SUPPORT) -> ImagePlane:
    if not gate(density, thr):
        return img
    spec = optimal_spec(density, thr)
    sigma0 = max(spec.sigma_h, spec.sigma_v)
    grids = [discretize(KernelSpec.centered(s, s), max_support) for s in ring_sigmas(sigma0, cfg)]
    index = ring_index_map(face.width, face.height, cfg.n_rings)
    return apply_to_face(img, face,
                         lambda p: correlate_space_variant(p, grids, index, "mirror", threads))
