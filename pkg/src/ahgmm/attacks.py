"""Reconstruction and parrot attacks against protected faces.

An adversary knows either the optimal kernel only, the optimal kernel plus a
hopping plan drawn from a wrong key ("pseudo"), or the true plan ("accurate").
Reconstruction uses frequency-domain Wiener deconvolution on the mirror
extension of the face, which matches the mirror border used when filtering.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .baselines import apply_to_face, filter_agb
from .errors import ConfigError
from .filter import apply_plan, filter_ahgmm, global_spec
from .geometry import DensityThreshold, FaceRegion, PixelDensity, gate
from .hopping import SEED_BYTES, HoppingConfig, HoppingPlan, derive_plan, partition
from .imageio import ImagePlane, crop
from .kernel import (MAX_SUPPORT, KernelGrid, KernelSpec, discretize, gaussian_factors,
                     mirror_extend)

KINDS = ("optimal", "pseudo", "accurate")
NSR_FLOOR = 1e-6


@dataclass(frozen=True)
class AdversaryModel:
    """What the attacker knows.

    ``accurate`` needs the genuine ``plan`` or the true ``seed``; ``pseudo``
    uses ``seed`` as its (wrong) guess and draws a fresh one when absent.
    """

    kind: str
    seed: Optional[bytes] = None
    plan: Optional[HoppingPlan] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"adversary kind must be one of {KINDS}")
        if self.kind == "accurate" and self.seed is None and self.plan is None:
            raise ConfigError("accurate adversary needs the true seed or plan")

    def guess_seed(self) -> bytes:
        return self.seed if self.seed is not None else secrets.token_bytes(SEED_BYTES)


def kernel_spectrum(grid_weights: np.ndarray, shape) -> np.ndarray:
    """rfft2 of the kernel wrapped onto a periodic grid of ``shape``, centre at (0, 0)."""
    pv, ph = shape
    kv, kh = grid_weights.shape
    iv = (np.arange(kv) - kv // 2) % pv
    ih = (np.arange(kh) - kh // 2) % ph
    psf = np.zeros(shape)
    if kv <= pv and kh <= ph:
        psf[np.ix_(iv, ih)] = grid_weights
    else:
        np.add.at(psf, (iv[:, None], ih[None, :]), grid_weights)
    return np.fft.rfft2(psf)


def _wiener_gain(spec: np.ndarray, nsr: float) -> np.ndarray:
    # forward filtering is a correlation, i.e. multiplication by conj(spec)
    return spec / np.maximum(np.abs(spec) ** 2 + nsr, NSR_FLOOR)


def wiener_deconvolve(plane: np.ndarray, grid: KernelGrid, nsr: float) -> np.ndarray:
    if nsr < 0:
        raise ValueError("nsr must be non-negative")
    h, w = plane.shape
    ext = mirror_extend(np.asarray(plane, dtype=np.float64))
    spec = kernel_spectrum(grid.weights, ext.shape)
    rec = np.fft.irfft2(np.fft.rfft2(ext) * _wiener_gain(spec, nsr), s=ext.shape)
    return rec[:h, :w]


def _wrap_1d(taps: np.ndarray, period: int) -> np.ndarray:
    out = np.zeros(period)
    np.add.at(out, (np.arange(len(taps)) - len(taps) // 2) % period, taps)
    return out


def plan_spectra(plan: HoppingPlan, shape, max_support: int = MAX_SUPPORT):
    """Yield the full fft2 spectrum of every region's mixture on a periodic grid.

    Components are separable, so each spectrum is a sum of outer products of
    1-D transforms rather than a 2-D transform of the mixture grid.
    """
    pv, ph = shape
    for n in range(plan.n_regions):
        spec = np.zeros(shape, dtype=np.complex128)
        for m in range(plan.num_components):
            gv, gh = gaussian_factors(plan.component(n, m), max_support)
            fv = np.fft.fft(_wrap_1d(gv, pv)) / gv.sum()
            fh = np.fft.fft(_wrap_1d(gh, ph)) / gh.sum()
            spec += plan.phi[n, m] * np.outer(fv, fh)
        yield spec


def wiener_deconvolve_blocks(plane: np.ndarray, spectra, blocks, nsr: float) -> np.ndarray:
    """Deconvolve the plane once per block spectrum, keeping that block's pixels.

    Each block is restored as if the whole face had been blurred with its own
    kernel; the different kernels of neighbouring blocks are ignored.  Only the
    block's pixels are synthesised, via a partial inverse DFT.
    """
    if nsr < 0:
        raise ValueError("nsr must be non-negative")
    h, w = plane.shape
    ext = mirror_extend(np.asarray(plane, dtype=np.float64))
    pv, ph = ext.shape
    obs = np.fft.fft2(ext)
    inv_v = np.exp(2j * np.pi * np.outer(np.arange(h), np.arange(pv)) / pv)
    inv_h = np.exp(2j * np.pi * np.outer(np.arange(ph), np.arange(w)) / ph)
    out = np.empty((h, w))
    for spec, b in zip(spectra, blocks):
        gain = _wiener_gain(spec, nsr) * obs
        rows = inv_v[b.y:b.y + b.height]
        cols = inv_h[:, b.x:b.x + b.width]
        out[b.y:b.y + b.height, b.x:b.x + b.width] = (rows @ gain @ cols).real / (pv * ph)
    return out


def _resolve_plan(adversary: AdversaryModel, face: FaceRegion, sigma_o: KernelSpec,
                  cfg: HoppingConfig) -> HoppingPlan:
    if adversary.kind == "accurate" and adversary.plan is not None:
        return adversary.plan
    seed = adversary.seed if adversary.kind == "accurate" else adversary.guess_seed()
    return derive_plan(sigma_o, len(partition(face, cfg)), replace(cfg, seed=seed))


def attack_inverse(img_protected: ImagePlane, face: FaceRegion, adversary: AdversaryModel,
                   assumed_sigma_o: KernelSpec, nsr: float = 1e-4,
                   cfg: HoppingConfig = HoppingConfig(), global_smoothing: bool = True,
                   max_support: int = MAX_SUPPORT) -> ImagePlane:
    """Reconstruct the face from a protected image under ``adversary``'s knowledge.

    ``optimal`` deconvolves the whole face with ``assumed_sigma_o``.  ``pseudo``
    and ``accurate`` first undo the global smoothing, then deconvolve each
    block with its plan mixture.  ``cfg`` supplies block size, M and gamma.
    """
    if face.width < 1 or face.height < 1:
        raise ValueError("empty face region")
    if adversary.kind == "optimal":
        grid = discretize(assumed_sigma_o, max_support)
        return apply_to_face(img_protected, face, lambda p: wiener_deconvolve(p, grid, nsr))

    plan = _resolve_plan(adversary, face, assumed_sigma_o, cfg)
    blocks = partition(face, HoppingConfig(plan.q_h, plan.q_v))
    if len(blocks) != plan.n_regions:
        raise ValueError(f"plan has {plan.n_regions} regions, face needs {len(blocks)}")
    smooth = discretize(global_spec(plan.sigma_o, plan.q_h, plan.q_v), max_support)
    ext_shape = mirror_extend(np.zeros((face.height, face.width))).shape

    def restore(p):
        if global_smoothing:
            p = wiener_deconvolve(p, smooth, nsr)
        return wiener_deconvolve_blocks(p, plan_spectra(plan, ext_shape, max_support), blocks, nsr)

    return apply_to_face(img_protected, face, restore)


def attack_parrot_transform(img_gallery: ImagePlane, face: FaceRegion,
                            adversary: AdversaryModel, density: PixelDensity,
                            thr: DensityThreshold, cfg: HoppingConfig = HoppingConfig(),
                            threads: int = 1) -> ImagePlane:
    """Filter a gallery image the way the adversary believes probes were filtered."""
    if not gate(density, thr):
        return img_gallery
    if adversary.kind == "optimal":
        return filter_agb(img_gallery, face, density, thr, threads)
    if adversary.kind == "accurate" and adversary.plan is not None:
        return apply_plan(img_gallery, face, adversary.plan, threads=threads)
    seed = adversary.seed if adversary.kind == "accurate" else adversary.guess_seed()
    out, _ = filter_ahgmm(img_gallery, face, density, thr, replace(cfg, seed=seed), threads=threads)
    return out
