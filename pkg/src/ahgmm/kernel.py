"""Gaussian PSF sizing, discretisation and the convolution engine.

All spatial filtering in the package goes through :func:`correlate_space_variant`,
a direct per-pixel correlation with a fixed summation order (kernel taps in
raster order).  Space-invariant filters are the one-kernel special case, which
is what makes the adaptive blur and a hop-free mixture filter agree bit for bit.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numba import njit

from .errors import KernelTooLargeError
from .geometry import DensityThreshold, PixelDensity
from .imageio import ImagePlane

MAX_SUPPORT = 1025
_FLUSH = 1e-300

BORDERS = {"mirror": "reflect", "periodic": "wrap", "nearest": "edge", "zero": "constant"}


def optimal_sigma(rho: float, rho_o: float) -> float:
    """Smallest Gaussian std (px) that pushes density ``rho`` below ``rho_o``."""
    if rho <= 0 or rho_o <= 0:
        raise ValueError("densities must be positive")
    return 3.0 * rho / (math.pi * rho_o)


def to_frequency_sigma(sigma_spatial: float, rho: float) -> float:
    """Std of the Gaussian's Fourier transform, in cycles/cm."""
    if sigma_spatial <= 0 or rho <= 0:
        raise ValueError("sigma and density must be positive")
    return rho / (2.0 * math.pi * sigma_spatial)


def support(sigma: float) -> int:
    return 2 * math.ceil(3.0 * sigma) + 1


@dataclass(frozen=True)
class KernelSpec:
    mu_h: float
    mu_v: float
    sigma_h: float
    sigma_v: float

    def __post_init__(self):
        if not (self.sigma_h > 0 and self.sigma_v > 0):
            raise ValueError(f"sigmas must be positive, got ({self.sigma_h}, {self.sigma_v})")

    @classmethod
    def centered(cls, sigma_h: float, sigma_v: float) -> "KernelSpec":
        return cls(0.0, 0.0, sigma_h, sigma_v)

    def scaled(self, sh: float, sv: float) -> "KernelSpec":
        return KernelSpec(self.mu_h * sh, self.mu_v * sv, self.sigma_h * sh, self.sigma_v * sv)


def optimal_spec(density: PixelDensity, thr: DensityThreshold) -> KernelSpec:
    return KernelSpec.centered(optimal_sigma(density.rho_h, thr.rho_h_o),
                               optimal_sigma(density.rho_v, thr.rho_v_o))


@dataclass(frozen=True, eq=False)
class KernelGrid:
    """Normalised kernel sampled on integer offsets, ``weights[v, h]``.

    Both extents are odd and the centre sample is offset (0, 0).  ``factors``
    holds the 1-D (vertical, horizontal) kernels when the grid is their outer
    product, enabling the separable path.
    """

    weights: np.ndarray
    factors: Optional[tuple] = None

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] % 2 == 0 or w.shape[1] % 2 == 0:
            raise ValueError(f"kernel grid must be 2-D with odd extents, got {w.shape}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def support_v(self) -> int:
        return self.weights.shape[0]

    @property
    def support_h(self) -> int:
        return self.weights.shape[1]

    @classmethod
    def delta(cls) -> "KernelGrid":
        return cls(np.ones((1, 1)), (np.ones(1), np.ones(1)))

    def padded(self, support_v: int, support_h: int) -> np.ndarray:
        """Weights zero-padded (centred) to a larger odd extent."""
        dv = (support_v - self.support_v) // 2
        dh = (support_h - self.support_h) // 2
        if dv < 0 or dh < 0:
            raise ValueError("target support smaller than the kernel")
        return np.pad(self.weights, ((dv, dv), (dh, dh)))


def _gauss_1d(mu: float, sigma: float, half: int) -> np.ndarray:
    x = np.arange(-half, half + 1, dtype=np.float64)
    return np.exp(-((x - mu) ** 2) / (2.0 * sigma * sigma))


def gaussian_factors(spec: KernelSpec, max_support: int = MAX_SUPPORT):
    """Normalised 1-D (vertical, horizontal) kernels whose outer product is the grid."""
    psi_h, psi_v = support(spec.sigma_h), support(spec.sigma_v)
    if max(psi_h, psi_v) > max_support:
        raise KernelTooLargeError(
            f"kernel support {psi_v}x{psi_h} exceeds the limit of {max_support}")
    gh = _gauss_1d(spec.mu_h, spec.sigma_h, psi_h // 2)
    gv = _gauss_1d(spec.mu_v, spec.sigma_v, psi_v // 2)
    return gv, gh


def discretize(spec: KernelSpec, max_support: int = MAX_SUPPORT) -> KernelGrid:
    """Sample the Gaussian on offsets -(psi-1)/2 .. (psi-1)/2 per axis and normalise."""
    gv, gh = gaussian_factors(spec, max_support)
    w = np.outer(gv, gh)
    w[w < _FLUSH] = 0.0
    total = w.sum()
    if not total > 0:
        raise ValueError(f"kernel for {spec} has no mass on its support")
    gh[gh < _FLUSH] = 0.0
    gv[gv < _FLUSH] = 0.0
    return KernelGrid(w / total, (gv / gv.sum(), gh / gh.sum()))


def pad_plane(plane: np.ndarray, pad_v: int, pad_h: int, border: str = "mirror") -> np.ndarray:
    mode = BORDERS.get(border)
    if mode is None:
        raise ValueError(f"unknown border rule {border!r}")
    if mode == "reflect" and min(plane.shape) == 1:
        mode = "symmetric"  # a single row/column has nothing to reflect about
    return np.pad(plane, ((pad_v, pad_v), (pad_h, pad_h)), mode=mode)


def mirror_extend(plane: np.ndarray) -> np.ndarray:
    """One full period of the whole-sample symmetric extension."""
    h, w = plane.shape
    return np.pad(plane, ((0, max(h - 2, 0)), (0, max(w - 2, 0))), mode="reflect"
                  if min(h, w) > 1 else "symmetric")


@njit(nogil=True, cache=True)
def _sv_rows(padded, flat, offsets, shapes, index, out, half_v, half_h, r0, r1):
    width = out.shape[1]
    for y in range(r0, r1):
        for x in range(width):
            k = index[y, x]
            kh = shapes[k, 0]
            kw = shapes[k, 1]
            base = offsets[k]
            y0 = y + half_v - kh // 2
            x0 = x + half_h - kw // 2
            acc = 0.0
            for ky in range(kh):
                row = base + ky * kw
                for kx in range(kw):
                    acc += flat[row + kx] * padded[y0 + ky, x0 + kx]
            out[y, x] = acc


def correlate_space_variant(plane: np.ndarray, kernels: Sequence[KernelGrid],
                            index: np.ndarray, border: str = "mirror",
                            threads: int = 1) -> np.ndarray:
    """Correlate each pixel with ``kernels[index[y, x]]`` centred on it.

    Source pixels are always read from ``plane`` itself; only the plane
    border is extended by ``border``.  Output is independent of ``threads``.
    """
    plane = np.ascontiguousarray(plane, dtype=np.float64)
    index = np.ascontiguousarray(index, dtype=np.int64)
    if index.shape != plane.shape:
        raise ValueError("index map must match the plane shape")
    shapes = np.array([k.weights.shape for k in kernels], dtype=np.int64)
    sizes = shapes[:, 0] * shapes[:, 1]
    offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.int64)
    flat = np.concatenate([k.weights.ravel() for k in kernels])
    half_v = int(shapes[:, 0].max()) // 2
    half_h = int(shapes[:, 1].max()) // 2
    padded = np.ascontiguousarray(pad_plane(plane, half_v, half_h, border))
    out = np.empty_like(plane)
    height = plane.shape[0]
    threads = max(1, min(int(threads), height))
    if threads == 1:
        _sv_rows(padded, flat, offsets, shapes, index, out, half_v, half_h, 0, height)
        return out
    bounds = np.linspace(0, height, threads + 1).astype(int)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(_sv_rows, padded, flat, offsets, shapes, index, out,
                               half_v, half_h, int(a), int(b))
                   for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        for fut in futures:
            fut.result()
    return out


def _correlate_1d(padded: np.ndarray, taps: np.ndarray, axis: int, n_out: int) -> np.ndarray:
    out = np.zeros(padded.shape[:axis] + (n_out,) + padded.shape[axis + 1:])
    for t, w in enumerate(taps):
        sl = [slice(None)] * padded.ndim
        sl[axis] = slice(t, t + n_out)
        out += w * padded[tuple(sl)]
    return out


def correlate_separable(plane: np.ndarray, grid: KernelGrid, border: str = "mirror") -> np.ndarray:
    if grid.factors is None:
        raise ValueError("grid is not separable")
    gv, gh = grid.factors
    h, w = plane.shape
    padded = pad_plane(np.asarray(plane, dtype=np.float64), len(gv) // 2, len(gh) // 2, border)
    rows = _correlate_1d(padded, gh, axis=1, n_out=w)
    return _correlate_1d(rows, gv, axis=0, n_out=h)


def convolve(img, grid: KernelGrid, border: str = "mirror", method: str = "direct",
             threads: int = 1):
    """Space-invariant correlation of every channel with ``grid``.

    Accepts an :class:`ImagePlane` or a bare 2-D array and returns the same kind.
    """
    if isinstance(img, ImagePlane):
        planes = [convolve(p, grid, border, method, threads) for p in img.data]
        return img.replace(np.clip(np.stack(planes), 0.0, img.r_max))
    plane = np.asarray(img, dtype=np.float64)
    if method == "separable":
        return correlate_separable(plane, grid, border)
    if method != "direct":
        raise ValueError(f"unknown convolution method {method!r}")
    index = np.zeros(plane.shape, dtype=np.int64)
    return correlate_space_variant(plane, [grid], index, border, threads)


def dump_kernel(grid: KernelGrid, fh) -> None:
    """Write the weights as a whitespace-separated text matrix (rows = vertical offset)."""
    np.savetxt(fh, grid.weights, fmt="%.17g")
