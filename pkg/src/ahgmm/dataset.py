"""Multi-resolution face ladder with density labels, its on-disk layout, and a
procedural face generator used where real face crops are not available."""

from __future__ import annotations

import hashlib
import json
import math
import os
from typing import NamedTuple, Sequence

import numpy as np

from .geometry import PixelDensity, density_from_face_size
from .imageio import ImagePlane, save_image
from .kernel import KernelSpec, convolve, discretize

MANIFEST_VERSION = 1
SOURCE_SIZE = 96
DEFAULT_FACTORS = (1, 2, 4, 8, 16)
DEFAULT_PITCHES_DEG = (0, 10, 20, 30, 40, 50, 60, 70)
# Rungs this small are treated as protected by their resolution alone.
INHERENTLY_PROTECTED_SIZE = 6
LENS_SIGMA = 1.0


class Rung(NamedTuple):
    image: ImagePlane
    density: PixelDensity
    pitch_deg: float
    factor: int

    @property
    def size(self) -> int:
        return self.image.width

    @property
    def inherently_protected(self) -> bool:
        return self.size <= INHERENTLY_PROTECTED_SIZE


def downsample(img: ImagePlane, factor: int) -> ImagePlane:
    """Gaussian pre-blur (sigma = factor / 2) then keep every ``factor``-th pixel."""
    if factor == 1:
        return img
    blurred = convolve(img, discretize(KernelSpec.centered(0.5 * factor, 0.5 * factor)))
    off = factor // 2
    return img.replace(blurred.data[:, off::factor, off::factor])


def build_ladder(src: ImagePlane, factors: Sequence[int] = DEFAULT_FACTORS,
                 pitch_deg: float = 0.0) -> list[Rung]:
    if src.width != SOURCE_SIZE or src.height != SOURCE_SIZE:
        raise ValueError(f"ladder source must be {SOURCE_SIZE}x{SOURCE_SIZE}, "
                         f"got {src.width}x{src.height}")
    rungs = []
    for factor in factors:
        if factor < 1 or SOURCE_SIZE % factor:
            raise ValueError(f"factor {factor} does not divide {SOURCE_SIZE}")
        density = density_from_face_size(SOURCE_SIZE / factor, math.radians(pitch_deg))
        rungs.append(Rung(downsample(src, factor), density, pitch_deg, factor))
    return rungs


def _sha256(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def layout_dataset(root, images: Sequence[tuple[str, ImagePlane]],
                   factors: Sequence[int] = DEFAULT_FACTORS,
                   pitches_deg: Sequence[float] = DEFAULT_PITCHES_DEG,
                   provenance: dict | None = None) -> str:
    """Write ``root/pitch_XX/SxS/<name>.png`` for every image, factor and pitch label.

    Pitch is a label only: every pitch directory holds the same pixels, with
    densities computed for that pitch.  Returns the manifest path.
    """
    os.makedirs(root, exist_ok=True)
    entries = []
    for name, img in images:
        for pitch in pitches_deg:
            for rung in build_ladder(img, factors, pitch):
                rel = os.path.join(f"pitch_{int(round(pitch)):02d}",
                                   f"{rung.size}x{rung.size}", f"{name}.png")
                path = os.path.join(root, rel)
                os.makedirs(os.path.dirname(path), exist_ok=True)
                save_image(rung.image, path)
                entries.append({
                    "path": rel.replace(os.sep, "/"),
                    "source": name,
                    "pitch_deg": pitch,
                    "factor": rung.factor,
                    "size": rung.size,
                    "rho_h": rung.density.rho_h,
                    "rho_v": rung.density.rho_v,
                    "inherently_protected": rung.inherently_protected,
                    "sha256": _sha256(path),
                })
    manifest = {
        "format": "ahgmm-dataset",
        "version": MANIFEST_VERSION,
        "factors": list(factors),
        "pitches_deg": list(pitches_deg),
        "antialias_sigma": "0.5 * factor",
        "provenance": provenance or {},
        "entries": entries,
    }
    mpath = os.path.join(root, "manifest.json")
    with open(mpath, "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
    return mpath


def load_manifest(path) -> dict:
    with open(path) as fh:
        manifest = json.load(fh)
    if manifest.get("format") != "ahgmm-dataset" or manifest.get("version") != MANIFEST_VERSION:
        raise ValueError(f"{path}: not a version-{MANIFEST_VERSION} dataset manifest")
    return manifest


def _ellipse(yy, xx, cy, cx, ry, rx, soft=1.0):
    d = np.sqrt(((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2)
    # soft edge about one pixel wide
    return np.clip((1.0 - d) * min(ry, rx) / soft + 0.5, 0.0, 1.0)


def synthetic_face(rng: np.random.Generator, size: int = SOURCE_SIZE) -> ImagePlane:
    """A grey-level cartoon face with randomised geometry, shading and texture."""
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    s = size / 96.0
    bg = rng.uniform(40, 200) + rng.uniform(-30, 30) * (xx / size - 0.5) + rng.uniform(-30, 30) * (yy / size - 0.5)
    img = bg.copy()

    cy, cx = size * rng.uniform(0.5, 0.56), size * rng.uniform(0.46, 0.54)
    ry, rx = s * rng.uniform(38, 46), s * rng.uniform(28, 35)
    skin = rng.uniform(90, 210)
    head = _ellipse(yy, xx, cy, cx, ry, rx)
    shade = skin * (1.0 - 0.25 * ((xx - cx) / rx) ** 2 - rng.uniform(0, 0.15) * (yy - cy) / ry)
    img = img * (1 - head) + shade * head

    hair_tone = rng.uniform(10, 120)
    hair = _ellipse(yy, xx, cy - ry * 0.55, cx, ry * 0.55, rx * 1.05) * (yy < cy - ry * rng.uniform(0.35, 0.5))
    img = img * (1 - hair) + hair_tone * hair

    eye_y = cy - ry * rng.uniform(0.12, 0.25)
    eye_dx = rx * rng.uniform(0.35, 0.5)
    eye_r = s * rng.uniform(3.5, 5.5)
    brow_lift = s * rng.uniform(5, 9)
    for side in (-1, 1):
        ex = cx + side * eye_dx
        white = _ellipse(yy, xx, eye_y, ex, eye_r * 0.7, eye_r * 1.4)
        img = img * (1 - white) + 230 * white
        iris = _ellipse(yy, xx, eye_y, ex + rng.uniform(-1, 1) * s, eye_r * 0.65, eye_r * 0.65)
        img = img * (1 - iris) + rng.uniform(10, 80) * iris
        brow = _ellipse(yy, xx, eye_y - brow_lift, ex, s * 1.6, eye_r * 1.8)
        img = img * (1 - brow) + hair_tone * brow

    nose_len = ry * rng.uniform(0.25, 0.4)
    nose = _ellipse(yy, xx, eye_y + nose_len, cx, s * 3, s * rng.uniform(4, 7))
    img -= 35 * nose * (yy > eye_y + nose_len)
    mouth_y = cy + ry * rng.uniform(0.35, 0.5)
    mouth = _ellipse(yy, xx, mouth_y, cx, s * rng.uniform(1.5, 3), rx * rng.uniform(0.3, 0.5))
    img = img * (1 - mouth) + rng.uniform(40, 120) * mouth

    noise = rng.normal(0, 1, (size, size))
    texture = convolve(noise, discretize(KernelSpec.centered(1.5, 1.5)), method="separable")
    img += rng.uniform(2, 8) * texture / (texture.std() + 1e-12)
    # lens PSF: real camera crops are never sharper than about a pixel
    img = convolve(np.clip(img, 0, 255), discretize(KernelSpec.centered(LENS_SIGMA, LENS_SIGMA)),
                   method="separable")
    return ImagePlane(np.clip(np.rint(img), 0, 255))


def synthetic_faces(n: int, seed: int = 0, size: int = SOURCE_SIZE) -> list[ImagePlane]:
    rng = np.random.default_rng(seed)
    return [synthetic_face(rng, size) for _ in range(n)]
