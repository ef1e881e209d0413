"""Planar float image container plus PNG / PGM / PPM input and output."""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import BoundsError, ImageFormatError, ImageIOError

# Convex combinations of in-range pixels can land a few ulp outside the range.
_RANGE_SLACK = 1e-9

_WRITERS = {".png": "PNG", ".pgm": "PPM", ".ppm": "PPM", ".pnm": "PPM", ".jpg": "JPEG", ".jpeg": "JPEG"}
_READABLE = {"PNG", "PPM", "JPEG"}


@dataclass(frozen=True, eq=False)
class ImagePlane:
    """Channel-first image, ``data[c, y, x]`` in double precision.

    The array is copied and frozen on construction, so instances can be
    shared freely.
    """

    data: np.ndarray
    r_max: float = 255.0

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[None]
        if arr.ndim != 3 or arr.shape[1] == 0 or arr.shape[2] == 0:
            raise ValueError(f"expected (C, H, W) data, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("image contains non-finite values")
        lo, hi = arr.min(), arr.max()
        if lo < -_RANGE_SLACK or hi > self.r_max + _RANGE_SLACK:
            raise ValueError(f"intensities [{lo}, {hi}] outside [0, {self.r_max}]")
        np.clip(arr, 0.0, self.r_max, out=arr)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_hwc(cls, arr, r_max: float = 255.0) -> "ImagePlane":
        """Build from a (H, W) or (H, W, C) array as returned by most readers."""
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim == 3:
            arr = np.moveaxis(arr, -1, 0)
        return cls(arr, r_max)

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    def to_hwc(self) -> np.ndarray:
        if self.channels == 1:
            return self.data[0].copy()
        return np.moveaxis(self.data, 0, -1).copy()

    def replace(self, data) -> "ImagePlane":
        return ImagePlane(data, self.r_max)


def load_image(path) -> ImagePlane:
    """Read an 8-bit PNG, PGM/PPM or JPEG file. Values map to 0..255 unscaled."""
    path = os.fspath(path)
    try:
        with Image.open(path) as im:
            if im.format not in _READABLE:
                raise ImageFormatError(f"{path}: unsupported format {im.format}")
            if im.mode in ("I;16", "I;16B", "I;16L", "I", "F"):
                raise ImageFormatError(f"{path}: only 8-bit images are supported (mode {im.mode})")
            if im.mode == "1":
                im = im.convert("L")
            elif im.mode not in ("L", "RGB"):
                im = im.convert("RGB")
            arr = np.asarray(im, dtype=np.uint8)
    except FileNotFoundError as exc:
        raise ImageIOError(f"{path}: no such file") from exc
    except UnidentifiedImageError as exc:
        raise ImageFormatError(f"{path}: unrecognised image format") from exc
    except OSError as exc:
        if isinstance(exc, (ImageFormatError, ImageIOError)):
            raise
        raise ImageIOError(f"{path}: {exc}") from exc
    return ImagePlane.from_hwc(arr)


def quantize(img: ImagePlane) -> np.ndarray:
    """Round half-to-even to uint8, (H, W) or (H, W, C)."""
    return np.rint(img.to_hwc()).clip(0, 255).astype(np.uint8)


def save_image(img: ImagePlane, path) -> None:
    path = os.fspath(path)
    ext = os.path.splitext(path)[1].lower()
    fmt = _WRITERS.get(ext)
    if fmt is None:
        raise ImageFormatError(f"{path}: cannot infer output format from extension")
    if img.r_max > 255:
        raise ImageFormatError("only 8-bit output is supported")
    if img.channels not in (1, 3):
        raise ImageFormatError(f"cannot encode {img.channels}-channel image")
    if ext == ".pgm" and img.channels != 1:
        raise ImageFormatError("PGM output needs a single-channel image")
    if ext == ".ppm" and img.channels != 3:
        raise ImageFormatError("PPM output needs a three-channel image")
    pixels = quantize(img)
    try:
        Image.fromarray(pixels, mode="L" if img.channels == 1 else "RGB").save(path, format=fmt)
    except OSError as exc:
        raise ImageIOError(f"{path}: {exc}") from exc


def _check_bounds(img: ImagePlane, region) -> None:
    if region.width <= 0 or region.height <= 0:
        raise BoundsError("region must have positive size")
    if (region.x < 0 or region.y < 0
            or region.x + region.width > img.width
            or region.y + region.height > img.height):
        raise BoundsError(
            f"region ({region.x}, {region.y}, {region.width}x{region.height}) "
            f"outside {img.width}x{img.height} image")


def crop(img: ImagePlane, region) -> ImagePlane:
    """Cut out ``region`` (anything with x, y, width, height)."""
    _check_bounds(img, region)
    ys = slice(region.y, region.y + region.height)
    xs = slice(region.x, region.x + region.width)
    return img.replace(img.data[:, ys, xs])


def paste(patch: ImagePlane, img: ImagePlane, region) -> ImagePlane:
    """Return a copy of ``img`` with ``patch`` written over ``region``."""
    _check_bounds(img, region)
    if patch.data.shape != (img.channels, region.height, region.width):
        raise BoundsError(f"patch shape {patch.data.shape} does not fit region")
    out = img.data.copy()
    out[:, region.y:region.y + region.height, region.x:region.x + region.width] = patch.data
    return img.replace(out)
