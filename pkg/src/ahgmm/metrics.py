"""Distortion metrics, spectral band energy, blockiness, and verification-accuracy
bookkeeping for results produced by an external face recogniser."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .imageio import ImagePlane
from .kernel import mirror_extend

Cutoff = Union[float, Sequence[float]]

RANDOM_CLASSIFIER_ACCURACY = 0.5


def _pair(a: ImagePlane, b: ImagePlane):
    if a.data.shape != b.data.shape:
        raise ValueError(f"image shapes differ: {a.data.shape} vs {b.data.shape}")
    return a.data, b.data


def sse(a: ImagePlane, b: ImagePlane) -> float:
    x, y = _pair(a, b)
    return float(np.sum((x - y) ** 2))


def mse(a: ImagePlane, b: ImagePlane) -> float:
    """Mean squared difference over all pixels and channels."""
    x, _ = _pair(a, b)
    return sse(a, b) / x.size


def psnr_from_mse(err: float, r_max: float = 255.0) -> float:
    if err == 0:
        return math.inf
    return 20.0 * math.log10(r_max / math.sqrt(err))


def psnr(a: ImagePlane, b: ImagePlane) -> float:
    return psnr_from_mse(mse(a, b), a.r_max)


def dataset_mse(pairs: Iterable[tuple[ImagePlane, ImagePlane]]) -> float:
    """Pooled MSE: all squared errors summed, divided by the total sample count."""
    total, count = 0.0, 0
    for a, b in pairs:
        total += sse(a, b)
        count += a.data.size
    if count == 0:
        raise ValueError("empty dataset")
    return total / count


def dataset_psnr(pairs: Iterable[tuple[ImagePlane, ImagePlane]], r_max: float = 255.0) -> float:
    return psnr_from_mse(dataset_mse(pairs), r_max)


def format_db(value: float) -> Union[float, str]:
    """JSON-friendly PSNR: infinite values become the string "inf"."""
    return "inf" if math.isinf(value) else value


def _high_band_mask(shape, cutoff: Cutoff) -> np.ndarray:
    h, w = shape
    fy = np.fft.fftfreq(h)[:, None]
    fx = np.fft.fftfreq(w)[None, :]
    if np.ndim(cutoff) == 0:
        ch = cv = float(cutoff)
    else:
        ch, cv = (float(c) for c in cutoff)
    if not (0 < ch <= 0.5 and 0 < cv <= 0.5):
        raise ValueError("cutoff must lie in (0, 0.5] cycles/px")
    mask = (fx / ch) ** 2 + (fy / cv) ** 2 > 1.0
    mask[0, 0] = False
    return mask


def _power(img, mirror: bool = False) -> np.ndarray:
    data = img.data if isinstance(img, ImagePlane) else np.asarray(img, dtype=np.float64)[None]
    if mirror:
        data = [mirror_extend(p) for p in data]
    return sum(np.abs(np.fft.fft2(p)) ** 2 for p in data)


def band_power(img, cutoff: Cutoff, mirror: bool = False) -> float:
    """Spectral power above ``cutoff`` (cycles/px).

    A scalar cutoff is radial; a ``(horizontal, vertical)`` pair defines an
    elliptical pass band.  ``mirror`` takes the spectrum of the symmetric
    extension instead, which removes the spurious broadband energy the
    periodic wrap-around edge otherwise contributes.
    """
    p = _power(img, mirror)
    return float(p[_high_band_mask(p.shape, cutoff)].sum())


def band_energy(img, cutoff: Cutoff, mirror: bool = False) -> float:
    """Fraction of the AC power lying above ``cutoff``; 0 for a constant image."""
    p = _power(img, mirror)
    mask = _high_band_mask(p.shape, cutoff)
    ac = p.copy()
    ac[0, 0] = 0.0
    total = ac.sum()
    if total <= 1e-12 * max(p[0, 0], 1.0):
        return 0.0
    return float(p[mask].sum() / total)


def blockiness(img, block_h: int, block_v: int) -> float:
    """Mean |gradient| across block boundaries minus mean |gradient| inside blocks."""
    data = img.data if isinstance(img, ImagePlane) else np.asarray(img, dtype=np.float64)[None]
    across, inside = [], []
    for p in data:
        dx = np.abs(np.diff(p, axis=1))
        dy = np.abs(np.diff(p, axis=0))
        bx = (np.arange(dx.shape[1]) + 1) % block_h == 0
        by = (np.arange(dy.shape[0]) + 1) % block_v == 0
        across += [dx[:, bx].ravel(), dy[by, :].ravel()]
        inside += [dx[:, ~bx].ravel(), dy[~by, :].ravel()]
    return float(np.concatenate(across).mean() - np.concatenate(inside).mean())


@dataclass(frozen=True)
class VerificationTally:
    tp: int
    tn: int
    total: int

    def __post_init__(self):
        if min(self.tp, self.tn, self.total) < 0:
            raise ValueError("counts cannot be negative")
        if self.tp + self.tn > self.total:
            raise ValueError("tp + tn exceeds the number of pairs")


def accuracy_from_tally(t: VerificationTally) -> float:
    if t.total == 0:
        raise ValueError("tally has no pairs")
    return (t.tp + t.tn) / t.total


_TRUE = {"1", "true", "yes", "y", "t"}
_FALSE = {"0", "false", "no", "n", "f"}


def _flag(value: str) -> bool:
    v = value.strip().lower()
    if v in _TRUE:
        return True
    if v in _FALSE:
        return False
    raise ValueError(f"not a boolean: {value!r}")


def read_tally(path) -> VerificationTally:
    """Tally a recogniser's CSV with columns pair_id, same_subject, predicted_same."""
    tp = tn = total = 0
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"pair_id", "same_subject", "predicted_same"} - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"tally CSV lacks columns: {sorted(missing)}")
        for row in reader:
            same, pred = _flag(row["same_subject"]), _flag(row["predicted_same"])
            total += 1
            tp += same and pred
            tn += (not same) and (not pred)
    return VerificationTally(tp, tn, total)
