"""Pixel density of a face from camera pose or from its size in pixels, and the
decision whether the face needs protecting at all."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import GeometryError

# Average face breadth / length in cm (bitragion breadth, menton-crinion length).
FACE_BREADTH_CM = 15.45
FACE_LENGTH_CM = 20.75


@dataclass(frozen=True)
class CameraModel:
    """Pinhole camera on an aerial platform. Lengths in cm, angles in radians."""

    f: float
    p_h: float
    p_v: float
    h1: float
    theta_p: float = 0.0

    def __post_init__(self):
        if min(self.f, self.p_h, self.p_v, self.h1) <= 0:
            raise GeometryError("f, p_h, p_v and h1 must be positive")
        if not 0 <= self.theta_p < math.pi / 2:
            raise GeometryError("theta_p must lie in [0, pi/2)")


@dataclass(frozen=True)
class FaceRegion:
    """Bounding box of a face inside the image.

    ``theta_r`` is the view angle; ``None`` means "same as the camera tilt".
    """

    x: int
    y: int
    width: int
    height: int
    theta_r: Optional[float] = None
    h2: float = 0.0

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise GeometryError("face region must have positive size")
        if self.theta_r is not None and not 0 <= self.theta_r < math.pi / 2:
            raise GeometryError("theta_r must lie in [0, pi/2)")

    @property
    def center(self) -> tuple[float, float]:
        return (self.x + (self.width - 1) / 2.0, self.y + (self.height - 1) / 2.0)

    @classmethod
    def full(cls, width: int, height: int, **kw) -> "FaceRegion":
        return cls(0, 0, width, height, **kw)


@dataclass(frozen=True)
class PixelDensity:
    """Horizontal and vertical pixels per cm at the face centre."""

    rho_h: float
    rho_v: float

    def __post_init__(self):
        if self.rho_h < 0 or self.rho_v < 0:
            raise GeometryError("pixel densities cannot be negative")


@dataclass(frozen=True)
class DensityThreshold:
    """Densities (px/cm) above which a recogniser starts to work."""

    rho_h_o: float
    rho_v_o: float

    def __post_init__(self):
        if self.rho_h_o <= 0 or self.rho_v_o <= 0:
            raise GeometryError("thresholds must be positive")

    @classmethod
    def uniform(cls, rho_o: float) -> "DensityThreshold":
        return cls(rho_o, rho_o)


def density_from_camera(cam: CameraModel, face: FaceRegion) -> PixelDensity:
    theta = cam.theta_p if face.theta_r is None else face.theta_r
    dh = cam.h1 - face.h2
    if dh <= 0:
        raise GeometryError(f"face at {face.h2} cm is not below the camera at {cam.h1} cm")
    c, s = math.cos(theta), math.sin(theta)
    return PixelDensity(cam.f * c / (cam.p_h * dh), cam.f * c * s / (cam.p_v * dh))


def density_from_face_size(s_c: float, gamma: float = 0.0,
                           s_h: float = FACE_BREADTH_CM,
                           s_v: float = FACE_LENGTH_CM) -> PixelDensity:
    """Densities of an aligned face crop of ``s_c`` pixels seen at pitch ``gamma``."""
    if s_c <= 0 or s_h <= 0 or s_v <= 0:
        raise GeometryError("face size and reference dimensions must be positive")
    if not 0 <= gamma < math.pi / 2:
        raise GeometryError("pitch must lie in [0, pi/2)")
    return PixelDensity(s_c / s_h, s_c * math.cos(gamma) / s_v)


def gate(density: PixelDensity, thr: DensityThreshold) -> bool:
    """True when the face is resolvable on both axes and must be filtered."""
    return density.rho_h > thr.rho_h_o and density.rho_v > thr.rho_v_o
