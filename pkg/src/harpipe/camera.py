"""Pinhole-model projection and back-projection between image and camera frames."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import BehindCameraError, BoundsError, ConfigError, InvalidDepthError
from .kernels import nonzero_patch_median


class Point3D(NamedTuple):
    """Point in the camera coordinate frame, meters. +z looks out of the camera."""

    x: float
    y: float
    z: float


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    u0: float
    v0: float
    depth_scale: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ConfigError("focal lengths must be positive")
        if not (0 <= self.u0 < self.width and 0 <= self.v0 < self.height):
            raise ConfigError("principal point must lie inside the image")
        if self.depth_scale <= 0:
            raise ConfigError("depth_scale must be positive")

    @classmethod
    def from_json(cls, path: str) -> "CameraIntrinsics":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        try:
            return cls(
                fx=float(raw["fx"]), fy=float(raw["fy"]),
                u0=float(raw["u0"]), v0=float(raw["v0"]),
                depth_scale=float(raw["depth_scale"]),
                width=int(raw["width"]), height=int(raw["height"]),
            )
        except KeyError as exc:
            raise ConfigError(f"intrinsics file missing field {exc}") from exc


@dataclass(frozen=True)
class DepthImage:
    """Row-major 16-bit depth image; value 0 means no depth reading."""

    width: int
    height: int
    data: np.ndarray  # (height, width) uint16

    def __post_init__(self):
        if self.data.shape != (self.height, self.width):
            raise ValueError("depth data shape does not match width/height")


def backproject(u: float, v: float, z: float, intr: CameraIntrinsics) -> Point3D:
    """Lift pixel (u, v) with depth z (meters) to a camera-frame 3D point."""
    if z <= 0:
        raise InvalidDepthError(f"depth must be positive, got {z}")
    if not (0 <= u < intr.width and 0 <= v < intr.height):
        raise BoundsError(f"pixel ({u}, {v}) outside {intr.width}x{intr.height} image")
    return Point3D(z * (u - intr.u0) / intr.fx, z * (v - intr.v0) / intr.fy, z)


def project(p: Point3D, intr: CameraIntrinsics) -> tuple[float, float]:
    """Project a camera-frame point to real-valued pixel coordinates.

    The result may fall outside the image bounds; callers decide whether that
    matters for them.
    """
    if p.z <= 0:
        raise BehindCameraError(f"cannot project point with z={p.z}")
    return intr.u0 + intr.fx * p.x / p.z, intr.v0 + intr.fy * p.y / p.z


def sample_depth(img: DepthImage, u: float, v: float, intr: CameraIntrinsics) -> Optional[float]:
    """Depth in meters at (u, v), or None when no reading is available.

    Sub-pixel coordinates snap to the nearest pixel. A zero pixel falls back to
    the median of nonzero values in its 5x5 neighborhood.
    """
    col = int(round(u))
    row = int(round(v))
    if not (0 <= col < img.width and 0 <= row < img.height):
        raise BoundsError(f"pixel ({u}, {v}) outside {img.width}x{img.height} depth image")
    raw = int(img.data[row, col])
    if raw == 0:
        raw_f = nonzero_patch_median(img.data, row, col, radius=2)
        if raw_f == 0.0:
            return None
        return raw_f * intr.depth_scale
    return raw * intr.depth_scale
