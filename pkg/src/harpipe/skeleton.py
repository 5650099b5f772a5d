"""Keypoint layouts: BODY-25 input, reduced 15-keypoint skeleton, 3D lifting, bboxes.

The reduced layout merges the five head keypoints into a single Head and adds a
Torso keypoint at the midpoint of the hips; torso links run Neck-Torso-hips.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .camera import CameraIntrinsics, DepthImage, backproject, sample_depth
from .errors import DegenerateSkeletonError

# BODY-25 keypoint indices (pose-estimator output order).
B25_NOSE, B25_NECK = 0, 1
B25_RSHOULDER, B25_RELBOW, B25_RWRIST = 2, 3, 4
B25_LSHOULDER, B25_LELBOW, B25_LWRIST = 5, 6, 7
B25_MIDHIP = 8
B25_RHIP, B25_RKNEE, B25_RANKLE = 9, 10, 11
B25_LHIP, B25_LKNEE, B25_LANKLE = 12, 13, 14
B25_REYE, B25_LEYE, B25_REAR, B25_LEAR = 15, 16, 17, 18

_HEAD_SOURCES = (B25_NOSE, B25_REYE, B25_LEYE, B25_REAR, B25_LEAR)

# Reduced-skeleton slots.
KEYPOINT_NAMES = (
    "Head", "Neck", "Torso",
    "RShoulder", "RElbow", "RWrist",
    "LShoulder", "LElbow", "LWrist",
    "RHip", "RKnee", "RAnkle",
    "LHip", "LKnee", "LAnkle",
)
NUM_KEYPOINTS = len(KEYPOINT_NAMES)
KP = {name: i for i, name in enumerate(KEYPOINT_NAMES)}

# Direct copies from BODY-25 into reduced slots (everything but Head and Torso).
_COPY_MAP = {
    KP["Neck"]: B25_NECK,
    KP["RShoulder"]: B25_RSHOULDER, KP["RElbow"]: B25_RELBOW, KP["RWrist"]: B25_RWRIST,
    KP["LShoulder"]: B25_LSHOULDER, KP["LElbow"]: B25_LELBOW, KP["LWrist"]: B25_LWRIST,
    KP["RHip"]: B25_RHIP, KP["RKnee"]: B25_RKNEE, KP["RAnkle"]: B25_RANKLE,
    KP["LHip"]: B25_LHIP, KP["LKnee"]: B25_LKNEE, KP["LAnkle"]: B25_LANKLE,
}

EDGES = (
    (KP["Head"], KP["Neck"]),
    (KP["Neck"], KP["RShoulder"]), (KP["Neck"], KP["LShoulder"]),
    (KP["RShoulder"], KP["RElbow"]), (KP["RElbow"], KP["RWrist"]),
    (KP["LShoulder"], KP["LElbow"]), (KP["LElbow"], KP["LWrist"]),
    (KP["Neck"], KP["Torso"]),
    (KP["Torso"], KP["RHip"]), (KP["Torso"], KP["LHip"]),
    (KP["RHip"], KP["RKnee"]), (KP["RKnee"], KP["RAnkle"]),
    (KP["LHip"], KP["LKnee"]), (KP["LKnee"], KP["LAnkle"]),
)


@dataclass(frozen=True)
class ReducedSkeleton2D:
    """15 (u, v) keypoints with confidences; conf 0 marks an invalid slot."""

    points: np.ndarray  # (15, 2) float64, NaN where invalid
    conf: np.ndarray    # (15,) float64 in [0, 1]

    def valid(self) -> np.ndarray:
        return self.conf > 0


@dataclass(frozen=True)
class Skeleton3D:
    """15 camera-frame keypoints; NaN rows mark invalid slots."""

    points: np.ndarray  # (15, 3) float64
    frame_index: int = -1
    person_index: int = -1

    def valid(self) -> np.ndarray:
        return ~np.isnan(self.points[:, 0])


@dataclass(frozen=True)
class BoundingBox:
    u_min: int
    v_min: int
    u_max: int
    v_max: int


def _check_raw(raw: np.ndarray) -> np.ndarray:
    raw = np.asarray(raw, dtype=np.float64)
    if raw.shape != (25, 3):
        raise ValueError(f"expected (25, 3) BODY-25 keypoints, got {raw.shape}")
    return raw


def simplify(raw: np.ndarray) -> ReducedSkeleton2D:
    """Reduce a (25, 3) BODY-25 array of (u, v, conf) rows to the 15-slot layout.

    Head is the confidence-weighted mean of the detected face keypoints (conf =
    their max); Torso is the plain midpoint of the hips (conf = their min).
    Feet and mid-hip extras are dropped.
    """
    raw = _check_raw(raw)
    points = np.full((NUM_KEYPOINTS, 2), np.nan)
    conf = np.zeros(NUM_KEYPOINTS)

    for dst, src in _COPY_MAP.items():
        if raw[src, 2] > 0:
            points[dst] = raw[src, :2]
            conf[dst] = raw[src, 2]

    head = raw[list(_HEAD_SOURCES)]
    head = head[head[:, 2] > 0]
    if head.size:
        w = head[:, 2]
        points[KP["Head"]] = (head[:, :2] * w[:, None]).sum(axis=0) / w.sum()
        conf[KP["Head"]] = w.max()

    rhip, lhip = raw[B25_RHIP], raw[B25_LHIP]
    if rhip[2] > 0 and lhip[2] > 0:
        points[KP["Torso"]] = (rhip[:2] + lhip[:2]) / 2.0
        conf[KP["Torso"]] = min(rhip[2], lhip[2])

    return ReducedSkeleton2D(points=points, conf=conf)


def lift_to_3d(
    sk: ReducedSkeleton2D,
    depth: DepthImage,
    intr: CameraIntrinsics,
    frame_index: int = -1,
    person_index: int = -1,
) -> Skeleton3D:
    """Back-project every valid keypoint that has resolvable depth.

    Keypoints without a depth reading (or projecting outside the depth image)
    come out invalid. 2D confidence is not carried over; tracking downstream is
    purely geometric.
    """
    points = np.full((NUM_KEYPOINTS, 3), np.nan)
    for i in range(NUM_KEYPOINTS):
        if sk.conf[i] <= 0:
            continue
        u, v = sk.points[i]
        col, row = int(round(u)), int(round(v))
        if not (0 <= col < depth.width and 0 <= row < depth.height):
            continue
        if not (0 <= u < intr.width and 0 <= v < intr.height):
            continue
        z = sample_depth(depth, u, v, intr)
        if z is None:
            continue
        points[i] = backproject(u, v, z, intr)
    return Skeleton3D(points=points, frame_index=frame_index, person_index=person_index)


def user_bbox(
    sk: ReducedSkeleton2D,
    image_w: int,
    image_h: int,
    pad_frac: float = 0.1,
) -> BoundingBox:
    """Axis-aligned box over the valid keypoints, padded and clamped to the image."""
    pts = sk.points[sk.valid()]
    if len(pts) < 2:
        raise DegenerateSkeletonError("need at least 2 valid keypoints for a bbox")
    u_min, v_min = pts.min(axis=0)
    u_max, v_max = pts.max(axis=0)
    if u_min == u_max or v_min == v_max:
        raise DegenerateSkeletonError("keypoints span a zero-area box")
    pad_u = pad_frac * (u_max - u_min)
    pad_v = pad_frac * (v_max - v_min)
    return BoundingBox(
        u_min=max(0, int(math.floor(u_min - pad_u))),
        v_min=max(0, int(math.floor(v_min - pad_v))),
        u_max=min(image_w - 1, int(math.ceil(u_max + pad_u))),
        v_max=min(image_h - 1, int(math.ceil(v_max + pad_v))),
    )


def crop_image(image: np.ndarray, box: BoundingBox) -> np.ndarray:
    """Inclusive-coordinate crop of an (H, W, 3) image."""
    return image[box.v_min:box.v_max + 1, box.u_min:box.u_max + 1]
