import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from harpipe.camera import CameraIntrinsics
from harpipe.skeleton import NUM_KEYPOINTS, Skeleton3D


@pytest.fixture
def intrinsics():
    return CameraIntrinsics(fx=500.0, fy=500.0, u0=320.0, v0=240.0,
                            depth_scale=0.001, width=640, height=480)


def skeleton_at(x, y, z, frame_index=0, person_index=0, valid_slots=None):
    """Skeleton3D with every keypoint near (x, y, z); Torso exactly there."""
    points = np.full((NUM_KEYPOINTS, 3), np.nan)
    slots = range(NUM_KEYPOINTS) if valid_slots is None else valid_slots
    for i in slots:
        points[i] = (x + 0.01 * (i - 7), y, z)
    if valid_slots is None or 2 in valid_slots:
        points[2] = (x, y, z)
    return Skeleton3D(points=points, frame_index=frame_index, person_index=person_index)
