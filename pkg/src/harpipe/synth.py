"""Deterministic synthetic stream fixtures for tests, demos, and benchmarks.

Generates a recorded-stream directory (RGB PNGs, 16-bit PGM depth, skeleton
and identity JSONL, intrinsics, meta) with one user and an optional distant
distractor. The user's crop color steps through intensity bands over time so
the mean-pixel-bucket classifier produces a varying decision sequence.
"""

from __future__ import annotations

import json
import math
import random
from pathlib import Path

import numpy as np
from PIL import Image

from .runtime import write_pgm16
from .skeleton import (B25_LANKLE, B25_LEAR, B25_LELBOW, B25_LEYE, B25_LHIP,
                       B25_LKNEE, B25_LSHOULDER, B25_LWRIST, B25_MIDHIP,
                       B25_NECK, B25_NOSE, B25_RANKLE, B25_REAR, B25_RELBOW,
                       B25_REYE, B25_RHIP, B25_RKNEE, B25_RSHOULDER, B25_RWRIST)

# Keypoint offsets from the person's anchor pixel, unit scale.
_BODY_OFFSETS = {
    B25_NOSE: (0, -30), B25_NECK: (0, -20),
    B25_REYE: (-2, -32), B25_LEYE: (2, -32), B25_REAR: (-4, -31), B25_LEAR: (4, -31),
    B25_RSHOULDER: (-8, -20), B25_RELBOW: (-12, -8), B25_RWRIST: (-13, 2),
    B25_LSHOULDER: (8, -20), B25_LELBOW: (12, -8), B25_LWRIST: (13, 2),
    B25_MIDHIP: (0, 2), B25_RHIP: (-5, 2), B25_LHIP: (5, 2),
    B25_RKNEE: (-5, 16), B25_RANKLE: (-5, 30),
    B25_LKNEE: (5, 16), B25_LANKLE: (5, 30),
}


def person_keypoints(cx: float, cy: float, scale: float = 1.0,
                     conf: float = 0.9) -> np.ndarray:
    """(25, 3) BODY-25 array for a stick figure anchored at (cx, cy)."""
    kps = np.zeros((25, 3))
    for idx, (du, dv) in _BODY_OFFSETS.items():
        kps[idx] = (cx + du * scale, cy + dv * scale, conf)
    return kps


def _bounds(kps: np.ndarray, pad: int, width: int, height: int) -> tuple[int, int, int, int]:
    valid = kps[kps[:, 2] > 0]
    u0 = max(0, int(valid[:, 0].min()) - pad)
    v0 = max(0, int(valid[:, 1].min()) - pad)
    u1 = min(width, int(valid[:, 0].max()) + pad + 1)
    v1 = min(height, int(valid[:, 1].max()) + pad + 1)
    return u0, v0, u1, v1


def make_stream(
    out_dir,
    duration_s: float = 10.0,
    fps: float = 15.0,
    width: int = 160,
    height: int = 120,
    seed: int = 0,
    user_id: str = "user-1",
    with_distractor: bool = True,
    identity_interval_s: float = 5.0,
) -> int:
    """Write a synthetic stream; returns the number of frames."""
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    num_frames = int(round(duration_s * fps))

    intr = {
        "fx": float(height), "fy": float(height),
        "u0": width / 2.0, "v0": height / 2.0,
        "depth_scale": 0.001, "width": width, "height": height,
    }
    (root / "intrinsics.json").write_text(json.dumps(intr, indent=1))
    (root / "meta.json").write_text(json.dumps({"fps": fps, "duration_s": duration_s}))

    skel_lines = []
    ident_lines = []
    identity_every = max(1, int(round(identity_interval_s * fps)))
    for f in range(num_frames):
        t = f / fps
        cx = width / 2 + 18 * math.sin(2 * math.pi * t / 20) + rng.uniform(-0.3, 0.3)
        cy = height / 2 + 4 * math.sin(2 * math.pi * t / 13)
        user = person_keypoints(cx, cy, scale=1.0)
        people = [user]
        if with_distractor:
            dx = width * 0.82 + 6 * math.sin(2 * math.pi * t / 9)
            people.append(person_keypoints(dx, height / 2, scale=0.6))

        skel_lines.append(json.dumps({
            "frame": f,
            "people": [{"keypoints": np.round(p, 3).tolist()} for p in people],
        }))
        if f % identity_every == 0:
            ident_lines.append(json.dumps(
                {"frame": f, "person_index": 0, "person_id": user_id}))

        # depth: user plane at 2 m, distractor plane at 3.5 m
        depth = np.full((height, width), 2000, dtype=np.uint16)
        if with_distractor:
            u0, v0, u1, v1 = _bounds(people[1], pad=4, width=width, height=height)
            depth[v0:v1, u0:u1] = 3500
        write_pgm16(root / f"depth_{f:06d}.pgm", depth)

        # rgb: flat background, user region in a stepping intensity band
        band = int(t // 10) % 5
        color = 18 + 36 * band
        rgb = np.full((height, width, 3), 110, dtype=np.uint8)
        u0, v0, u1, v1 = _bounds(user, pad=3, width=width, height=height)
        rgb[v0:v1, u0:u1] = color
        if with_distractor:
            du0, dv0, du1, dv1 = _bounds(people[1], pad=2, width=width, height=height)
            rgb[dv0:dv1, du0:du1] = 200
        Image.fromarray(rgb).save(root / f"rgb_{f:06d}.png")

    (root / "skeletons.jsonl").write_text("\n".join(skel_lines) + "\n" if skel_lines else "")
    (root / "identities.jsonl").write_text("\n".join(ident_lines) + "\n" if ident_lines else "")
    return num_frames
