"""User identity tracking in 3D across frames.

The tracker holds the last adopted user skeleton and, frame by frame, either
re-binds it via a face-identification event or matches the geometrically
nearest detected skeleton. Unmatched frames are tolerated up to a threshold
before the track is declared lost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .skeleton import KP, Skeleton3D

TORSO = KP["Torso"]


class TrackStatus(str, Enum):
    SEARCHING = "SEARCHING"
    KNOWN = "KNOWN"
    UNKNOWN = "UNKNOWN"
    LOST = "LOST"


@dataclass(frozen=True)
class IdentityEvent:
    """Face-recognition hit binding a person_id to one skeleton of a frame."""

    frame_index: int
    person_index: int
    person_id: str


@dataclass(frozen=True)
class TrackerConfig:
    user_id: str
    diameter: float = 1.0       # max match distance, meters
    tolerance: int = 5          # unmatched-frame counter threshold (strict >)


@dataclass(frozen=True)
class TrackState:
    status: TrackStatus = TrackStatus.SEARCHING
    user_skeleton: Optional[Skeleton3D] = None
    times_untracked: int = 0
    user_id: Optional[str] = None
    matched_person: Optional[int] = None  # person index adopted this frame, if any


def skeleton_distance(a: Skeleton3D, b: Skeleton3D) -> Optional[float]:
    """Euclidean distance between two skeletons, or None if incomparable.

    Uses the Torso keypoints when both are valid; otherwise the centroids of
    the keypoints valid in both skeletons.
    """
    va, vb = a.valid(), b.valid()
    if va[TORSO] and vb[TORSO]:
        return float(np.linalg.norm(a.points[TORSO] - b.points[TORSO]))
    shared = va & vb
    if not shared.any():
        return None
    ca = a.points[shared].mean(axis=0)
    cb = b.points[shared].mean(axis=0)
    return float(np.linalg.norm(ca - cb))


def track_step(
    state: TrackState,
    cfg: TrackerConfig,
    skeletons: Sequence[Skeleton3D],
    events: Sequence[IdentityEvent] = (),
) -> TrackState:
    """One frame of the tracking state machine.

    Identity events override geometry. A geometric match within cfg.diameter
    re-anchors the track and resets the unmatched counter; otherwise the
    counter grows until it exceeds cfg.tolerance and the track is lost.
    """
    hits = sorted(
        (e.person_index for e in events
         if e.person_id == cfg.user_id and 0 <= e.person_index < len(skeletons))
    )
    if hits:
        idx = hits[0]
        return TrackState(
            status=TrackStatus.KNOWN,
            user_skeleton=skeletons[idx],
            times_untracked=0,
            user_id=cfg.user_id,
            matched_person=idx,
        )

    if state.status not in (TrackStatus.KNOWN, TrackStatus.UNKNOWN):
        return replace(state, matched_person=None)

    min_distance = math.inf
    matched = None
    for idx, sk in enumerate(skeletons):
        d = skeleton_distance(sk, state.user_skeleton)
        if d is not None and d < min_distance:
            min_distance = d
            matched = idx

    if min_distance <= cfg.diameter:
        return TrackState(
            status=TrackStatus.KNOWN,
            user_skeleton=skeletons[matched],
            times_untracked=0,
            user_id=state.user_id,
            matched_person=matched,
        )
    if state.times_untracked > cfg.tolerance:
        return TrackState(
            status=TrackStatus.LOST,
            user_skeleton=None,
            times_untracked=0,
            user_id=state.user_id,
            matched_person=None,
        )
    return TrackState(
        status=TrackStatus.UNKNOWN,
        user_skeleton=state.user_skeleton,
        times_untracked=state.times_untracked + 1,
        user_id=state.user_id,
        matched_person=None,
    )


def tick_track(
    cfg: TrackerConfig,
    frames: Iterable[tuple[int, Sequence[Skeleton3D], Sequence[IdentityEvent]]],
    initial: Optional[TrackState] = None,
) -> Iterator[tuple[int, TrackState]]:
    """Fold track_step over an ordered frame stream, yielding the state per frame."""
    state = initial if initial is not None else TrackState()
    for frame_index, skeletons, events in frames:
        state = track_step(state, cfg, skeletons, events)
        yield frame_index, state
