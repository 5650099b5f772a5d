"""Independent brute-force reference implementations used to cross-check the
production code paths. These deliberately re-derive behavior from first
principles (literal pseudocode fold for tracking, full offline
materialization for windowing) and must not import the modules they check
beyond shared data types.
"""

from __future__ import annotations

import math

import numpy as np


# ---------------------------------------------------------------------------
# Tracking: literal fold of the published pseudocode, with the documented
# choices (counter reset on match, minDistance starts at infinity, identity
# events override geometry, SEARCHING as the explicit initial status).

SEARCHING, KNOWN, UNKNOWN, LOST = "SEARCHING", "KNOWN", "UNKNOWN", "LOST"
TORSO_SLOT = 2


def _euclid(p, q):
    return math.sqrt(sum((a - b) ** 2 for a, b in zip(p, q)))


def oracle_distance(a_pts, b_pts):
    """a_pts/b_pts: list of 15 entries, each (x, y, z) or None."""
    if a_pts[TORSO_SLOT] is not None and b_pts[TORSO_SLOT] is not None:
        return _euclid(a_pts[TORSO_SLOT], b_pts[TORSO_SLOT])
    shared = [i for i in range(len(a_pts)) if a_pts[i] is not None and b_pts[i] is not None]
    if not shared:
        return None
    ca = [sum(a_pts[i][k] for i in shared) / len(shared) for k in range(3)]
    cb = [sum(b_pts[i][k] for i in shared) / len(shared) for k in range(3)]
    return _euclid(ca, cb)


def oracle_track(frames, user_id, diameter=1.0, tolerance=5):
    """frames: list of (skeleton_point_lists, events) where events are
    (person_index, person_id) pairs. Returns per-frame
    (status, user_points-or-None, times_untracked)."""
    status, user_skel, times_untracked = SEARCHING, None, 0
    out = []
    for skeletons, events in frames:
        hit = None
        for idx, pid in sorted(events):
            if pid == user_id and 0 <= idx < len(skeletons):
                hit = idx
                break
        if hit is not None:
            status, user_skel, times_untracked = KNOWN, skeletons[hit], 0
        elif status in (KNOWN, UNKNOWN):
            min_distance = math.inf
            matched = None
            for sk in skeletons:
                cur = oracle_distance(sk, user_skel)
                if cur is not None and cur < min_distance:
                    min_distance = cur
                    matched = sk
            if min_distance <= diameter:
                status, user_skel, times_untracked = KNOWN, matched, 0
            elif times_untracked > tolerance:
                status, user_skel, times_untracked = LOST, None, 0
            else:
                status, times_untracked = UNKNOWN, times_untracked + 1
        out.append((status, user_skel, times_untracked))
    return out


def skeleton_to_lists(sk) -> list:
    """Convert a Skeleton3D to the oracle's plain-list representation."""
    pts = []
    for row in sk.points:
        pts.append(None if np.isnan(row[0]) else tuple(float(v) for v in row))
    return pts


# ---------------------------------------------------------------------------
# Windowing: offline materialization of every window and period.

def oracle_schedule(frames, n, m, theta, classify):
    """frames: list of per-sample payloads (None = unusable sample).

    Returns a dict period_index -> (decision_index_or_None, mean_probs_or_None,
    num_contributions) covering every period the streaming scheduler should
    emit: all periods whose last window exists, plus trailing periods with at
    least one contribution.
    """
    total = len(frames)
    num_windows = (total - n) // m + 1 if total >= n else 0
    results = {}
    for w in range(num_windows):
        chunk = frames[w * m:w * m + n]
        results[w] = None if any(f is None for f in chunk) else classify(chunk)

    num_periods = (total + m - 1) // m
    out = {}
    for j in range(num_periods):
        p_lo, p_hi = j * m, (j + 1) * m
        contribs = []
        for w in range(num_windows):
            w_lo, w_hi = w * m, w * m + n
            if w_lo < p_hi and p_lo < w_hi and results[w] is not None:
                contribs.append(np.asarray(results[w], dtype=np.float64))
        if j < num_windows:
            pass  # finalized by its own window, possibly with zero contributions
        elif not contribs:
            continue  # never emitted
        if contribs:
            mean = np.stack(contribs).mean(axis=0)
            best = int(mean.argmax())
            decision = best if mean[best] >= theta else None
            out[j] = (decision, mean, len(contribs))
        else:
            out[j] = (None, None, 0)
    return out
