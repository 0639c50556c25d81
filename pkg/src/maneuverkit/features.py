"""Feature construction from per-frame face motion and vehicle context.

The inside stream starts from per-frame records of tracked facial-point
motion.  Each frame becomes a 9-vector: a 4-bin histogram of horizontal
motion (pixels), a 4-bin histogram of the motion angle in the image plane,
and the magnitude of the mean face-center displacement.  With head pose
available, (yaw, pitch, roll) are appended for a 12-vector.  Frame vectors
are summed over a 20-frame window (0.8 s at 25 fps) and L2-normalized.

The outside stream is assembled directly: two lane-existence flags, a
road-artifact proximity flag, and average/maximum/minimum speed over the
recent window, giving a 6-vector.

Bin edges are half-open on the left and closed on the right for the
horizontal histogram; the angular histogram uses right-open quadrants of
[0, 2*pi).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .numerics import l2_normalize

log = logging.getLogger(__name__)

MODE_HISTOGRAM = "histogram"     # 9-d
MODE_HEAD_POSE = "head_pose"     # 12-d

FRAME_FEATURE_DIM = {MODE_HISTOGRAM: 9, MODE_HEAD_POSE: 12}
AGGREGATION_WINDOW = 20          # frames per step, 0.8 s at 25 fps

HORIZONTAL_EDGES = (-2.0, 0.0, 2.0)


@dataclass
class FrameMotion:
    """Motion extracted from one video frame.

    ``matches``: (dx, dy) pixel displacements of tracked facial points
    between successive frames.  ``center_motion``: (dx, dy) displacement of
    the face center.  ``pose``: optional (yaw, pitch, roll) in radians.
    """

    matches: Sequence[tuple[float, float]]
    center_motion: tuple[float, float] = (0.0, 0.0)
    pose: tuple[float, float, float] | None = None


def frame_features(fm: FrameMotion, mode: str = MODE_HISTOGRAM) -> np.ndarray:
    """Per-frame feature vector phi, length 9 or 12 depending on mode."""
    if mode not in FRAME_FEATURE_DIM:
        raise ValueError(f"unknown mode {mode!r}")
    if mode == MODE_HEAD_POSE and fm.pose is None:
        raise ValueError("head-pose mode requested but the frame has no pose")
    if mode == MODE_HISTOGRAM and fm.pose is not None:
        raise ValueError("frame carries a pose but histogram mode was requested")

    horiz = np.zeros(4)
    angular = np.zeros(4)
    for dx, dy in fm.matches:
        if dx <= -2.0:
            horiz[0] += 1
        elif dx <= 0.0:
            horiz[1] += 1
        elif dx <= 2.0:
            horiz[2] += 1
        else:
            horiz[3] += 1
        angle = np.arctan2(dy, dx) % (2.0 * np.pi)
        angular[min(int(angle // (np.pi / 2.0)), 3)] += 1

    center = float(np.hypot(*fm.center_motion))
    phi = np.concatenate([horiz, angular, [center]])
    if mode == MODE_HEAD_POSE:
        phi = np.concatenate([phi, np.asarray(fm.pose, dtype=float)])
    return phi


def aggregate_inside(frames: Sequence[np.ndarray], window: int = AGGREGATION_WINDOW) -> np.ndarray:
    """Sum ``window`` per-frame vectors and L2-normalize the sum.

    A run of entirely empty frames yields the zero vector (with a warning)
    rather than a division by zero.
    """
    if len(frames) != window:
        raise ValueError(f"expected exactly {window} frames, got {len(frames)}")
    total = np.sum(np.asarray(frames, dtype=float), axis=0)
    if not np.any(total):
        log.warning("aggregation window summed to zero; emitting a zero feature")
        return total
    return l2_normalize(total)


def inside_sequence(
    frames: Sequence[FrameMotion],
    mode: str = MODE_HISTOGRAM,
    window: int = AGGREGATION_WINDOW,
) -> np.ndarray:
    """Convert a frame stream into aggregated step features, (T, 9 or 12).

    The frame count must be a whole number of windows.
    """
    if len(frames) == 0 or len(frames) % window != 0:
        raise ValueError(f"frame count {len(frames)} is not a positive multiple of {window}")
    phis = [frame_features(fm, mode) for fm in frames]
    steps = [
        aggregate_inside(phis[k : k + window], window)
        for k in range(0, len(phis), window)
    ]
    return np.asarray(steps)


def outside_features(
    lane_left: bool,
    lane_right: bool,
    artifact_near: bool,
    speeds: Sequence[float],
) -> np.ndarray:
    """6-vector [lane_left, lane_right, artifact, avg, max, min speed].

    ``speeds`` is the km/h history over the recent window (last 5 s).
    """
    speeds = np.asarray(speeds, dtype=float)
    if speeds.size == 0:
        raise ValueError("speed window must be nonempty")
    return np.array(
        [
            1.0 if lane_left else 0.0,
            1.0 if lane_right else 0.0,
            1.0 if artifact_near else 0.0,
            float(np.mean(speeds)),
            float(np.max(speeds)),
            float(np.min(speeds)),
        ]
    )
