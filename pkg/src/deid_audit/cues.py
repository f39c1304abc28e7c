"""Per-frame human-factors cues from facial landmarks and head pose.

Eye aspect ratio, pupil circularity and lip aspect ratio are plain distance
ratios over 68-point landmark sets (1-based DLIB convention); head pose
angles are passed through from the pose annotations.  All three ratios are
invariant under translation, rotation and uniform scaling of the landmarks.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, fields

import numpy as np

from .errors import (
    DegenerateEye,
    DegenerateLandmarkWarning,
    DegenerateMouth,
    DegeneratePerimeter,
)

# 1-based landmark indices of the 68-point set.
LEFT_EYE_POINTS = (37, 38, 39, 40, 41, 42)
RIGHT_EYE_POINTS = (43, 44, 45, 46, 47, 48)
# Outer-lip subset: corners, mid top/bottom, and their nearest diagonals.
LIP_POINTS = (49, 51, 52, 53, 55, 57, 58, 59)

# Glasses types that keep eye landmarks usable for EAR / circularity.
EYE_SAFE_GLASSES = ("none", "clear", "photochromic")


@dataclass(frozen=True)
class CueMetrics:
    """One variant's cue values for a frame; None marks a gap."""

    ear: float | None = None
    pupil_circularity: float | None = None
    lar: float | None = None
    roll: float | None = None
    pitch: float | None = None
    yaw: float | None = None

    def as_dict(self) -> dict[str, float | None]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class CueErrors:
    """Absolute original-vs-deidentified cue differences for a frame."""

    ear_err: float | None = None
    pc_err: float | None = None
    lar_err: float | None = None
    roll_err: float | None = None
    pitch_err: float | None = None
    yaw_err: float | None = None
    mae_rpy: float | None = None

    def as_dict(self) -> dict[str, float | None]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def base_errors(self) -> dict[str, float | None]:
        """The six direct errors, excluding the derived mae_rpy."""
        d = self.as_dict()
        d.pop("mae_rpy")
        return d


def _dist(a, b) -> float:
    return math.hypot(float(a[0]) - float(b[0]), float(a[1]) - float(b[1]))


def eye_aspect_ratio(eye: np.ndarray) -> float:
    """(|P2-P6| + |P3-P5|) / (2 |P1-P4|) over six eye points.

    ``eye`` is a (6, 2) array ordered P1..P6: outer corner, two upper-lid
    points, inner corner, two lower-lid points.
    """
    p1, p2, p3, p4, p5, p6 = eye
    width = _dist(p1, p4)
    if width == 0.0:
        raise DegenerateEye("eye corner points coincide (|P1-P4| = 0)")
    return (_dist(p2, p6) + _dist(p3, p5)) / (2.0 * width)


def pupil_circularity(eye: np.ndarray) -> float:
    """4*pi*Area / Perimeter^2 with Area from the P2-P5 diameter.

    Perimeter is the closed hexagon P1->P2->...->P6->P1.  The value is not
    clamped to 1; regular landmark hexagons exceed it by construction.
    """
    pts = [tuple(map(float, p)) for p in eye]
    perimeter = sum(_dist(pts[i], pts[(i + 1) % 6]) for i in range(6))
    if perimeter == 0.0:
        raise DegeneratePerimeter("eye points coincide (perimeter = 0)")
    radius = _dist(pts[1], pts[4]) / 2.0
    area = math.pi * radius * radius
    return 4.0 * math.pi * area / (perimeter * perimeter)


def lip_aspect_ratio(lips: np.ndarray) -> float:
    """|L3-L7| / |L1-L5| over eight outer-lip points ordered L1..L8."""
    l1, l5 = lips[0], lips[4]
    l3, l7 = lips[2], lips[6]
    width = _dist(l1, l5)
    if width == 0.0:
        raise DegenerateMouth("mouth corner points coincide (|L1-L5| = 0)")
    return _dist(l3, l7) / width


def _take(landmarks: np.ndarray, points_1based) -> np.ndarray:
    idx = [p - 1 for p in points_1based]
    return np.asarray(landmarks, dtype=np.float64)[idx]


def _mean_eye_cue(landmarks: np.ndarray, fn, label: str) -> float | None:
    values = []
    for eye_points in (LEFT_EYE_POINTS, RIGHT_EYE_POINTS):
        try:
            values.append(fn(_take(landmarks, eye_points)))
        except (DegenerateEye, DegeneratePerimeter) as exc:
            warnings.warn(f"{label} left absent: {exc}", DegenerateLandmarkWarning, stacklevel=3)
            return None
    return (values[0] + values[1]) / 2.0


def compute_cues(
    landmarks: np.ndarray | None,
    pose: tuple[float, float, float] | None,
    glasses: str = "none",
) -> CueMetrics:
    """Assemble a frame's cue metrics from its annotations.

    EAR and pupil circularity average the two eyes and are withheld for dark
    glasses; missing annotations leave the corresponding fields absent.
    """
    ear = pc = lar = None
    if landmarks is not None:
        landmarks = np.asarray(landmarks, dtype=np.float64)
        if glasses in EYE_SAFE_GLASSES:
            ear = _mean_eye_cue(landmarks, eye_aspect_ratio, "EAR")
            pc = _mean_eye_cue(landmarks, pupil_circularity, "pupil circularity")
        try:
            lar = lip_aspect_ratio(_take(landmarks, LIP_POINTS))
        except DegenerateMouth as exc:
            warnings.warn(f"LAR left absent: {exc}", DegenerateLandmarkWarning, stacklevel=2)
    roll = pitch = yaw = None
    if pose is not None:
        roll, pitch, yaw = (float(v) for v in pose)
    return CueMetrics(ear=ear, pupil_circularity=pc, lar=lar, roll=roll, pitch=pitch, yaw=yaw)


def frame_cues(entry, variant: str, glasses: str = "none") -> CueMetrics:
    """Cues for one variant ("original" or "deid") of a frame entry."""
    if variant not in ("original", "deid"):
        raise ValueError(f"unknown variant {variant!r}")
    landmarks = entry.original_landmarks if variant == "original" else entry.deid_landmarks
    pose = entry.original_pose if variant == "original" else entry.deid_pose
    return compute_cues(landmarks, pose, glasses)


def _abs_err(a: float | None, b: float | None) -> float | None:
    if a is None or b is None:
        return None
    return abs(a - b)


def cue_errors(orig: CueMetrics, deid: CueMetrics) -> CueErrors:
    """Absolute per-cue differences; errors stay absent where either side is."""
    roll_err = _abs_err(orig.roll, deid.roll)
    pitch_err = _abs_err(orig.pitch, deid.pitch)
    yaw_err = _abs_err(orig.yaw, deid.yaw)
    mae_rpy = None
    if roll_err is not None and pitch_err is not None and yaw_err is not None:
        mae_rpy = (roll_err + pitch_err + yaw_err) / 3.0
    return CueErrors(
        ear_err=_abs_err(orig.ear, deid.ear),
        pc_err=_abs_err(orig.pupil_circularity, deid.pupil_circularity),
        lar_err=_abs_err(orig.lar, deid.lar),
        roll_err=roll_err,
        pitch_err=pitch_err,
        yaw_err=yaw_err,
        mae_rpy=mae_rpy,
    )
