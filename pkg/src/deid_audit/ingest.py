"""Session manifest, landmark/pose CSV, and PNG loading.

A manifest is a JSON file listing sessions; each session names per-frame
image pairs and optional landmark/pose CSVs.  Annotations are consumed from
files, never computed here, and frames missing from an annotation file stay
as explicit gaps.  Every malformed input raises a named error from
``deid_audit.errors``.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import (
    DecodeError,
    DuplicateSession,
    MalformedAnnotation,
    MalformedManifest,
    NonFiniteCoordinate,
    NonMonotonicFrames,
    PlausibilityWarning,
    ShapeMismatch,
    UnsupportedFormat,
    WrongPointCount,
)

GENDERS = ("M", "F")
GLASSES_TYPES = ("none", "clear", "photochromic", "dark")
LANDMARK_COUNT = 68
POSE_RANGE = (-180.0, 180.0)


@dataclass
class FrameEntry:
    """One paired frame: image paths plus annotations resolved from CSVs."""

    frame_index: int
    original_image: str
    deid_image: str
    original_landmarks: np.ndarray | None = field(default=None, compare=False)
    deid_landmarks: np.ndarray | None = field(default=None, compare=False)
    original_pose: tuple[float, float, float] | None = field(default=None, compare=False)
    deid_pose: tuple[float, float, float] | None = field(default=None, compare=False)


@dataclass
class SessionManifest:
    """One recording session: gender pair, glasses type, and its frames."""

    session_id: str
    target_gender: str
    imposter_gender: str
    glasses: str
    frames: list[FrameEntry]
    original_landmarks: str | None = None
    deid_landmarks: str | None = None
    original_pose: str | None = None
    deid_pose: str | None = None
    base_dir: Path = field(default_factory=Path, compare=False, repr=False)

    @property
    def gender_pair(self) -> str:
        """Target-imposter label, e.g. FM = female target, male imposter."""
        return self.target_gender + self.imposter_gender

    def resolve(self, rel: str) -> Path:
        p = Path(rel)
        return p if p.is_absolute() else self.base_dir / p


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise MalformedManifest(f"{where}: missing required key {key!r}")
    return obj[key]


def _parse_frame(obj, where: str) -> FrameEntry:
    if not isinstance(obj, dict):
        raise MalformedManifest(f"{where}: frame entry must be an object")
    idx = _require(obj, "frame_index", where)
    if not isinstance(idx, int) or isinstance(idx, bool) or idx < 0:
        raise MalformedManifest(f"{where}: frame_index must be a non-negative integer")
    original = _require(obj, "original_image", where)
    deid = _require(obj, "deid_image", where)
    if not isinstance(original, str) or not isinstance(deid, str) or not original or not deid:
        raise MalformedManifest(f"{where}: image paths must be non-empty strings")
    return FrameEntry(frame_index=idx, original_image=original, deid_image=deid)


def _parse_session(obj, base_dir: Path) -> SessionManifest:
    if not isinstance(obj, dict):
        raise MalformedManifest("session must be an object")
    sid = _require(obj, "session_id", "session")
    if not isinstance(sid, str) or not sid:
        raise MalformedManifest("session_id must be a non-empty string")
    where = f"session {sid!r}"
    target = _require(obj, "target_gender", where)
    imposter = _require(obj, "imposter_gender", where)
    if target not in GENDERS or imposter not in GENDERS:
        raise MalformedManifest(f"{where}: genders must be one of {GENDERS}")
    glasses = _require(obj, "glasses", where)
    if glasses not in GLASSES_TYPES:
        raise MalformedManifest(f"{where}: glasses must be one of {GLASSES_TYPES}")
    raw_frames = _require(obj, "frames", where)
    if not isinstance(raw_frames, list):
        raise MalformedManifest(f"{where}: frames must be an array")
    frames = [_parse_frame(f, where) for f in raw_frames]
    for prev, cur in zip(frames, frames[1:]):
        if cur.frame_index <= prev.frame_index:
            raise NonMonotonicFrames(
                f"{where}: frame_index {cur.frame_index} follows {prev.frame_index}"
            )

    def _opt_path(key: str) -> str | None:
        val = obj.get(key)
        if val is None:
            return None
        if not isinstance(val, str) or not val:
            raise MalformedManifest(f"{where}: {key} must be a non-empty string path")
        return val

    return SessionManifest(
        session_id=sid,
        target_gender=target,
        imposter_gender=imposter,
        glasses=glasses,
        frames=frames,
        original_landmarks=_opt_path("original_landmarks"),
        deid_landmarks=_opt_path("deid_landmarks"),
        original_pose=_opt_path("original_pose"),
        deid_pose=_opt_path("deid_pose"),
        base_dir=base_dir,
    )


def load_manifest(path: str | Path) -> list[SessionManifest]:
    """Parse a manifest file into session records.

    File paths inside the manifest are kept verbatim and resolved lazily
    against the manifest's directory.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise MalformedManifest(f"cannot read manifest {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise MalformedManifest(f"manifest {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict) or "sessions" not in raw:
        raise MalformedManifest(f"manifest {path} must be an object with a 'sessions' array")
    if not isinstance(raw["sessions"], list):
        raise MalformedManifest(f"manifest {path}: 'sessions' must be an array")
    sessions = [_parse_session(s, path.parent) for s in raw["sessions"]]
    seen: set[str] = set()
    for s in sessions:
        if s.session_id in seen:
            raise DuplicateSession(f"duplicate session_id {s.session_id!r}")
        seen.add(s.session_id)
    return sessions


def manifest_to_dict(sessions: list[SessionManifest]) -> dict:
    """Inverse of load_manifest, suitable for json.dump."""
    out = []
    for s in sessions:
        obj: dict = {
            "session_id": s.session_id,
            "target_gender": s.target_gender,
            "imposter_gender": s.imposter_gender,
            "glasses": s.glasses,
            "frames": [
                {
                    "frame_index": f.frame_index,
                    "original_image": f.original_image,
                    "deid_image": f.deid_image,
                }
                for f in s.frames
            ],
        }
        for key in ("original_landmarks", "deid_landmarks", "original_pose", "deid_pose"):
            val = getattr(s, key)
            if val is not None:
                obj[key] = val
        out.append(obj)
    return {"sessions": out}


def save_manifest(sessions: list[SessionManifest], path: str | Path) -> None:
    Path(path).write_text(json.dumps(manifest_to_dict(sessions), indent=2) + "\n", encoding="utf-8")


def load_image(path: str | Path) -> np.ndarray:
    """Decode an 8-bit PNG to a (H, W) grayscale or (H, W, 3) RGB array.

    Alpha channels are stripped; palette images are expanded to RGB.
    """
    path = Path(path)
    try:
        with Image.open(path) as img:
            img.load()
            mode = img.mode
            if mode in ("I", "I;16", "I;16B", "I;16L", "F"):
                raise UnsupportedFormat(f"{path}: sample depth of mode {mode!r} is not 8-bit")
            if mode == "L":
                arr = np.asarray(img, dtype=np.uint8)
            elif mode == "LA":
                arr = np.asarray(img.convert("L"), dtype=np.uint8)
            elif mode in ("RGB", "RGBA", "P", "CMYK", "YCbCr"):
                arr = np.asarray(img.convert("RGB"), dtype=np.uint8)
            elif mode == "1":
                arr = np.asarray(img.convert("L"), dtype=np.uint8)
            else:
                raise UnsupportedFormat(f"{path}: unsupported image mode {mode!r}")
    except UnidentifiedImageError as exc:
        raise DecodeError(f"{path}: not a decodable image") from exc
    except OSError as exc:
        raise DecodeError(f"{path}: {exc}") from exc
    return arr


def load_image_pair(original: str | Path, deid: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Load a frame pair, enforcing identical dimensions and channel count."""
    x = load_image(original)
    y = load_image(deid)
    if x.shape != y.shape:
        raise ShapeMismatch(f"{original} is {x.shape} but {deid} is {y.shape}")
    return x, y


def _parse_float(text: str, what: str, line: int, path: Path) -> float:
    try:
        val = float(text)
    except ValueError as exc:
        raise NonFiniteCoordinate(f"{path}:{line}: {what} {text!r} is not a number") from exc
    if not math.isfinite(val):
        raise NonFiniteCoordinate(f"{path}:{line}: {what} {text!r} is not finite")
    return val


def load_landmarks(path: str | Path, frame_count: int | None = None) -> dict[int, np.ndarray]:
    """Load a landmark CSV into {frame_index: (68, 2) array}.

    Frames absent from the file are simply absent from the map (gaps);
    frames that are present must carry exactly 68 points numbered 1..68.
    When ``frame_count`` is given, rows beyond it are dropped.
    """
    path = Path(path)
    rows: dict[int, dict[int, tuple[float, float]]] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        expected = ["frame_index", "point", "x", "y"]
        if reader.fieldnames is None or [c.strip() for c in reader.fieldnames] != expected:
            raise MalformedAnnotation(f"{path}: header must be {','.join(expected)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                frame = int(row["frame_index"])
                point = int(row["point"])
            except (TypeError, ValueError) as exc:
                raise MalformedAnnotation(f"{path}:{lineno}: bad frame_index/point") from exc
            if not 1 <= point <= LANDMARK_COUNT:
                raise WrongPointCount(f"{path}:{lineno}: point {point} outside 1..{LANDMARK_COUNT}")
            x = _parse_float(row["x"], "x", lineno, path)
            y = _parse_float(row["y"], "y", lineno, path)
            pts = rows.setdefault(frame, {})
            if point in pts:
                raise WrongPointCount(f"{path}: frame {frame} lists point {point} twice")
            pts[point] = (x, y)
    out: dict[int, np.ndarray] = {}
    for frame, pts in sorted(rows.items()):
        if frame_count is not None and frame >= frame_count:
            continue
        if len(pts) != LANDMARK_COUNT:
            raise WrongPointCount(
                f"{path}: frame {frame} has {len(pts)} points, expected {LANDMARK_COUNT}"
            )
        out[frame] = np.array([pts[p] for p in range(1, LANDMARK_COUNT + 1)], dtype=np.float64)
    return out


def load_pose(path: str | Path) -> dict[int, tuple[float, float, float]]:
    """Load a pose CSV into {frame_index: (roll, pitch, yaw)} in degrees.

    Angles outside [-180, 180] get a plausibility warning but are kept.
    """
    path = Path(path)
    out: dict[int, tuple[float, float, float]] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        expected = ["frame_index", "roll", "pitch", "yaw"]
        if reader.fieldnames is None or [c.strip() for c in reader.fieldnames] != expected:
            raise MalformedAnnotation(f"{path}: header must be {','.join(expected)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                frame = int(row["frame_index"])
            except (TypeError, ValueError) as exc:
                raise MalformedAnnotation(f"{path}:{lineno}: bad frame_index") from exc
            angles = tuple(_parse_float(row[k], k, lineno, path) for k in ("roll", "pitch", "yaw"))
            for name, val in zip(("roll", "pitch", "yaw"), angles):
                if not POSE_RANGE[0] <= val <= POSE_RANGE[1]:
                    warnings.warn(
                        f"{path}:{lineno}: {name} {val:g} outside {POSE_RANGE}",
                        PlausibilityWarning,
                        stacklevel=2,
                    )
            out[frame] = angles
    return out


def resolve_annotations(session: SessionManifest) -> SessionManifest:
    """Attach landmark/pose data from the session's CSVs onto its frames.

    Frames without a row in a CSV keep None for that annotation (a gap).
    Mutates and returns the session.
    """
    orig_lm = load_landmarks(session.resolve(session.original_landmarks)) if session.original_landmarks else {}
    deid_lm = load_landmarks(session.resolve(session.deid_landmarks)) if session.deid_landmarks else {}
    orig_pose = load_pose(session.resolve(session.original_pose)) if session.original_pose else {}
    deid_pose = load_pose(session.resolve(session.deid_pose)) if session.deid_pose else {}
    for frame in session.frames:
        frame.original_landmarks = orig_lm.get(frame.frame_index)
        frame.deid_landmarks = deid_lm.get(frame.frame_index)
        frame.original_pose = orig_pose.get(frame.frame_index)
        frame.deid_pose = deid_pose.get(frame.frame_index)
    return session
