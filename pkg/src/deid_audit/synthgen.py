"""Deterministic synthetic sessions for tests and demos.

Landmarks are placed analytically so the target eye/lip aspect ratios are
hit exactly, which makes generated sessions usable as oracles: a blink frame
is an eye whose lid separation was solved from the requested ratio, not a
rendered face.  Images are textured patterns with seeded Gaussian noise on
the de-identified variant; spike frames add a brightness offset that shows
up as an abrupt peak in the ERGAS series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import BadSynthSpec, IoError
from .ingest import SessionManifest, FrameEntry, save_manifest

BASE_EAR = 0.30
BLINK_EAR = 0.05
BASE_LAR = 0.20
YAWN_LAR = 0.60

EYE_HALF_WIDTH = 12.0
LIP_HALF_WIDTH = 16.0


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of one synthetic session."""

    seed: int = 0
    frame_count: int = 10
    blink_frames: frozenset[int] = frozenset()
    yawn_frames: frozenset[int] = frozenset()
    spike_frames: dict[int, float] = field(default_factory=dict)
    noise_sigma: float = 2.0
    # 0 makes the de-identified annotations exact duplicates of the originals.
    deid_landmark_offset: float = 1.0
    deid_pose_offset: float = 1.0
    session_id: str = "synth"
    target_gender: str = "F"
    imposter_gender: str = "M"
    glasses: str = "none"
    width: int = 96
    height: int = 72
    grayscale: bool = False

    def validate(self) -> None:
        if self.frame_count < 1:
            raise BadSynthSpec("frame_count must be >= 1")
        for name, indices in (
            ("blink_frames", self.blink_frames),
            ("yawn_frames", self.yawn_frames),
            ("spike_frames", self.spike_frames.keys()),
        ):
            for idx in indices:
                if not 0 <= idx < self.frame_count:
                    raise BadSynthSpec(f"{name} index {idx} outside 0..{self.frame_count - 1}")
        if self.noise_sigma < 0:
            raise BadSynthSpec("noise_sigma must be >= 0")
        if self.width < 16 or self.height < 16:
            raise BadSynthSpec("images must be at least 16x16")


def spec_from_dict(raw: dict) -> SynthSpec:
    """Build a SynthSpec from parsed JSON ({"frame_count": ..., ...})."""
    if not isinstance(raw, dict):
        raise BadSynthSpec("synth spec must be a JSON object")
    coerce = {
        "seed": int, "frame_count": int, "width": int, "height": int,
        "noise_sigma": float, "deid_landmark_offset": float, "deid_pose_offset": float,
        "session_id": str, "target_gender": str, "imposter_gender": str, "glasses": str,
        "grayscale": bool,
    }
    kwargs: dict = {}
    try:
        for key, typ in coerce.items():
            if key in raw:
                kwargs[key] = typ(raw[key])
        for key in ("blink_frames", "yawn_frames"):
            if key in raw:
                kwargs[key] = frozenset(int(i) for i in raw[key])
        if "spike_frames" in raw:
            kwargs["spike_frames"] = {int(k): float(v) for k, v in raw["spike_frames"].items()}
        spec = SynthSpec(**kwargs)
    except (TypeError, ValueError) as exc:
        raise BadSynthSpec(f"bad synth spec: {exc}") from exc
    spec.validate()
    return spec


def _eye_points(center: tuple[float, float], ear: float) -> list[tuple[float, float]]:
    """Six eye points P1..P6 whose aspect ratio is exactly ``ear``."""
    cx, cy = center
    h = ear * EYE_HALF_WIDTH  # (2h + 2h) / (2 * 2*EYE_HALF_WIDTH) == ear
    return [
        (cx - EYE_HALF_WIDTH, cy),
        (cx - 5.0, cy - h),
        (cx + 5.0, cy - h),
        (cx + EYE_HALF_WIDTH, cy),
        (cx + 5.0, cy + h),
        (cx - 5.0, cy + h),
    ]


def _lip_points(center: tuple[float, float], lar: float) -> list[tuple[float, float]]:
    """Eight outer-lip points L1..L8 whose aspect ratio is exactly ``lar``."""
    cx, cy = center
    v = lar * LIP_HALF_WIDTH  # 2v / (2 * LIP_HALF_WIDTH) == lar
    return [
        (cx - LIP_HALF_WIDTH, cy),
        (cx - 8.0, cy - 0.8 * v),
        (cx, cy - v),
        (cx + 8.0, cy - 0.8 * v),
        (cx + LIP_HALF_WIDTH, cy),
        (cx + 8.0, cy + 0.8 * v),
        (cx, cy + v),
        (cx - 8.0, cy + 0.8 * v),
    ]


def _face_landmarks(spec: SynthSpec, frame: int, ear: float, lar: float) -> np.ndarray:
    """Schematic 68-point face; only eye and lip geometry matter downstream."""
    cx = spec.width / 2.0 + 2.0 * math.sin(2.0 * math.pi * frame / max(spec.frame_count, 2))
    cy = spec.height / 2.0 + 1.0 * math.cos(2.0 * math.pi * frame / max(spec.frame_count, 2))
    pts = np.zeros((68, 2), dtype=np.float64)
    # jaw 1-17: lower half-ellipse
    for i in range(17):
        theta = math.pi * (i / 16.0)
        pts[i] = (cx - 28.0 * math.cos(theta), cy + 4.0 + 24.0 * math.sin(theta))
    # brows 18-27: two arcs above the eyes
    for i in range(5):
        pts[17 + i] = (cx - 24.0 + 4.0 * i, cy - 18.0 - (2.0 - abs(i - 2)))
        pts[22 + i] = (cx + 8.0 + 4.0 * i, cy - 18.0 - (2.0 - abs(i - 2)))
    # nose 28-36: bridge and base
    for i in range(4):
        pts[27 + i] = (cx, cy - 10.0 + 4.0 * i)
    for i in range(5):
        pts[31 + i] = (cx - 4.0 + 2.0 * i, cy + 4.0)
    # eyes 37-48
    pts[36:42] = _eye_points((cx - 16.0, cy - 8.0), ear)
    pts[42:48] = _eye_points((cx + 16.0, cy - 8.0), ear)
    # outer lip 49-60: the eight controlled points plus four interpolants
    lip = _lip_points((cx, cy + 14.0), lar)
    controlled = (49, 51, 52, 53, 55, 57, 58, 59)
    for idx, pt in zip(controlled, lip):
        pts[idx - 1] = pt
    pts[49] = ((pts[48][0] + pts[50][0]) / 2.0, (pts[48][1] + pts[50][1]) / 2.0)  # 50
    pts[53] = ((pts[52][0] + pts[54][0]) / 2.0, (pts[52][1] + pts[54][1]) / 2.0)  # 54
    pts[55] = ((pts[54][0] + pts[56][0]) / 2.0, (pts[54][1] + pts[56][1]) / 2.0)  # 56
    pts[59] = ((pts[58][0] + pts[48][0]) / 2.0, (pts[58][1] + pts[48][1]) / 2.0)  # 60
    # inner lip 61-68: shrunk outer ring
    lip_center = np.array([cx, cy + 14.0])
    ring = [0, 2, 3, 4, 6, 7]  # L1 L3 L4 L5 L7 L8 as an octagon subset
    inner = [lip_center + 0.6 * (np.asarray(lip[i]) - lip_center) for i in ring]
    pts[60:66] = inner
    pts[66] = lip_center + (0.0, -1.0)
    pts[67] = lip_center + (0.0, 1.0)
    return pts


def _deid_landmarks(original: np.ndarray, offset: float) -> np.ndarray:
    """Perturb lid/lip separations by ``offset`` pixels; 0 returns a copy."""
    out = original.copy()
    if offset == 0.0:
        return out
    half = offset / 2.0
    for upper, lower in ((37, 41), (38, 40), (43, 47), (44, 46)):  # 0-based lid pairs
        out[upper, 1] -= half
        out[lower, 1] += half
    out[51, 1] -= half  # L3, outer-lip top mid (point 52)
    out[57, 1] += half  # L7, outer-lip bottom mid (point 58)
    return out


def _pose(spec: SynthSpec, frame: int) -> tuple[float, float, float]:
    t = 2.0 * math.pi * frame / max(spec.frame_count, 2)
    return (5.0 * math.sin(t), -10.0 * math.cos(t), 25.0 * math.sin(2.0 * t))


def _base_image(spec: SynthSpec, frame: int) -> np.ndarray:
    """Textured pattern with non-trivial variance in every window."""
    yy, xx = np.mgrid[0 : spec.height, 0 : spec.width].astype(np.float64)
    t = frame / max(spec.frame_count, 2)
    base = (
        120.0
        + 50.0 * np.sin(2.0 * math.pi * (xx / 17.0 + t)) * np.cos(2.0 * math.pi * yy / 23.0)
        + 25.0 * np.sin(2.0 * math.pi * (xx + 2.0 * yy) / 11.0)
    )
    if spec.grayscale:
        return np.clip(np.rint(base), 0, 255).astype(np.uint8)
    chans = [base, np.roll(base, 3, axis=1), np.roll(base, 5, axis=0)]
    return np.clip(np.rint(np.stack(chans, axis=2)), 0, 255).astype(np.uint8)


def generate_noisy_pair(
    base: np.ndarray, sigma: float, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """The base image and a copy with clamped Gaussian noise added."""
    if sigma < 0:
        raise BadSynthSpec("noise sigma must be >= 0")
    if sigma == 0:
        return base, base.copy()
    rng = np.random.default_rng(seed)
    noisy = base.astype(np.float64) + rng.normal(0.0, sigma, size=base.shape)
    return base, np.clip(np.rint(noisy), 0, 255).astype(np.uint8)


def _write_landmark_csv(path: Path, frames: dict[int, np.ndarray]) -> None:
    lines = ["frame_index,point,x,y"]
    for frame in sorted(frames):
        pts = frames[frame]
        for p in range(68):
            # repr of a Python float round-trips exactly
            lines.append(f"{frame},{p + 1},{float(pts[p, 0])!r},{float(pts[p, 1])!r}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_pose_csv(path: Path, frames: dict[int, tuple[float, float, float]]) -> None:
    lines = ["frame_index,roll,pitch,yaw"]
    for frame in sorted(frames):
        r, p, y = frames[frame]
        lines.append(f"{frame},{float(r)!r},{float(p)!r},{float(y)!r}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def generate_session(spec: SynthSpec, out_dir: str | Path) -> SessionManifest:
    """Write a full synthetic session (images, CSVs, manifest) under out_dir.

    Identical specs produce byte-identical file trees.  Returns the manifest
    with annotations left to be resolved by the normal ingest path.
    """
    spec.validate()
    out_dir = Path(out_dir)
    sid = spec.session_id
    try:
        (out_dir / "images").mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {out_dir}: {exc}") from exc

    rng = np.random.default_rng(spec.seed)
    entries: list[FrameEntry] = []
    orig_lm: dict[int, np.ndarray] = {}
    deid_lm: dict[int, np.ndarray] = {}
    orig_pose: dict[int, tuple[float, float, float]] = {}
    deid_pose: dict[int, tuple[float, float, float]] = {}

    try:
        for frame in range(spec.frame_count):
            ear = BLINK_EAR if frame in spec.blink_frames else BASE_EAR
            lar = YAWN_LAR if frame in spec.yawn_frames else BASE_LAR
            lm = _face_landmarks(spec, frame, ear, lar)
            orig_lm[frame] = lm
            deid_lm[frame] = _deid_landmarks(lm, spec.deid_landmark_offset)
            pose = _pose(spec, frame)
            orig_pose[frame] = pose
            o = spec.deid_pose_offset
            deid_pose[frame] = (pose[0] + o, pose[1] + o, pose[2] + o)

            original = _base_image(spec, frame)
            noisy = original.astype(np.float64)
            if spec.noise_sigma > 0:
                noisy = noisy + rng.normal(0.0, spec.noise_sigma, size=original.shape)
            if frame in spec.spike_frames:
                noisy = noisy + spec.spike_frames[frame]
            deid = np.clip(np.rint(noisy), 0, 255).astype(np.uint8)

            orig_rel = f"images/{sid}_orig_{frame:05d}.png"
            deid_rel = f"images/{sid}_deid_{frame:05d}.png"
            Image.fromarray(original).save(out_dir / orig_rel)
            Image.fromarray(deid).save(out_dir / deid_rel)
            entries.append(FrameEntry(frame_index=frame, original_image=orig_rel, deid_image=deid_rel))

        _write_landmark_csv(out_dir / f"{sid}_landmarks_orig.csv", orig_lm)
        _write_landmark_csv(out_dir / f"{sid}_landmarks_deid.csv", deid_lm)
        _write_pose_csv(out_dir / f"{sid}_pose_orig.csv", orig_pose)
        _write_pose_csv(out_dir / f"{sid}_pose_deid.csv", deid_pose)

        manifest = SessionManifest(
            session_id=sid,
            target_gender=spec.target_gender,
            imposter_gender=spec.imposter_gender,
            glasses=spec.glasses,
            frames=entries,
            original_landmarks=f"{sid}_landmarks_orig.csv",
            deid_landmarks=f"{sid}_landmarks_deid.csv",
            original_pose=f"{sid}_pose_orig.csv",
            deid_pose=f"{sid}_pose_deid.csv",
            base_dir=out_dir,
        )
        save_manifest([manifest], out_dir / "manifest.json")
    except OSError as exc:
        raise IoError(f"cannot write session files under {out_dir}: {exc}") from exc
    return manifest
