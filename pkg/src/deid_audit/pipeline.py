"""Frame-level processing and per-session flagging.

Frames are processed independently (parallel map), then flags and series
checks run as a deterministic fold in frame-index order, so reports do not
depend on worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .analysis import (
    Flag,
    detect_series_anomalies,
    flag_missing_annotation,
    flag_out_of_range,
    flag_zero_error,
)
from .config import ThresholdConfig
from .cues import CueErrors, CueMetrics, compute_cues, cue_errors
from .ingest import FrameEntry, SessionManifest, load_image_pair, resolve_annotations
from .quality import QualityMetrics, frame_quality

ANNOTATION_KINDS = ("original_landmarks", "deid_landmarks", "original_pose", "deid_pose")


@dataclass(frozen=True)
class FrameResult:
    """Everything measured on one frame pair."""

    frame_index: int
    original_image: str
    deid_image: str
    original_cues: CueMetrics
    deid_cues: CueMetrics
    errors: CueErrors
    quality: QualityMetrics
    missing_annotations: tuple[str, ...] = ()


@dataclass
class SessionResult:
    """One session's processed frames and the flags raised on them."""

    session: SessionManifest
    frames: list[FrameResult]
    flags: list[Flag] = field(default_factory=list)

    @property
    def session_id(self) -> str:
        return self.session.session_id


def process_frame(session: SessionManifest, entry: FrameEntry) -> FrameResult:
    """Compute cues, cue errors and quality metrics for one frame pair."""
    x, y = load_image_pair(
        session.resolve(entry.original_image), session.resolve(entry.deid_image)
    )
    quality = frame_quality(x, y)
    orig = compute_cues(entry.original_landmarks, entry.original_pose, session.glasses)
    deid = compute_cues(entry.deid_landmarks, entry.deid_pose, session.glasses)
    missing = tuple(k for k in ANNOTATION_KINDS if getattr(entry, k) is None)
    return FrameResult(
        frame_index=entry.frame_index,
        original_image=entry.original_image,
        deid_image=entry.deid_image,
        original_cues=orig,
        deid_cues=deid,
        errors=cue_errors(orig, deid),
        quality=quality,
        missing_annotations=missing,
    )


def _session_flags(result: SessionResult, cfg: ThresholdConfig) -> list[Flag]:
    sid = result.session_id
    flags: list[Flag] = []
    for fr in result.frames:
        zero = flag_zero_error(fr.errors, cfg.zero_error_epsilon, sid, fr.frame_index)
        if zero is not None:
            flags.append(zero)
        flags.extend(flag_out_of_range(fr.errors, fr.quality, cfg, sid, fr.frame_index))
        if fr.missing_annotations:
            flags.append(flag_missing_annotation(fr.missing_annotations, sid, fr.frame_index))
    for metric in cfg.anomaly.metrics:
        series = [fr.quality.as_dict().get(metric) for fr in result.frames]
        indices = [fr.frame_index for fr in result.frames]
        present = sum(1 for v in series if v is not None)
        if present < cfg.anomaly.window:
            continue  # too short to spot-check; not an error at session level
        flags.extend(detect_series_anomalies(series, cfg, metric, sid, indices))
    return sorted(flags, key=Flag.sort_key)


def analyze_sessions(
    sessions: list[SessionManifest],
    cfg: ThresholdConfig,
    workers: int = 1,
) -> list[SessionResult]:
    """Process every frame of every session and apply the flagging rules.

    ``workers`` only controls the parallel frame map; results are reduced
    in frame-index order and are identical for any worker count.
    """
    for session in sessions:
        resolve_annotations(session)
    tasks = [(s, e) for s in sessions for e in s.frames]
    if workers <= 1:
        processed = [process_frame(s, e) for s, e in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            processed = list(pool.map(lambda t: process_frame(*t), tasks))
    results: list[SessionResult] = []
    cursor = 0
    for session in sessions:
        n = len(session.frames)
        result = SessionResult(session=session, frames=processed[cursor : cursor + n])
        cursor += n
        result.flags = _session_flags(result, cfg)
        results.append(result)
    return results
