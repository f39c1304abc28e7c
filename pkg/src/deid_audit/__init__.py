"""Audit toolkit for face-swap de-identified driver video.

Computes human-factors cue metrics (eye/lip aspect ratios, pupil
circularity, head pose errors) and full-reference image-quality metrics on
original/de-identified frame pairs, applies flagging rules for human
review, and serves the review loop that recalibrates thresholds.
"""

__version__ = "0.1.0"

from .analysis import (  # noqa: F401
    CumulativeCurve,
    Flag,
    GenderPairStats,
    StatSummary,
    VerdictSample,
    calibrate_thresholds,
    cumulative_curve,
    detect_series_anomalies,
    flag_out_of_range,
    flag_zero_error,
    gender_pair_stats,
    summarize,
)
from .config import MetricRange, ThresholdConfig, default_config, load_config, save_config  # noqa: F401
from .cues import (  # noqa: F401
    CueErrors,
    CueMetrics,
    compute_cues,
    cue_errors,
    eye_aspect_ratio,
    frame_cues,
    lip_aspect_ratio,
    pupil_circularity,
)
from .ingest import (  # noqa: F401
    FrameEntry,
    SessionManifest,
    load_image,
    load_landmarks,
    load_manifest,
    load_pose,
    resolve_annotations,
    save_manifest,
)
from .quality import (  # noqa: F401
    METRIC_DESCRIPTORS,
    MetricDescriptor,
    QualityMetrics,
    ergas,
    frame_quality,
    mse,
    psnr,
    rmse,
    sam,
    uiqi,
)
from .synthgen import SynthSpec, generate_noisy_pair, generate_session  # noqa: F401
