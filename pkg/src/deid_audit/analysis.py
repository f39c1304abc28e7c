"""Aggregation, flagging, anomaly spot-checking and threshold calibration.

Per-frame cue errors and quality metrics roll up into summary tables,
gender-pair breakdowns and cumulative error curves; three rules mark frames
for human review: near-zero error across cues (de-identification may not
have happened), any metric outside its acceptable range, and abrupt
dips/peaks in a metric series (rolling median / MAD robust z-score).
Reviewer verdicts feed back into the acceptable ranges via Youden's J.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .config import (
    HIGHER_IS_SIMILAR,
    LOWER_IS_SIMILAR,
    METRIC_ORDER,
    MetricRange,
    ThresholdConfig,
)
from .cues import CueErrors
from .errors import EmptySeries, InsufficientVerdicts, SeriesTooShort
from .quality import QualityMetrics

# Scales MAD to the standard deviation of a normal distribution.
MAD_TO_SIGMA = 0.6745

REASON_ZERO_ERROR = "zero_error_suspect"
REASON_OUT_OF_RANGE = "out_of_range"
REASON_SERIES_ANOMALY = "series_anomaly"
REASON_MISSING_ANNOTATION = "missing_annotation"

# The zero-error rule needs this many present cue errors before it can fire.
ZERO_ERROR_MIN_PRESENT = 3


@dataclass(frozen=True)
class StatSummary:
    """Max/min/mean plus population standard deviation of a series."""

    maximum: float
    minimum: float
    mean: float
    std_dev: float
    count: int

    def as_dict(self) -> dict:
        return {
            "maximum": self.maximum,
            "minimum": self.minimum,
            "mean": self.mean,
            "std_dev": self.std_dev,
            "count": self.count,
        }


@dataclass(frozen=True)
class CumulativeCurve:
    """Empirical CDF of an error series."""

    metric: str
    breakpoints: tuple[tuple[float, float], ...]  # (value, fraction <= value)

    def fraction_below(self, threshold: float) -> float:
        """Fraction of values <= threshold."""
        frac = 0.0
        for value, cum in self.breakpoints:
            if value <= threshold:
                frac = cum
            else:
                break
        return frac


@dataclass(frozen=True)
class GenderPairStats:
    """Mean head-pose errors for one target-imposter gender pair."""

    pair: str  # target gender then imposter gender, e.g. "FM"
    roll_err_mean: float
    pitch_err_mean: float
    yaw_err_mean: float
    mae_rpy_mean: float
    count: int

    def as_dict(self) -> dict:
        return {
            "pair": self.pair,
            "roll_err_mean": self.roll_err_mean,
            "pitch_err_mean": self.pitch_err_mean,
            "yaw_err_mean": self.yaw_err_mean,
            "mae_rpy_mean": self.mae_rpy_mean,
            "count": self.count,
        }


@dataclass(frozen=True)
class Flag:
    """A frame marked for human review."""

    session_id: str
    frame_index: int
    reason: str
    metric: str | None = None
    value: float | None = None
    detail: str = ""

    def sort_key(self):
        return (self.session_id, self.frame_index, self.reason, self.metric or "")

    def as_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "frame_index": self.frame_index,
            "reason": self.reason,
            "metric": self.metric,
            "value": self.value,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class VerdictSample:
    """One reviewed frame: its latest verdict plus its metric values."""

    label: str  # "pass" | "fail"
    metrics: Mapping[str, float] = field(default_factory=dict)


def summarize(values: Iterable[float | None]) -> StatSummary:
    """Exact max/min/mean and population sigma over the present values."""
    present = [float(v) for v in values if v is not None]
    if not present:
        raise EmptySeries("no present values to summarize")
    arr = np.asarray(present, dtype=np.float64)
    return StatSummary(
        maximum=float(arr.max()),
        minimum=float(arr.min()),
        mean=float(arr.mean()),
        std_dev=float(arr.std(ddof=0)),
        count=len(present),
    )


def quantile_summary(values: Iterable[float | None]) -> dict:
    """Five-number summary plus mean (linear-interpolation quartiles)."""
    present = [float(v) for v in values if v is not None]
    if not present:
        raise EmptySeries("no present values to summarize")
    arr = np.asarray(present, dtype=np.float64)
    q = np.quantile(arr, [0.0, 0.25, 0.5, 0.75, 1.0])
    return {
        "min": float(q[0]),
        "q1": float(q[1]),
        "median": float(q[2]),
        "q3": float(q[3]),
        "max": float(q[4]),
        "mean": float(arr.mean()),
        "count": len(present),
    }


def cumulative_curve(errors: Iterable[float | None], metric: str = "") -> CumulativeCurve:
    """Empirical CDF breakpoints of an error series (gaps excluded)."""
    present = sorted(float(v) for v in errors if v is not None)
    if not present:
        raise EmptySeries("no present values for cumulative curve")
    n = len(present)
    breakpoints = []
    for i, v in enumerate(present):
        if i + 1 < n and present[i + 1] == v:
            continue
        breakpoints.append((v, (i + 1) / n))
    return CumulativeCurve(metric=metric, breakpoints=tuple(breakpoints))


def gender_pair_stats(
    sessions: Iterable[tuple[str, Iterable[CueErrors]]],
) -> list[GenderPairStats]:
    """Mean RPY errors per target-imposter gender pair.

    A frame contributes when all three pose errors are present; pairs with
    no contributing frames are omitted.  Output is sorted by pair label.
    """
    acc: dict[str, list[tuple[float, float, float, float]]] = {}
    for pair, errors in sessions:
        for err in errors:
            if err.mae_rpy is None:
                continue
            acc.setdefault(pair, []).append(
                (err.roll_err, err.pitch_err, err.yaw_err, err.mae_rpy)
            )
    out = []
    for pair in sorted(acc):
        rows = np.asarray(acc[pair], dtype=np.float64)
        means = rows.mean(axis=0)
        out.append(
            GenderPairStats(
                pair=pair,
                roll_err_mean=float(means[0]),
                pitch_err_mean=float(means[1]),
                yaw_err_mean=float(means[2]),
                mae_rpy_mean=float(means[3]),
                count=rows.shape[0],
            )
        )
    return out


def flag_zero_error(
    errors: CueErrors,
    epsilon: float,
    session_id: str = "",
    frame_index: int = 0,
) -> Flag | None:
    """Flag a frame whose present cue errors are all (near) zero.

    Properly de-identified frames should show some error in every cue; the
    rule only fires when at least three cue errors are present so a single
    coincidental zero cannot trigger it.
    """
    present = {k: v for k, v in errors.base_errors().items() if v is not None}
    if len(present) < ZERO_ERROR_MIN_PRESENT:
        return None
    if any(v > epsilon for v in present.values()):
        return None
    worst = max(present.values())
    return Flag(
        session_id=session_id,
        frame_index=frame_index,
        reason=REASON_ZERO_ERROR,
        metric=None,
        value=worst,
        detail=f"{len(present)} cue errors all <= {epsilon:g} (largest {worst:g})",
    )


def flag_out_of_range(
    errors: CueErrors | None,
    quality: QualityMetrics | None,
    cfg: ThresholdConfig,
    session_id: str = "",
    frame_index: int = 0,
) -> list[Flag]:
    """One flag per metric whose value falls outside its acceptable range."""
    values: dict[str, float | None] = {}
    if errors is not None:
        values.update(errors.as_dict())
    if quality is not None:
        values.update(quality.as_dict())
    flags = []
    for metric in METRIC_ORDER:
        value = values.get(metric)
        if value is None:
            continue
        rng = cfg.range_for(metric)
        if rng is None or rng.contains(value):
            continue
        flags.append(
            Flag(
                session_id=session_id,
                frame_index=frame_index,
                reason=REASON_OUT_OF_RANGE,
                metric=metric,
                value=value,
                detail=f"{metric} {value:g} outside [{rng.lo:g}, {rng.hi:g}]",
            )
        )
    return flags


def flag_missing_annotation(
    missing: Sequence[str],
    session_id: str = "",
    frame_index: int = 0,
) -> Flag:
    """Flag a frame whose cue metrics are disabled by annotation gaps."""
    return Flag(
        session_id=session_id,
        frame_index=frame_index,
        reason=REASON_MISSING_ANNOTATION,
        metric=None,
        value=None,
        detail="missing: " + ", ".join(missing),
    )


def detect_series_anomalies(
    values: Sequence[float | None],
    cfg: ThresholdConfig,
    metric: str = "ergas",
    session_id: str = "",
    frame_indices: Sequence[int] | None = None,
) -> list[Flag]:
    """Two-sided rolling median/MAD spot-check over a per-frame series.

    For each non-gap point, a robust z-score is computed against the
    window of ``cfg.anomaly.window`` non-gap neighbors centered on it
    (the window shrinks near the series boundaries).  Windows with MAD 0
    flag any deviation beyond the zero-error epsilon instead.
    """
    if frame_indices is None:
        frame_indices = range(len(values))
    pairs = [(idx, float(v)) for idx, v in zip(frame_indices, values) if v is not None]
    window = cfg.anomaly.window
    if len(pairs) < window:
        raise SeriesTooShort(f"{len(pairs)} non-gap points < window {window}")
    vals = np.asarray([v for _, v in pairs], dtype=np.float64)
    n = len(vals)
    half = window // 2

    med = np.empty(n)
    mad = np.empty(n)
    interior = np.lib.stride_tricks.sliding_window_view(vals, window)
    med[half : n - half] = np.median(interior, axis=1)
    mad[half : n - half] = np.median(np.abs(interior - med[half : n - half, None]), axis=1)
    for j in list(range(half)) + list(range(n - half, n)):
        win = vals[max(0, j - half) : min(n, j + half + 1)]
        med[j] = np.median(win)
        mad[j] = np.median(np.abs(win - med[j]))

    eps = cfg.zero_error_epsilon
    z_th = cfg.anomaly.z_threshold
    flags = []
    for j in range(n):
        dev = vals[j] - med[j]
        if mad[j] == 0.0:
            if abs(dev) <= eps:
                continue
            z = math.inf if dev > 0 else -math.inf
        else:
            z = MAD_TO_SIGMA * dev / mad[j]
            if abs(z) < z_th:
                continue
        flags.append(
            Flag(
                session_id=session_id,
                frame_index=pairs[j][0],
                reason=REASON_SERIES_ANOMALY,
                metric=metric,
                value=vals[j],
                detail=f"robust z {z:g} (median {med[j]:g}, MAD {mad[j]:g}, window {window})",
            )
        )
    return flags


def _youden_best(
    pass_values: Sequence[float],
    fail_values: Sequence[float],
    flag_above: bool,
) -> tuple[float, float] | None:
    """Best (cutpoint, J) over midpoints of the observed values.

    ``flag_above`` True flags values strictly greater than the cutpoint
    (error-like metrics); False flags values strictly below it.  Ties are
    broken toward the more permissive cutpoint.  Returns None when no
    cutpoint beats J = 0.
    """
    pv = np.asarray(sorted(pass_values), dtype=np.float64)
    fv = np.asarray(sorted(fail_values), dtype=np.float64)
    everything = np.unique(np.concatenate([pv, fv]))
    if len(everything) < 2:
        return None
    cuts = (everything[:-1] + everything[1:]) / 2.0
    best: tuple[float, float] | None = None
    for c in cuts:
        if flag_above:
            tpr = float(np.mean(fv > c))
            fpr = float(np.mean(pv > c))
        else:
            tpr = float(np.mean(fv < c))
            fpr = float(np.mean(pv < c))
        j = tpr - fpr
        if best is None or j > best[1] + 1e-12:
            best = (float(c), j)
        elif abs(j - best[1]) <= 1e-12:
            # more permissive: higher cut when flagging above, lower below
            if (flag_above and c > best[0]) or (not flag_above and c < best[0]):
                best = (float(c), j)
    if best is None or best[1] <= 0.0:
        return None
    return best


def calibrate_thresholds(
    samples: Sequence[VerdictSample],
    prior: ThresholdConfig,
) -> ThresholdConfig:
    """Refit acceptable ranges from reviewer verdicts by maximizing Youden's J.

    "fail" verdicts are the positive class.  Error-like metrics move their
    upper bound, similarity metrics (psnr, uiqi) their lower bound; metrics
    whose verdict values show no separation keep the prior range.
    """
    labels = {s.label for s in samples}
    if "pass" not in labels or "fail" not in labels:
        raise InsufficientVerdicts("need at least one pass and one fail verdict")
    cfg = prior
    for metric in METRIC_ORDER:
        pass_values = [
            float(s.metrics[metric])
            for s in samples
            if s.label == "pass" and metric in s.metrics and math.isfinite(s.metrics[metric])
        ]
        fail_values = [
            float(s.metrics[metric])
            for s in samples
            if s.label == "fail" and metric in s.metrics and math.isfinite(s.metrics[metric])
        ]
        if not pass_values or not fail_values:
            continue
        prior_range = cfg.range_for(metric) or MetricRange()
        if metric in HIGHER_IS_SIMILAR:
            best = _youden_best(pass_values, fail_values, flag_above=False)
            if best is not None:
                cfg = cfg.with_range(metric, MetricRange(best[0], prior_range.hi))
        elif metric in LOWER_IS_SIMILAR:
            best = _youden_best(pass_values, fail_values, flag_above=True)
            if best is not None:
                cfg = cfg.with_range(metric, MetricRange(prior_range.lo, best[0]))
    return cfg
