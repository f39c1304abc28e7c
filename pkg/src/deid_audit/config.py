"""Acceptable-range and anomaly-detector configuration.

Defaults are seeded from observed metric extremes on real de-identified
footage and are deliberately permissive; operators override them per fleet.
JSON schema: ``metrics.<name>.lo/hi`` (null = unbounded), ``anomaly.window``,
``anomaly.z_threshold``, ``zero_error.epsilon``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import BadThresholdConfig

# Calibration/flagging direction per metric: error-like metrics are similar
# when low, psnr/uiqi when high.
LOWER_IS_SIMILAR = (
    "ear_err", "pc_err", "lar_err", "roll_err", "pitch_err", "yaw_err", "mae_rpy",
    "mse", "rmse", "ergas", "sam",
)
HIGHER_IS_SIMILAR = ("psnr", "uiqi")
METRIC_ORDER = LOWER_IS_SIMILAR[:7] + ("mse", "rmse", "psnr", "uiqi", "ergas", "sam")


@dataclass(frozen=True)
class MetricRange:
    """Closed acceptable interval; values outside [lo, hi] get flagged."""

    lo: float = 0.0
    hi: float = math.inf

    def contains(self, value: float) -> bool:
        return self.lo <= value <= self.hi


@dataclass(frozen=True)
class AnomalyConfig:
    window: int = 31
    z_threshold: float = 3.5
    metrics: tuple[str, ...] = ("ergas",)


@dataclass(frozen=True)
class ThresholdConfig:
    metrics: dict[str, MetricRange] = field(default_factory=dict)
    anomaly: AnomalyConfig = field(default_factory=AnomalyConfig)
    zero_error_epsilon: float = 1e-6

    def range_for(self, metric: str) -> MetricRange | None:
        return self.metrics.get(metric)

    def with_range(self, metric: str, rng: MetricRange) -> "ThresholdConfig":
        metrics = dict(self.metrics)
        metrics[metric] = rng
        return replace(self, metrics=metrics)


def default_config() -> ThresholdConfig:
    return ThresholdConfig(
        metrics={
            "ear_err": MetricRange(0.0, 0.06),
            "pc_err": MetricRange(0.0, 0.075),
            "lar_err": MetricRange(0.0, 0.06),
            "roll_err": MetricRange(0.0, math.inf),
            "pitch_err": MetricRange(0.0, math.inf),
            "yaw_err": MetricRange(0.0, math.inf),
            "mae_rpy": MetricRange(0.0, math.inf),
            "mse": MetricRange(0.0, 99.39),
            "rmse": MetricRange(0.0, 7.969),
            "psnr": MetricRange(28.16, math.inf),
            "uiqi": MetricRange(0.439, math.inf),
            "ergas": MetricRange(0.0, 16423.93),
            "sam": MetricRange(0.0, 0.805),
        },
    )


def _num_or_none(value, what: str, default: float) -> float:
    if value is None:
        return default
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise BadThresholdConfig(f"{what} must be a number or null")
    return float(value)


def config_from_dict(raw: dict) -> ThresholdConfig:
    if not isinstance(raw, dict):
        raise BadThresholdConfig("config root must be an object")
    metrics: dict[str, MetricRange] = {}
    for name, rng in raw.get("metrics", {}).items():
        if not isinstance(rng, dict):
            raise BadThresholdConfig(f"metrics.{name} must be an object with lo/hi")
        lo = _num_or_none(rng.get("lo"), f"metrics.{name}.lo", -math.inf)
        hi = _num_or_none(rng.get("hi"), f"metrics.{name}.hi", math.inf)
        if lo > hi:
            raise BadThresholdConfig(f"metrics.{name}: lo {lo} exceeds hi {hi}")
        metrics[name] = MetricRange(lo, hi)
    anomaly_raw = raw.get("anomaly", {})
    window = anomaly_raw.get("window", 31)
    if not isinstance(window, int) or isinstance(window, bool) or window < 3 or window % 2 == 0:
        raise BadThresholdConfig("anomaly.window must be an odd integer >= 3")
    z_threshold = _num_or_none(anomaly_raw.get("z_threshold", 3.5), "anomaly.z_threshold", 3.5)
    if z_threshold <= 0:
        raise BadThresholdConfig("anomaly.z_threshold must be > 0")
    anomaly_metrics = tuple(anomaly_raw.get("metrics", ("ergas",)))
    epsilon = _num_or_none(
        raw.get("zero_error", {}).get("epsilon", 1e-6), "zero_error.epsilon", 1e-6
    )
    if epsilon < 0:
        raise BadThresholdConfig("zero_error.epsilon must be >= 0")
    base = default_config()
    merged = dict(base.metrics)
    merged.update(metrics)
    return ThresholdConfig(
        metrics=merged,
        anomaly=AnomalyConfig(window=window, z_threshold=z_threshold, metrics=anomaly_metrics),
        zero_error_epsilon=epsilon,
    )


def config_to_dict(cfg: ThresholdConfig) -> dict:
    def _bound(v: float):
        return v if math.isfinite(v) else None

    return {
        "metrics": {
            name: {"lo": _bound(rng.lo), "hi": _bound(rng.hi)}
            for name, rng in sorted(cfg.metrics.items())
        },
        "anomaly": {
            "window": cfg.anomaly.window,
            "z_threshold": cfg.anomaly.z_threshold,
            "metrics": list(cfg.anomaly.metrics),
        },
        "zero_error": {"epsilon": cfg.zero_error_epsilon},
    }


def load_config(path: str | Path) -> ThresholdConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise BadThresholdConfig(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise BadThresholdConfig(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_dict(raw)


def save_config(cfg: ThresholdConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(config_to_dict(cfg), indent=2) + "\n", encoding="utf-8")
