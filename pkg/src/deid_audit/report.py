"""Audit report assembly, JSON serialization, and delimited exports.

The report is self-contained: the per-frame records it embeds are enough to
reproduce every aggregate table.  JSON cannot express infinities, so
non-finite values (notably PSNR of identical pairs) serialize as null; the
canonical mode zeroes the one timestamp header field so byte comparison
works across runs.
"""

from __future__ import annotations

import csv
import json
import math
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .analysis import cumulative_curve, gender_pair_stats, quantile_summary, summarize
from .config import ThresholdConfig, config_to_dict
from .errors import EmptySeries
from .pipeline import SessionResult

SCHEMA_VERSION = 1

CUE_FIELDS = ("ear", "pupil_circularity", "lar", "roll", "pitch", "yaw")
ERROR_FIELDS = ("ear_err", "pc_err", "lar_err", "roll_err", "pitch_err", "yaw_err", "mae_rpy")
QUALITY_FIELDS = ("mse", "rmse", "psnr", "uiqi", "ergas", "sam")
CURVE_METRICS = ("ear_err", "pc_err", "lar_err")
POSE_ERROR_FIELDS = ("roll_err", "pitch_err", "yaw_err", "mae_rpy")


def _stat_or_none(values) -> dict | None:
    try:
        return summarize(values).as_dict()
    except EmptySeries:
        return None


def _quant_or_none(values) -> dict | None:
    try:
        return quantile_summary(values)
    except EmptySeries:
        return None


def _collect(results: list[SessionResult], getter) -> list:
    return [getter(fr) for res in results for fr in res.frames]


def build_report(
    results: list[SessionResult],
    cfg: ThresholdConfig,
    generated_at: str | None = None,
) -> dict:
    """Assemble the full audit report as a JSON-ready dict."""
    sessions_out = []
    for res in results:
        s = res.session
        sessions_out.append(
            {
                "session_id": s.session_id,
                "target_gender": s.target_gender,
                "imposter_gender": s.imposter_gender,
                "gender_pair": s.gender_pair,
                "glasses": s.glasses,
                "frames": [
                    {
                        "frame_index": fr.frame_index,
                        "original_image": fr.original_image,
                        "deid_image": fr.deid_image,
                        "cues": {
                            "original": fr.original_cues.as_dict(),
                            "deid": fr.deid_cues.as_dict(),
                        },
                        "cue_errors": fr.errors.as_dict(),
                        "quality": fr.quality.as_dict(),
                        "missing_annotations": list(fr.missing_annotations),
                    }
                    for fr in res.frames
                ],
            }
        )

    statistics = {
        "cues": {
            variant: {
                name: _stat_or_none(
                    _collect(results, lambda fr, n=name, v=variant: getattr(
                        fr.original_cues if v == "original" else fr.deid_cues, n
                    ))
                )
                for name in CUE_FIELDS
            }
            for variant in ("original", "deid")
        },
        "cue_errors": {
            name: _stat_or_none(_collect(results, lambda fr, n=name: getattr(fr.errors, n)))
            for name in ERROR_FIELDS
        },
        "quality": {
            name: _stat_or_none(_collect(results, lambda fr, n=name: fr.quality.as_dict()[n]))
            for name in QUALITY_FIELDS
        },
    }

    curves = {}
    for name in CURVE_METRICS:
        values = _collect(results, lambda fr, n=name: getattr(fr.errors, n))
        try:
            curve = cumulative_curve(values, metric=name)
        except EmptySeries:
            curves[name] = None
            continue
        queries = []
        rng = cfg.range_for(name)
        if rng is not None and math.isfinite(rng.hi):
            queries.append(
                {"threshold": rng.hi, "fraction_below": curve.fraction_below(rng.hi)}
            )
        curves[name] = {
            "breakpoints": [[v, f] for v, f in curve.breakpoints],
            "queries": queries,
        }

    pose_quantiles = {
        name: _quant_or_none(_collect(results, lambda fr, n=name: getattr(fr.errors, n)))
        for name in POSE_ERROR_FIELDS
    }

    pairs = gender_pair_stats(
        [(res.session.gender_pair, [fr.errors for fr in res.frames]) for res in results]
    )

    flags = sorted((f for res in results for f in res.flags), key=lambda f: f.sort_key())

    checks = [_rpy_ordering_check(statistics["cue_errors"])]

    return {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "deid-audit", "version": __version__},
        "generated_at": generated_at,
        "config": config_to_dict(cfg),
        "sessions": sessions_out,
        "statistics": statistics,
        "gender_pairs": [p.as_dict() for p in pairs],
        "cumulative_curves": curves,
        "pose_error_quantiles": pose_quantiles,
        "flags": [f.as_dict() for f in flags],
        "checks": checks,
    }


def _rpy_ordering_check(error_stats: dict) -> dict:
    """Informational: mean roll error < pitch error < yaw error.

    This ordering is expected of naturalistic driving footage but is a
    dataset property, so it is reported, never enforced.
    """
    means = []
    for name in ("roll_err", "pitch_err", "yaw_err"):
        stat = error_stats.get(name)
        means.append(stat["mean"] if stat else None)
    if any(m is None for m in means):
        return {"name": "mean_roll_err<pitch_err<yaw_err", "observed": None, "detail": "pose errors absent"}
    observed = means[0] < means[1] < means[2]
    return {
        "name": "mean_roll_err<pitch_err<yaw_err",
        "observed": observed,
        "detail": f"roll {means[0]:.4g}, pitch {means[1]:.4g}, yaw {means[2]:.4g} deg",
    }


def now_utc_iso() -> str:
    return datetime.now(timezone.utc).replace(microsecond=0).isoformat().replace("+00:00", "Z")


def _sanitize(obj):
    """Replace non-finite floats with None so JSON stays standard."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    return obj


def report_to_json(report: dict) -> str:
    return json.dumps(_sanitize(report), indent=2, allow_nan=False) + "\n"


def write_report(report: dict, path: str | Path) -> None:
    Path(path).write_text(report_to_json(report), encoding="utf-8")


def load_report(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def frame_metric_values(frame: dict) -> dict[str, float]:
    """Flat metric map for one report frame (calibration, review context)."""
    out: dict[str, float] = {}
    for name, value in frame["cue_errors"].items():
        if value is not None:
            out[name] = value
    for name, value in frame["quality"].items():
        if value is not None:
            out[name] = value
    return out


def write_frames_csv(report: dict, path: str | Path) -> None:
    """One row per frame with every cue, error and quality column."""
    header = (
        ["session_id", "frame_index"]
        + [f"orig_{n}" for n in CUE_FIELDS]
        + [f"deid_{n}" for n in CUE_FIELDS]
        + list(ERROR_FIELDS)
        + list(QUALITY_FIELDS)
        + ["missing_annotations"]
    )
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for session in report["sessions"]:
            for fr in session["frames"]:
                row = [session["session_id"], fr["frame_index"]]
                row += [fr["cues"]["original"][n] for n in CUE_FIELDS]
                row += [fr["cues"]["deid"][n] for n in CUE_FIELDS]
                row += [fr["cue_errors"][n] for n in ERROR_FIELDS]
                row += [fr["quality"][n] for n in QUALITY_FIELDS]
                row.append(";".join(fr["missing_annotations"]))
                writer.writerow(["" if v is None else v for v in row])


def write_flags_csv(report: dict, path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["session_id", "frame_index", "reason", "metric", "value", "detail"])
        for flag in report["flags"]:
            writer.writerow(
                [
                    flag["session_id"],
                    flag["frame_index"],
                    flag["reason"],
                    flag["metric"] or "",
                    "" if flag["value"] is None else flag["value"],
                    flag["detail"],
                ]
            )


def write_stats_csv(report: dict, path: str | Path) -> None:
    """Cue / error / quality summary tables in one delimited file."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["table", "metric", "maximum", "minimum", "mean", "std_dev", "count"])
        stats = report["statistics"]
        blocks = [
            ("cues_original", stats["cues"]["original"]),
            ("cues_deid", stats["cues"]["deid"]),
            ("cue_errors", stats["cue_errors"]),
            ("quality", stats["quality"]),
        ]
        for label, table in blocks:
            for metric, stat in table.items():
                if stat is None:
                    writer.writerow([label, metric, "", "", "", "", 0])
                else:
                    writer.writerow(
                        [
                            label,
                            metric,
                            stat["maximum"],
                            stat["minimum"],
                            stat["mean"],
                            stat["std_dev"],
                            stat["count"],
                        ]
                    )
