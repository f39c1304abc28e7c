"""Render the report's plot data to image files.

Violin plots of head-pose errors, cumulative error curves for the eye/lip
cues, gender-pair bars, and per-session series plots of the anomaly metric
with flagged frames marked.  Everything is drawn from the report dict, so
figures can be (re)rendered from a saved report without the input footage.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

POSE_SERIES = ("roll_err", "pitch_err", "yaw_err", "mae_rpy")
POSE_LABELS = ("Roll", "Pitch", "Yaw", "MAE")


def _error_series(report: dict, name: str) -> list[float]:
    return [
        fr["cue_errors"][name]
        for session in report["sessions"]
        for fr in session["frames"]
        if fr["cue_errors"][name] is not None
    ]


def render_pose_violin(report: dict, path: Path) -> bool:
    data = [_error_series(report, name) for name in POSE_SERIES]
    if any(not series for series in data):
        return False
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.violinplot(data, showmedians=True)
    ax.set_xticks(range(1, len(POSE_LABELS) + 1))
    ax.set_xticklabels(POSE_LABELS)
    ax.set_ylabel("absolute error (deg)")
    ax.set_title("Head-pose errors, original vs de-identified")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return True


def render_cue_cdf(report: dict, path: Path) -> bool:
    curves = report.get("cumulative_curves") or {}
    fig, ax = plt.subplots(figsize=(6, 4))
    drawn = False
    for name, curve in curves.items():
        if not curve or not curve["breakpoints"]:
            continue
        xs = [bp[0] for bp in curve["breakpoints"]]
        ys = [100.0 * bp[1] for bp in curve["breakpoints"]]
        ax.step([0.0] + xs, [0.0] + ys, where="post", label=name)
        drawn = True
    if not drawn:
        plt.close(fig)
        return False
    ax.set_xlabel("absolute error")
    ax.set_ylabel("% of frames at or below")
    ax.set_ylim(0, 105)
    ax.legend()
    ax.set_title("Cumulative cue error")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return True


def render_gender_pairs(report: dict, path: Path) -> bool:
    pairs = report.get("gender_pairs") or []
    if not pairs:
        return False
    labels = [p["pair"] for p in pairs]
    keys = ("roll_err_mean", "pitch_err_mean", "yaw_err_mean", "mae_rpy_mean")
    width = 0.2
    fig, ax = plt.subplots(figsize=(6, 4))
    for i, (key, label) in enumerate(zip(keys, POSE_LABELS)):
        xs = [j + (i - 1.5) * width for j in range(len(pairs))]
        ax.bar(xs, [p[key] for p in pairs], width=width, label=label)
    ax.set_xticks(range(len(pairs)))
    ax.set_xticklabels(labels)
    ax.set_xlabel("target-imposter pair")
    ax.set_ylabel("mean absolute error (deg)")
    ax.legend()
    ax.set_title("Head-pose error by gender pair")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return True


def render_metric_series(report: dict, metric: str, out_dir: Path) -> list[Path]:
    """Per-session series of ``metric`` with flagged frames circled."""
    written = []
    flagged = {
        (f["session_id"], f["frame_index"])
        for f in report.get("flags", [])
        if f["reason"] == "series_anomaly" and f["metric"] == metric
    }
    for session in report["sessions"]:
        xs, ys = [], []
        for fr in session["frames"]:
            value = fr["quality"].get(metric)
            if value is not None:
                xs.append(fr["frame_index"])
                ys.append(value)
        if not xs:
            continue
        fig, ax = plt.subplots(figsize=(7, 3.5))
        ax.plot(xs, ys, lw=1.0)
        marked = [
            (x, y) for x, y in zip(xs, ys) if (session["session_id"], x) in flagged
        ]
        if marked:
            ax.scatter(
                [m[0] for m in marked], [m[1] for m in marked],
                facecolors="none", edgecolors="red", s=60, label="flagged",
            )
            ax.legend()
        ax.set_xlabel("frame")
        ax.set_ylabel(metric)
        ax.set_title(f"{metric} over frames, session {session['session_id']}")
        fig.tight_layout()
        path = out_dir / f"series_{metric}_{session['session_id']}.png"
        fig.savefig(path)
        plt.close(fig)
        written.append(path)
    return written


def render_report_figures(report: dict, out_dir: str | Path) -> list[Path]:
    """Render every figure the report has data for; returns written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if render_pose_violin(report, out_dir / "pose_error_violin.png"):
        written.append(out_dir / "pose_error_violin.png")
    if render_cue_cdf(report, out_dir / "cue_error_cdf.png"):
        written.append(out_dir / "cue_error_cdf.png")
    if render_gender_pairs(report, out_dir / "gender_pair_errors.png"):
        written.append(out_dir / "gender_pair_errors.png")
    for metric in report.get("config", {}).get("anomaly", {}).get("metrics", ["ergas"]):
        written.extend(render_metric_series(report, metric, out_dir))
    return written
