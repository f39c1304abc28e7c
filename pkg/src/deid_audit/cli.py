"""Command-line driver: analyze, calibrate, synth, serve.

Exit codes: 0 success, 2 success with review flags raised, 1 error.
Diagnostics go to stderr; stdout stays silent unless --print-report asks
for the report JSON.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .analysis import VerdictSample, calibrate_thresholds
from .config import default_config, load_config, save_config
from .errors import BindError, DeidAuditError, InsufficientVerdicts
from .figures import render_report_figures
from .ingest import load_manifest
from .pipeline import analyze_sessions
from .report import (
    build_report,
    frame_metric_values,
    load_report,
    now_utc_iso,
    report_to_json,
    write_flags_csv,
    write_frames_csv,
    write_report,
    write_stats_csv,
)
from .synthgen import generate_session, spec_from_dict

log = logging.getLogger("deid_audit")

CONFIG_ENV_VAR = "DEID_AUDIT_CONFIG"


def _resolve_config(path: str | None):
    import os

    if path:
        return load_config(path)
    env = os.environ.get(CONFIG_ENV_VAR)
    if env:
        return load_config(env)
    return default_config()


def cmd_analyze(args) -> int:
    cfg = _resolve_config(args.config)
    sessions = load_manifest(args.manifest)
    results = analyze_sessions(sessions, cfg, workers=args.workers)
    generated_at = None if args.canonical else now_utc_iso()
    report = build_report(results, cfg, generated_at=generated_at)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_report(report, out)
    if not args.no_csv:
        stem = out.with_suffix("")
        write_frames_csv(report, Path(f"{stem}_frames.csv"))
        write_flags_csv(report, Path(f"{stem}_flags.csv"))
        write_stats_csv(report, Path(f"{stem}_stats.csv"))
    if not args.no_figures:
        figures_dir = Path(args.figures_dir) if args.figures_dir else Path(f"{out.with_suffix('')}_figures")
        written = render_report_figures(report, figures_dir)
        log.info("rendered %d figures under %s", len(written), figures_dir)
    if args.print_report:
        sys.stdout.write(report_to_json(report))

    flag_count = len(report["flags"])
    log.info("analyzed %d sessions, %d flags", len(results), flag_count)
    return 2 if flag_count else 0


def _load_verdict_samples(report: dict, verdicts_path: Path) -> list[VerdictSample]:
    frames = {
        (s["session_id"], fr["frame_index"]): fr
        for s in report["sessions"]
        for fr in s["frames"]
    }
    latest: dict[tuple[str, int], str] = {}
    if not verdicts_path.exists():
        raise DeidAuditError(f"verdict log not found: {verdicts_path}")
    for lineno, line in enumerate(verdicts_path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DeidAuditError(f"{verdicts_path}:{lineno}: corrupt verdict record") from exc
        latest[(record["session_id"], record["frame_index"])] = record["verdict"]
    samples = []
    for key, label in sorted(latest.items()):
        frame = frames.get(key)
        if frame is None:
            continue
        samples.append(VerdictSample(label=label, metrics=frame_metric_values(frame)))
    return samples


def cmd_calibrate(args) -> int:
    report = load_report(args.report)
    prior = _resolve_config(args.config)
    samples = _load_verdict_samples(report, Path(args.verdicts))
    new_cfg = calibrate_thresholds(samples, prior)
    save_config(new_cfg, args.out)
    log.info("calibrated thresholds from %d reviewed frames -> %s", len(samples), args.out)
    return 0


def cmd_synth(args) -> int:
    raw = json.loads(Path(args.spec).read_text(encoding="utf-8"))
    spec = spec_from_dict(raw)
    manifest = generate_session(spec, args.out_dir)
    log.info(
        "wrote session %s (%d frames) under %s",
        manifest.session_id, len(manifest.frames), args.out_dir,
    )
    return 0


def _parse_bind(bind: str) -> tuple[str, int]:
    host, sep, port_text = bind.rpartition(":")
    if not sep or not host:
        raise BindError(f"bind address must be HOST:PORT, got {bind!r}")
    try:
        port = int(port_text)
    except ValueError as exc:
        raise BindError(f"port must be an integer, got {port_text!r}") from exc
    if not 0 < port < 65536:
        raise BindError(f"port {port} outside 1..65535")
    return host, port


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    host, port = _parse_bind(args.bind)
    app = create_app(
        report_path=args.report,
        images_root=args.images_root,
        verdict_log=args.verdict_log,
        config_path=args.config,
        ui_dir=args.ui_dir,
        cors_origin=args.cors_origin,
    )
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except OSError as exc:
        raise BindError(f"cannot bind {args.bind}: {exc}") from exc
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deid-audit",
        description="Audit face-swap de-identified driver footage against its originals.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="compute metrics, apply flagging rules, write the report")
    p.add_argument("--manifest", required=True, help="session manifest JSON")
    p.add_argument("--config", help=f"threshold config JSON (fallback: ${CONFIG_ENV_VAR})")
    p.add_argument("--out", required=True, help="report JSON output path")
    p.add_argument("--workers", type=int, default=1, metavar="N", help="parallel frame workers")
    p.add_argument("--canonical", action="store_true",
                   help="omit the timestamp header so identical inputs give identical bytes")
    p.add_argument("--print-report", action="store_true", help="also print the report to stdout")
    p.add_argument("--figures-dir", help="directory for rendered figures (default: <out>_figures)")
    p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    p.add_argument("--no-csv", action="store_true", help="skip CSV table export")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("calibrate", help="refit acceptable ranges from reviewer verdicts")
    p.add_argument("--report", required=True, help="report JSON from analyze")
    p.add_argument("--verdicts", required=True, help="verdict log (JSONL)")
    p.add_argument("--config", help="prior threshold config JSON")
    p.add_argument("--out", required=True, help="output path for the calibrated config")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("synth", help="generate a synthetic session from a spec file")
    p.add_argument("--spec", required=True, help="synthetic session spec JSON")
    p.add_argument("--out-dir", required=True, help="directory to write the session into")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("serve", help="serve the review queue for a report")
    p.add_argument("--report", required=True, help="report JSON from analyze")
    p.add_argument("--images-root", default=".", help="directory image paths resolve against")
    p.add_argument("--bind", default="127.0.0.1:8000", metavar="HOST:PORT")
    p.add_argument("--verdict-log", default="verdicts.jsonl", help="append-only verdict JSONL")
    p.add_argument("--config", help="threshold config JSON for calibration")
    p.add_argument("--ui-dir", help="static review UI directory to serve at /")
    p.add_argument("--cors-origin", default="*", help="allowed CORS origin for the review UI")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InsufficientVerdicts as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DeidAuditError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
