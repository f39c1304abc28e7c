"""HTTP review service for the human-in-the-loop triage loop.

Serves the flagged-frame queue with metric context, frame evidence (metrics
plus the original/de-identified images), records reviewer verdicts into an
append-only JSONL log, and recalibrates thresholds from those verdicts on
demand.  State is reconstructed from the report plus a replay of the log,
so restarts lose nothing.
"""

from __future__ import annotations

import json
import os
import threading
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .analysis import VerdictSample, calibrate_thresholds
from .config import ThresholdConfig, config_to_dict, default_config, load_config, save_config
from .errors import DeidAuditError, InsufficientVerdicts, MissingReport
from .report import frame_metric_values, load_report

CONTEXT_HALF_SPAN = 50
VERDICT_VALUES = ("pass", "fail")


def _utc_now() -> str:
    return datetime.now(timezone.utc).replace(microsecond=0).isoformat().replace("+00:00", "Z")


class ReviewState:
    """Report index, verdict log, and queue bookkeeping for the service."""

    def __init__(
        self,
        report: dict,
        images_root: Path,
        verdict_log: Path,
        cfg: ThresholdConfig,
        calibrated_out: Path | None = None,
    ):
        self.report = report
        self.images_root = images_root
        self.verdict_log = verdict_log
        self.cfg = cfg
        self.calibrated_out = calibrated_out
        self._write_lock = threading.Lock()

        self.frames: dict[tuple[str, int], dict] = {}
        self.sessions: dict[str, dict] = {}
        for session in report["sessions"]:
            self.sessions[session["session_id"]] = session
            for fr in session["frames"]:
                self.frames[(session["session_id"], fr["frame_index"])] = fr
        self.flags: list[dict] = list(report.get("flags", []))
        self.flagged: dict[tuple[str, int], list[dict]] = {}
        for flag in self.flags:
            self.flagged.setdefault((flag["session_id"], flag["frame_index"]), []).append(flag)

        # Latest verdict per frame, replayed from the append-only log.
        self.latest: dict[tuple[str, int], dict] = {}
        self.verdict_count = 0
        if verdict_log.exists():
            for lineno, line in enumerate(verdict_log.read_text(encoding="utf-8").splitlines(), 1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise DeidAuditError(f"{verdict_log}:{lineno}: corrupt verdict record") from exc
                self._apply(record)

    def _apply(self, record: dict) -> None:
        key = (record["session_id"], record["frame_index"])
        self.latest[key] = record
        self.verdict_count += 1

    def status_of(self, key: tuple[str, int]) -> str:
        record = self.latest.get(key)
        return record["verdict"] if record else "pending"

    def _series_context(self, flag: dict) -> dict | None:
        metric = flag["metric"] or "mae_rpy"
        session = self.sessions.get(flag["session_id"])
        if session is None:
            return None
        center = flag["frame_index"]
        frames, values = [], []
        for fr in session["frames"]:
            if abs(fr["frame_index"] - center) > CONTEXT_HALF_SPAN:
                continue
            value = fr["quality"].get(metric)
            if value is None:
                value = fr["cue_errors"].get(metric)
            frames.append(fr["frame_index"])
            values.append(value)
        if not frames:
            return None
        return {"metric": metric, "frames": frames, "values": values}

    def queue(self, status: str) -> list[dict]:
        items = []
        for flag in sorted(
            self.flags, key=lambda f: (f["session_id"], f["frame_index"], f["reason"], f["metric"] or "")
        ):
            key = (flag["session_id"], flag["frame_index"])
            verdict_status = self.status_of(key)
            if status == "pending" and verdict_status != "pending":
                continue
            items.append({**flag, "status": verdict_status, "context": self._series_context(flag)})
        return items

    def frame_detail(self, session_id: str, frame_index: int) -> dict:
        key = (session_id, frame_index)
        frame = self.frames.get(key)
        if frame is None:
            raise HTTPException(status_code=404, detail="unknown frame")
        session = self.sessions[session_id]
        base = f"/api/images/{session_id}/{frame_index}"
        return {
            "session_id": session_id,
            "frame_index": frame_index,
            "gender_pair": session["gender_pair"],
            "glasses": session["glasses"],
            "cues": frame["cues"],
            "cue_errors": frame["cue_errors"],
            "quality": frame["quality"],
            "missing_annotations": frame["missing_annotations"],
            "flags": self.flagged.get(key, []),
            "status": self.status_of(key),
            "images": {"original": f"{base}/original", "deid": f"{base}/deid"},
        }

    def image_path(self, session_id: str, frame_index: int, variant: str) -> Path:
        for part in (session_id, variant):
            if "/" in part or "\\" in part or ".." in part:
                raise HTTPException(status_code=403, detail="path traversal rejected")
        if variant not in ("original", "deid"):
            raise HTTPException(status_code=404, detail="unknown variant")
        frame = self.frames.get((session_id, frame_index))
        if frame is None:
            raise HTTPException(status_code=404, detail="unknown frame")
        rel = frame["original_image"] if variant == "original" else frame["deid_image"]
        root = self.images_root.resolve()
        path = (root / rel).resolve()
        if root != path and root not in path.parents:
            raise HTTPException(status_code=403, detail="image path escapes images root")
        if not path.is_file():
            raise HTTPException(status_code=404, detail="image file not found")
        return path

    def add_verdict(self, session_id: str, frame_index: int, verdict: str,
                    reviewer: str, reason: str | None) -> dict:
        if (session_id, frame_index) not in self.flagged:
            raise HTTPException(status_code=404, detail="frame is not flagged")
        record = {
            "session_id": session_id,
            "frame_index": frame_index,
            "verdict": verdict,
            "reason": reason,
            "reviewer": reviewer,
            "timestamp": _utc_now(),
        }
        with self._write_lock:
            with self.verdict_log.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(record) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            self._apply(record)
        return record

    def calibrate(self) -> dict:
        samples = []
        for key, record in sorted(self.latest.items()):
            frame = self.frames.get(key)
            if frame is None:
                continue
            samples.append(VerdictSample(label=record["verdict"], metrics=frame_metric_values(frame)))
        labels = {s.label for s in samples}
        if "pass" not in labels or "fail" not in labels:
            raise InsufficientVerdicts("need at least one pass and one fail verdict")
        new_cfg = calibrate_thresholds(samples, self.cfg)
        if self.calibrated_out is not None:
            save_config(new_cfg, self.calibrated_out)
        return {"config": config_to_dict(new_cfg), "previous": config_to_dict(self.cfg)}


def create_app(
    report_path: str | Path,
    images_root: str | Path = ".",
    verdict_log: str | Path = "verdicts.jsonl",
    config_path: str | Path | None = None,
    ui_dir: str | Path | None = None,
    cors_origin: str = "*",
    token: str | None = None,
) -> FastAPI:
    """Build the review app around one report file.

    ``token`` (default: env DEID_AUDIT_TOKEN) enables static bearer-token
    auth on the API when set.
    """
    report_path = Path(report_path)
    if not report_path.is_file():
        raise MissingReport(f"report not found: {report_path}")
    report = load_report(report_path)
    cfg = load_config(config_path) if config_path else default_config()
    calibrated_out = Path(verdict_log).parent / "threshold_config.calibrated.json"
    state = ReviewState(report, Path(images_root), Path(verdict_log), cfg, calibrated_out)
    if token is None:
        token = os.environ.get("DEID_AUDIT_TOKEN") or None

    app = FastAPI(title="deid-audit review", version=report["tool"]["version"])
    app.state.review = state
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[cors_origin] if cors_origin != "*" else ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.middleware("http")
    async def _auth(request: Request, call_next):
        if token and request.url.path.startswith("/api/"):
            supplied = request.headers.get("authorization", "")
            if supplied != f"Bearer {token}":
                return JSONResponse({"detail": "missing or bad bearer token"}, status_code=401)
        return await call_next(request)

    @app.get("/api/queue")
    def get_queue(status: str = "pending"):
        if status not in ("pending", "all"):
            raise HTTPException(status_code=400, detail="status must be pending or all")
        return state.queue(status)

    @app.get("/api/frames/{session_id}/{frame_index}")
    def get_frame(session_id: str, frame_index: int):
        return state.frame_detail(session_id, frame_index)

    @app.get("/api/images/{session_id}/{frame_index}/{variant}")
    def get_image(session_id: str, frame_index: int, variant: str):
        path = state.image_path(session_id, frame_index, variant)
        return Response(content=path.read_bytes(), media_type="image/png")

    @app.post("/api/verdicts", status_code=201)
    async def post_verdict(request: Request):
        try:
            body = await request.json()
        except Exception:
            raise HTTPException(status_code=400, detail="body must be a JSON object")
        if not isinstance(body, dict):
            raise HTTPException(status_code=400, detail="body must be a JSON object")
        session_id = body.get("session_id")
        frame_index = body.get("frame_index")
        verdict = body.get("verdict")
        reviewer = body.get("reviewer")
        reason = body.get("reason")
        if not isinstance(session_id, str) or not session_id:
            raise HTTPException(status_code=400, detail="session_id must be a non-empty string")
        if not isinstance(frame_index, int) or isinstance(frame_index, bool):
            raise HTTPException(status_code=400, detail="frame_index must be an integer")
        if not isinstance(reviewer, str) or not reviewer:
            raise HTTPException(status_code=400, detail="reviewer must be a non-empty string")
        if reason is not None and not isinstance(reason, str):
            raise HTTPException(status_code=400, detail="reason must be a string when present")
        if not isinstance(verdict, str):
            # wrong JSON type for the enum, as opposed to an unknown value
            raise HTTPException(status_code=409, detail="verdict must be a string")
        if verdict not in VERDICT_VALUES:
            raise HTTPException(status_code=400, detail="verdict must be 'pass' or 'fail'")
        return state.add_verdict(session_id, frame_index, verdict, reviewer, reason)

    @app.post("/api/calibrate")
    def post_calibrate():
        try:
            return state.calibrate()
        except InsufficientVerdicts as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
