"""Review service tests: queue, evidence, verdict log, calibration, replay."""

import json
import pytest
from fastapi.testclient import TestClient

from deid_audit.config import default_config
from deid_audit.errors import MissingReport
from deid_audit.ingest import load_manifest
from deid_audit.pipeline import analyze_sessions
from deid_audit.report import build_report, write_report
from deid_audit.service import create_app
from deid_audit.synthgen import SynthSpec, generate_session


@pytest.fixture()
def workspace(tmp_path):
    """A report with flags on every frame plus its image tree."""
    data_dir = tmp_path / "session"
    generate_session(
        SynthSpec(seed=2, frame_count=6, session_id="dup",
                  deid_landmark_offset=0.0, deid_pose_offset=0.0),
        data_dir,
    )
    sessions = load_manifest(data_dir / "manifest.json")
    cfg = default_config()
    report = build_report(analyze_sessions(sessions, cfg), cfg, generated_at=None)
    report_path = tmp_path / "report.json"
    write_report(report, report_path)
    return {
        "report_path": report_path,
        "images_root": data_dir,
        "verdict_log": tmp_path / "verdicts.jsonl",
        "tmp": tmp_path,
    }


def make_client(ws, **kwargs) -> TestClient:
    app = create_app(
        report_path=ws["report_path"],
        images_root=ws["images_root"],
        verdict_log=ws["verdict_log"],
        **kwargs,
    )
    return TestClient(app)


def verdict_body(frame_index, verdict="pass", session_id="dup", reviewer="alice", **extra):
    return {
        "session_id": session_id,
        "frame_index": frame_index,
        "verdict": verdict,
        "reviewer": reviewer,
        **extra,
    }


class TestQueue:
    def test_pending_lists_all_flags_sorted(self, workspace):
        client = make_client(workspace)
        items = client.get("/api/queue").json()
        assert len(items) == 6
        keys = [(i["session_id"], i["frame_index"]) for i in items]
        assert keys == sorted(keys)
        assert all(i["status"] == "pending" for i in items)
        assert all(i["reason"] == "zero_error_suspect" for i in items)

    def test_verdict_removes_from_pending(self, workspace):
        client = make_client(workspace)
        assert client.post("/api/verdicts", json=verdict_body(0)).status_code == 201
        pending = client.get("/api/queue", params={"status": "pending"}).json()
        assert len(pending) == 5
        everything = client.get("/api/queue", params={"status": "all"}).json()
        assert len(everything) == 6
        assert [i for i in everything if i["frame_index"] == 0][0]["status"] == "pass"

    def test_context_series_attached(self, workspace):
        client = make_client(workspace)
        item = client.get("/api/queue").json()[0]
        assert item["context"]["metric"] == "mae_rpy"  # zero-error flags carry no metric
        assert len(item["context"]["frames"]) == 6

    def test_bad_status_param(self, workspace):
        client = make_client(workspace)
        assert client.get("/api/queue", params={"status": "weird"}).status_code == 400

    def test_reads_are_side_effect_free(self, workspace):
        client = make_client(workspace)
        before = client.get("/api/queue", params={"status": "all"}).json()
        client.get("/api/frames/dup/0")
        client.get("/api/images/dup/0/original")
        client.get("/api/queue")
        after = client.get("/api/queue", params={"status": "all"}).json()
        assert before == after
        assert not workspace["verdict_log"].exists()


class TestFrameDetail:
    def test_flagged_frame_detail(self, workspace):
        client = make_client(workspace)
        detail = client.get("/api/frames/dup/0").json()
        assert detail["status"] == "pending"
        assert len(detail["flags"]) >= 1
        assert detail["quality"]["mse"] > 0
        assert detail["images"]["original"] == "/api/images/dup/0/original"

    def test_unknown_session_404(self, workspace):
        client = make_client(workspace)
        assert client.get("/api/frames/ghost/0").status_code == 404

    def test_unknown_frame_404(self, workspace):
        client = make_client(workspace)
        assert client.get("/api/frames/dup/999").status_code == 404

    def test_annotation_gap_noted(self, workspace, tmp_path):
        report = json.loads(workspace["report_path"].read_text())
        report["sessions"][0]["frames"][1]["missing_annotations"] = ["deid_pose"]
        patched = tmp_path / "patched.json"
        patched.write_text(json.dumps(report))
        app = create_app(patched, workspace["images_root"], workspace["verdict_log"])
        detail = TestClient(app).get("/api/frames/dup/1").json()
        assert detail["missing_annotations"] == ["deid_pose"]


class TestImages:
    def test_png_served(self, workspace):
        client = make_client(workspace)
        resp = client.get("/api/images/dup/0/original")
        assert resp.status_code == 200
        assert resp.headers["content-type"] == "image/png"
        assert resp.content[:8] == b"\x89PNG\r\n\x1a\n"

    def test_unknown_variant_404(self, workspace):
        client = make_client(workspace)
        assert client.get("/api/images/dup/0/x").status_code == 404

    def test_traversal_403(self, workspace):
        client = make_client(workspace)
        # dotted session ids are rejected before any lookup
        resp = client.get("/api/images/..hidden/0/original")
        assert resp.status_code == 403

    def test_traversal_rejected_in_handler(self, workspace):
        from fastapi import HTTPException

        app = create_app(workspace["report_path"], workspace["images_root"],
                         workspace["verdict_log"])
        state = app.state.review
        for evil in ("../../etc", "a/b", "..", "x\\y"):
            with pytest.raises(HTTPException) as exc:
                state.image_path(evil, 0, "original")
            assert exc.value.status_code == 403

    def test_escaping_image_path_403(self, workspace, tmp_path):
        report = json.loads(workspace["report_path"].read_text())
        report["sessions"][0]["frames"][0]["original_image"] = "../secret.png"
        patched = tmp_path / "patched.json"
        patched.write_text(json.dumps(report))
        (tmp_path / "secret.png").write_bytes(b"x")
        app = create_app(patched, workspace["images_root"], workspace["verdict_log"])
        assert TestClient(app).get("/api/images/dup/0/original").status_code == 403

    def test_missing_file_404(self, workspace):
        (workspace["images_root"] / "images" / "dup_orig_00000.png").unlink()
        client = make_client(workspace)
        assert client.get("/api/images/dup/0/original").status_code == 404


class TestVerdicts:
    def test_valid_verdict_appends_log(self, workspace):
        client = make_client(workspace)
        resp = client.post("/api/verdicts", json=verdict_body(2, "fail", reason="blur"))
        assert resp.status_code == 201
        record = resp.json()
        assert record["verdict"] == "fail" and record["timestamp"].endswith("Z")
        lines = workspace["verdict_log"].read_text().splitlines()
        assert len(lines) == 1
        assert json.loads(lines[0])["reason"] == "blur"

    def test_resubmission_appends_latest_wins(self, workspace):
        client = make_client(workspace)
        client.post("/api/verdicts", json=verdict_body(0, "pass"))
        client.post("/api/verdicts", json=verdict_body(0, "fail"))
        assert len(workspace["verdict_log"].read_text().splitlines()) == 2
        everything = client.get("/api/queue", params={"status": "all"}).json()
        assert [i for i in everything if i["frame_index"] == 0][0]["status"] == "fail"

    def test_unknown_enum_value_400(self, workspace):
        client = make_client(workspace)
        assert client.post("/api/verdicts", json=verdict_body(0, "maybe")).status_code == 400

    def test_wrong_enum_type_409(self, workspace):
        client = make_client(workspace)
        assert client.post("/api/verdicts", json=verdict_body(0, 42)).status_code == 409

    def test_missing_fields_400(self, workspace):
        client = make_client(workspace)
        assert client.post("/api/verdicts", json={"session_id": "dup"}).status_code == 400

    def test_not_json_400(self, workspace):
        client = make_client(workspace)
        resp = client.post(
            "/api/verdicts", content=b"not json", headers={"content-type": "application/json"}
        )
        assert resp.status_code == 400

    def test_unflagged_frame_404(self, workspace, tmp_path):
        report = json.loads(workspace["report_path"].read_text())
        report["flags"] = [f for f in report["flags"] if f["frame_index"] != 3]
        patched = tmp_path / "patched.json"
        patched.write_text(json.dumps(report))
        app = create_app(patched, workspace["images_root"], workspace["verdict_log"])
        client = TestClient(app)
        assert client.post("/api/verdicts", json=verdict_body(3)).status_code == 404


class TestReplay:
    def test_restart_reconstructs_statuses(self, workspace):
        import random

        rng = random.Random(99)
        client = make_client(workspace)
        for _ in range(100):
            frame = rng.randrange(6)
            verdict = rng.choice(["pass", "fail"])
            resp = client.post("/api/verdicts", json=verdict_body(frame, verdict))
            assert resp.status_code == 201
        before = client.get("/api/queue", params={"status": "all"}).json()

        restarted = make_client(workspace)  # fresh app, same log
        after = restarted.get("/api/queue", params={"status": "all"}).json()
        assert before == after

    def test_log_is_append_only(self, workspace):
        client = make_client(workspace)
        client.post("/api/verdicts", json=verdict_body(0, "pass"))
        first = workspace["verdict_log"].read_text()
        client.post("/api/verdicts", json=verdict_body(1, "fail"))
        second = workspace["verdict_log"].read_text()
        assert second.startswith(first)


class TestCalibrateEndpoint:
    def seed_verdicts(self, client):
        # zero-error frames marked fail, plus one pass: separable on ear_err
        client.post("/api/verdicts", json=verdict_body(0, "pass"))
        for i in range(1, 6):
            client.post("/api/verdicts", json=verdict_body(i, "fail"))

    def test_calibrate_returns_and_persists(self, workspace):
        client = make_client(workspace)
        self.seed_verdicts(client)
        resp = client.post("/api/calibrate")
        assert resp.status_code == 200
        body = resp.json()
        assert "config" in body and "previous" in body
        persisted = workspace["tmp"] / "threshold_config.calibrated.json"
        assert persisted.exists()
        assert json.loads(persisted.read_text()) == body["config"]

    def test_insufficient_verdicts_422(self, workspace):
        client = make_client(workspace)
        assert client.post("/api/calibrate").status_code == 422
        client.post("/api/verdicts", json=verdict_body(0, "pass"))
        assert client.post("/api/calibrate").status_code == 422

    def test_repeat_call_is_deterministic(self, workspace):
        client = make_client(workspace)
        self.seed_verdicts(client)
        first = client.post("/api/calibrate").json()
        second = client.post("/api/calibrate").json()
        assert first == second


class TestAuthAndSetup:
    def test_cors_headers_for_ui_origin(self, workspace):
        client = make_client(workspace, cors_origin="http://localhost:5173")
        resp = client.get("/api/queue", headers={"Origin": "http://localhost:5173"})
        assert resp.headers.get("access-control-allow-origin") == "http://localhost:5173"

    def test_token_required_when_set(self, workspace):
        client = make_client(workspace, token="hunter2")
        assert client.get("/api/queue").status_code == 401
        ok = client.get("/api/queue", headers={"Authorization": "Bearer hunter2"})
        assert ok.status_code == 200

    def test_missing_report_raises(self, workspace):
        with pytest.raises(MissingReport):
            create_app(workspace["tmp"] / "ghost.json", workspace["images_root"],
                       workspace["verdict_log"])

    def test_ui_dir_served_when_present(self, workspace, tmp_path):
        ui = tmp_path / "ui"
        ui.mkdir()
        (ui / "index.html").write_text("<html><body>review</body></html>")
        client = make_client(workspace, ui_dir=ui)
        resp = client.get("/")
        assert resp.status_code == 200
        assert "review" in resp.text
