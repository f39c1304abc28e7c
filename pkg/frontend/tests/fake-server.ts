/**
 * In-memory double of the review API, faithful to the documented contract:
 * queue rows per flag with latest-wins status, append-only verdicts,
 * calibration needing both verdict kinds.  Installed over global fetch.
 */

import type {
  CalibrationResult,
  FrameDetail,
  QueueItem,
  ThresholdConfig,
  VerdictBody,
} from "../src/types.js";

interface Flag {
  session_id: string;
  frame_index: number;
  reason: string;
  metric: string | null;
  value: number | null;
  detail: string;
}

interface FrameFixture {
  session_id: string;
  frame_index: number;
  cue_errors: Record<string, number | null>;
  quality: Record<string, number | null>;
  missing_annotations: string[];
}

export interface FixtureReport {
  flags: Flag[];
  frames: FrameFixture[];
}

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

export class FakeServer {
  verdicts: VerdictBody[] = [];
  requests: string[] = [];
  down = false;

  constructor(private report: FixtureReport) {}

  install(): void {
    globalThis.fetch = (input: RequestInfo | URL, init?: RequestInit) =>
      this.handle(String(input), init);
  }

  private latest(sessionId: string, frameIndex: number): "pending" | "pass" | "fail" {
    for (let i = this.verdicts.length - 1; i >= 0; i--) {
      const v = this.verdicts[i];
      if (v.session_id === sessionId && v.frame_index === frameIndex) return v.verdict;
    }
    return "pending";
  }

  private queue(status: string): QueueItem[] {
    const items = this.report.flags
      .slice()
      .sort((a, b) =>
        a.session_id === b.session_id
          ? a.frame_index - b.frame_index
          : a.session_id < b.session_id
            ? -1
            : 1,
      )
      .map((flag) => {
        const metric = flag.metric ?? "mae_rpy";
        const series = this.report.frames
          .filter((fr) => fr.session_id === flag.session_id)
          .filter((fr) => Math.abs(fr.frame_index - flag.frame_index) <= 50);
        return {
          ...flag,
          status: this.latest(flag.session_id, flag.frame_index),
          context: {
            metric,
            frames: series.map((fr) => fr.frame_index),
            values: series.map((fr) => fr.quality[metric] ?? fr.cue_errors[metric] ?? null),
          },
        };
      });
    return status === "pending" ? items.filter((i) => i.status === "pending") : items;
  }

  private frameDetail(sessionId: string, frameIndex: number): FrameDetail | null {
    const frame = this.report.frames.find(
      (fr) => fr.session_id === sessionId && fr.frame_index === frameIndex,
    );
    if (!frame) return null;
    return {
      session_id: sessionId,
      frame_index: frameIndex,
      gender_pair: "FM",
      glasses: "none",
      cues: { original: {}, deid: {} },
      cue_errors: frame.cue_errors,
      quality: frame.quality,
      missing_annotations: frame.missing_annotations,
      flags: this.report.flags.filter(
        (f) => f.session_id === sessionId && f.frame_index === frameIndex,
      ),
      status: this.latest(sessionId, frameIndex),
      images: {
        original: `/api/images/${sessionId}/${frameIndex}/original`,
        deid: `/api/images/${sessionId}/${frameIndex}/deid`,
      },
    };
  }

  private calibrate(): { body: unknown; status: number } {
    const latest = new Map<string, "pass" | "fail">();
    for (const v of this.verdicts) latest.set(`${v.session_id}/${v.frame_index}`, v.verdict);
    const labels = new Set(latest.values());
    if (!labels.has("pass") || !labels.has("fail")) {
      return { body: { detail: "need at least one pass and one fail verdict" }, status: 422 };
    }
    const previous: ThresholdConfig = {
      metrics: { ear_err: { lo: 0, hi: 0.06 }, ergas: { lo: 0, hi: 16423.93 } },
      anomaly: { window: 31, z_threshold: 3.5, metrics: ["ergas"] },
      zero_error: { epsilon: 1e-6 },
    };
    const config: ThresholdConfig = JSON.parse(JSON.stringify(previous));
    config.metrics.ear_err.hi = 0.075; // a tightened bound for the diff display
    const result: CalibrationResult = { config, previous };
    return { body: result, status: 200 };
  }

  async handle(url: string, init?: RequestInit): Promise<Response> {
    this.requests.push(`${init?.method ?? "GET"} ${url}`);
    if (this.down) throw new TypeError("fetch failed");
    const parsed = new URL(url, "http://fake");
    const path = parsed.pathname;

    if (path === "/api/queue") {
      return jsonResponse(this.queue(parsed.searchParams.get("status") ?? "pending"));
    }
    const frameMatch = path.match(/^\/api\/frames\/([^/]+)\/(\d+)$/);
    if (frameMatch) {
      const detail = this.frameDetail(decodeURIComponent(frameMatch[1]), Number(frameMatch[2]));
      return detail ? jsonResponse(detail) : jsonResponse({ detail: "unknown frame" }, 404);
    }
    if (path === "/api/verdicts" && init?.method === "POST") {
      const body = JSON.parse(String(init.body)) as VerdictBody;
      if (body.verdict !== "pass" && body.verdict !== "fail") {
        return jsonResponse({ detail: "verdict must be 'pass' or 'fail'" }, 400);
      }
      const flagged = this.report.flags.some(
        (f) => f.session_id === body.session_id && f.frame_index === body.frame_index,
      );
      if (!flagged) return jsonResponse({ detail: "frame is not flagged" }, 404);
      this.verdicts.push(body); // append-only
      return jsonResponse({ ...body, timestamp: "2024-01-01T00:00:00Z" }, 201);
    }
    if (path === "/api/calibrate" && init?.method === "POST") {
      const { body, status } = this.calibrate();
      return jsonResponse(body, status);
    }
    return jsonResponse({ detail: "not found" }, 404);
  }
}

export function fixtureReport(): FixtureReport {
  const frames: FrameFixture[] = [];
  for (let i = 0; i < 6; i++) {
    frames.push({
      session_id: "dup",
      frame_index: i,
      cue_errors: {
        ear_err: 0,
        pc_err: 0,
        lar_err: i === 4 ? null : 0,
        roll_err: 0,
        pitch_err: 0,
        yaw_err: 0,
        mae_rpy: 0,
      },
      quality: { mse: 4 + i, rmse: 2, psnr: 42, uiqi: 0.99, ergas: 1.7 + i / 100, sam: 0.01 },
      missing_annotations: i === 4 ? ["deid_landmarks"] : [],
    });
  }
  const flags: Flag[] = frames.map((fr) => ({
    session_id: "dup",
    frame_index: fr.frame_index,
    reason: "zero_error_suspect",
    metric: null,
    value: 0,
    detail: "6 cue errors all <= 1e-06",
  }));
  flags.push({
    session_id: "spiky",
    frame_index: 7,
    reason: "series_anomaly",
    metric: "ergas",
    value: 6.07,
    detail: "robust z 580",
  });
  frames.push({
    session_id: "spiky",
    frame_index: 7,
    cue_errors: {
      ear_err: 0.04, pc_err: 0.03, lar_err: 0.03,
      roll_err: 1, pitch_err: 1, yaw_err: 1, mae_rpy: 1,
    },
    quality: { mse: 53, rmse: 7.3, psnr: 30.9, uiqi: 0.95, ergas: 6.07, sam: 0.02 },
    missing_annotations: [],
  });
  return { flags, frames };
}
