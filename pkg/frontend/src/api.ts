import type { CalibrationResult, FrameDetail, QueueItem, VerdictBody } from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function expectJson<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

/** Thin client over the documented review endpoints; nothing else. */
export class ApiClient {
  constructor(private base: string = "") {}

  private url(path: string): string {
    return this.base + path;
  }

  async getQueue(status: "pending" | "all" = "all"): Promise<QueueItem[]> {
    return expectJson(await fetch(this.url(`/api/queue?status=${status}`)));
  }

  async getFrame(sessionId: string, frameIndex: number): Promise<FrameDetail> {
    return expectJson(
      await fetch(this.url(`/api/frames/${encodeURIComponent(sessionId)}/${frameIndex}`)),
    );
  }

  async postVerdict(body: VerdictBody): Promise<unknown> {
    return expectJson(
      await fetch(this.url("/api/verdicts"), {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
      }),
    );
  }

  async calibrate(): Promise<CalibrationResult> {
    return expectJson(await fetch(this.url("/api/calibrate"), { method: "POST" }));
  }

  imageUrl(path: string): string {
    return this.url(path);
  }
}
