import { ApiClient, ApiError } from "./api.js";
import {
  QueueState,
  applyVerdictLocally,
  initialState,
  moveCursor,
  reasonOptions,
  selectedItem,
  sessionOptions,
  setItems,
  visibleItems,
} from "./state.js";
import type { FrameDetail } from "./types.js";
import { calibrationDiff, el, renderDetail, renderErrorBanner, renderQueue } from "./views.js";

/**
 * The whole review app.  All state is rebuilt from the API on reload; the
 * only local state is the filter/cursor position.
 */
export class App {
  state: QueueState = initialState();
  reviewer = "reviewer";
  private detailCache = new Map<string, FrameDetail>();
  private connectionError: string | null = null;
  private keyListener = new AbortController();

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
  ) {}

  async init(): Promise<void> {
    document.addEventListener("keydown", (event) => this.onKey(event), {
      signal: this.keyListener.signal,
    });
    await this.reload();
  }

  /** Detach global listeners (a page unload does this implicitly). */
  destroy(): void {
    this.keyListener.abort();
  }

  async reload(): Promise<void> {
    try {
      // always fetch everything; the status filter is applied client-side
      const items = await this.api.getQueue("all");
      setItems(this.state, items);
      if (this.state.cursor < 0 && visibleItems(this.state).length > 0) this.state.cursor = 0;
      this.connectionError = null;
    } catch (err) {
      this.connectionError = err instanceof Error ? err.message : String(err);
    }
    await this.render();
  }

  private async detailFor(sessionId: string, frameIndex: number): Promise<FrameDetail | null> {
    const key = `${sessionId}/${frameIndex}`;
    const cached = this.detailCache.get(key);
    if (cached) return cached;
    try {
      const detail = await this.api.getFrame(sessionId, frameIndex);
      this.detailCache.set(key, detail);
      return detail;
    } catch {
      return null;
    }
  }

  async render(): Promise<void> {
    const { state } = this;
    this.root.replaceChildren();
    this.root.append(this.renderHeader());
    if (this.connectionError !== null) {
      const banner = renderErrorBanner(this.connectionError);
      banner.querySelector("[data-action=retry]")!.addEventListener("click", () => this.reload());
      this.root.append(banner);
      return;
    }

    const visible = visibleItems(state);
    const layout = el("div", { class: "layout" });
    const queue = renderQueue(visible, state.cursor);
    queue.querySelectorAll(".queue-row").forEach((row, i) =>
      row.addEventListener("click", () => {
        state.cursor = i;
        void this.render();
      }),
    );
    layout.append(queue);

    const item = selectedItem(state);
    if (item) {
      const detail = await this.detailFor(item.session_id, item.frame_index);
      layout.append(renderDetail(item, detail, (p) => this.api.imageUrl(p)));
    } else {
      layout.append(el("div", { class: "detail" }, el("div", { class: "empty" }, "nothing selected")));
    }
    this.root.append(layout);
  }

  private renderHeader(): HTMLElement {
    const { filters } = this.state;
    const statusSel = el("select", { "data-role": "status-filter" });
    for (const value of ["pending", "all"]) {
      const opt = el("option", { value }, value) as HTMLOptionElement;
      opt.selected = filters.status === value;
      statusSel.append(opt);
    }
    statusSel.addEventListener("change", () => {
      filters.status = statusSel.value as "pending" | "all";
      this.state.cursor = 0;
      void this.render();
    });

    const reasonSel = el("select", { "data-role": "reason-filter" });
    const sessionSel = el("select", { "data-role": "session-filter" });
    for (const [select, options, current] of [
      [reasonSel, reasonOptions(this.state.items), filters.reason],
      [sessionSel, sessionOptions(this.state.items), filters.session],
    ] as const) {
      const all = el("option", { value: "all" }, "all") as HTMLOptionElement;
      all.selected = current === "all";
      select.append(all);
      for (const value of options) {
        const opt = el("option", { value }, value) as HTMLOptionElement;
        opt.selected = current === value;
        select.append(opt);
      }
    }
    reasonSel.addEventListener("change", () => {
      filters.reason = reasonSel.value;
      this.state.cursor = 0;
      void this.render();
    });
    sessionSel.addEventListener("change", () => {
      filters.session = sessionSel.value;
      this.state.cursor = 0;
      void this.render();
    });

    const reviewerInput = el("input", {
      "data-role": "reviewer",
      value: this.reviewer,
      title: "reviewer name recorded with each verdict",
    }) as HTMLInputElement;
    reviewerInput.addEventListener("change", () => {
      this.reviewer = reviewerInput.value || "reviewer";
    });

    const calibrateBtn = el("button", { "data-role": "calibrate" }, "Calibrate thresholds");
    calibrateBtn.addEventListener("click", () => void this.calibrate());

    return el(
      "header",
      {},
      el("h1", {}, "deid-audit review"),
      el("label", {}, "status ", statusSel),
      el("label", {}, "reason ", reasonSel),
      el("label", {}, "session ", sessionSel),
      el("label", {}, "reviewer ", reviewerInput),
      calibrateBtn,
      el("span", { class: "hint" }, "keys: ↑/↓ select · p pass · f fail"),
      el("div", { class: "toast-area", "data-role": "toasts" }),
    );
  }

  private onKey(event: KeyboardEvent): void {
    if (event.target instanceof HTMLInputElement || event.target instanceof HTMLSelectElement) {
      return;
    }
    switch (event.key) {
      case "ArrowDown":
      case "j":
        moveCursor(this.state, 1);
        void this.render();
        event.preventDefault();
        break;
      case "ArrowUp":
      case "k":
        moveCursor(this.state, -1);
        void this.render();
        event.preventDefault();
        break;
      case "p":
        void this.submitVerdict("pass");
        break;
      case "f":
        void this.submitVerdict("fail");
        break;
    }
  }

  async submitVerdict(verdict: "pass" | "fail"): Promise<void> {
    const item = selectedItem(this.state);
    if (!item) return;
    try {
      await this.api.postVerdict({
        session_id: item.session_id,
        frame_index: item.frame_index,
        verdict,
        reviewer: this.reviewer,
      });
    } catch (err) {
      this.toast(`verdict rejected: ${err instanceof Error ? err.message : err}`, true);
      return;
    }
    // optimistic update confirmed by the API response; cursor stays on the
    // same position, which under the pending filter is the next item
    applyVerdictLocally(this.state, item.session_id, item.frame_index, verdict);
    await this.render();
  }

  async calibrate(): Promise<void> {
    try {
      const result = await this.api.calibrate();
      this.toast(calibrationDiff(result), false);
    } catch (err) {
      if (err instanceof ApiError && err.status === 422) {
        this.toast("need both pass and fail verdicts before calibrating", true);
      } else {
        this.toast(`calibration failed: ${err instanceof Error ? err.message : err}`, true);
      }
    }
  }

  toast(message: string, isError: boolean): void {
    const area = this.root.querySelector("[data-role=toasts]");
    if (!area) return;
    const node = el("div", { class: `toast${isError ? " error" : ""}`, role: "status" }, message);
    area.append(node);
    setTimeout(() => node.remove(), 6000);
  }
}
