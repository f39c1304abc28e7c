import { sparklineSvg } from "./sparkline.js";
import type { CalibrationResult, FrameDetail, QueueItem } from "./types.js";

const CUE_ERROR_LABELS: [string, string][] = [
  ["ear_err", "EAR"],
  ["pc_err", "Pupil circ."],
  ["lar_err", "LAR"],
  ["roll_err", "Roll"],
  ["pitch_err", "Pitch"],
  ["yaw_err", "Yaw"],
  ["mae_rpy", "MAE RPY"],
];

const QUALITY_LABELS: [string, string][] = [
  ["mse", "MSE"],
  ["rmse", "RMSE"],
  ["psnr", "PSNR"],
  ["uiqi", "UIQI"],
  ["ergas", "ERGAS"],
  ["sam", "SAM"],
];

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  node.append(...children);
  return node;
}

function fmt(value: number | null | undefined): string {
  if (value === null || value === undefined) return "—";
  if (value === 0) return "0";
  const abs = Math.abs(value);
  if (abs >= 1000 || abs < 0.001) return value.toExponential(3);
  return value.toPrecision(4);
}

export function renderQueueRow(item: QueueItem, selected: boolean): HTMLElement {
  const row = el(
    "div",
    {
      class: `queue-row${selected ? " selected" : ""}`,
      "data-session": item.session_id,
      "data-frame": String(item.frame_index),
      role: "option",
    },
    el("span", { class: "frame" }, `${item.session_id} #${item.frame_index}`),
    el("span", { class: `badge ${item.reason}` }, item.reason),
  );
  if (item.metric) row.append(el("span", { class: "muted" }, item.metric));
  row.append(el("span", { class: `status-${item.status}` }, item.status));
  return row;
}

export function renderQueue(items: QueueItem[], cursor: number): HTMLElement {
  const list = el("div", { class: "queue", role: "listbox", "aria-label": "review queue" });
  if (items.length === 0) {
    list.append(el("div", { class: "empty" }, "queue is clear"));
    return list;
  }
  items.forEach((item, i) => list.append(renderQueueRow(item, i === cursor)));
  return list;
}

function metricsTable(
  labels: [string, string][],
  values: Record<string, number | null>,
  violations: Set<string>,
): HTMLElement {
  const head = el("tr", {}, el("th", {}, "metric"), el("th", {}, "value"));
  const table = el("table", { class: "metrics" }, head);
  for (const [key, label] of labels) {
    const value = values[key];
    const cls = value === null || value === undefined ? "gap" : violations.has(key) ? "violation" : "";
    table.append(
      el("tr", {}, el("th", {}, label), el("td", { class: cls }, fmt(value))),
    );
  }
  return table;
}

export function renderDetail(
  item: QueueItem,
  detail: FrameDetail | null,
  imageUrl: (path: string) => string,
): HTMLElement {
  const pane = el("div", { class: "detail" });
  pane.append(
    el("h2", {}, `${item.session_id} · frame ${item.frame_index}`),
    el("p", { class: "muted" }, `${item.reason}${item.metric ? ` on ${item.metric}` : ""} — ${item.detail}`),
  );
  if (detail === null) {
    pane.append(el("div", { class: "placeholder" }, "frame evidence unavailable"));
    return pane;
  }

  const figures = el("div", { class: "images" });
  for (const [variant, label] of [
    ["original", "original"],
    ["deid", "de-identified"],
  ] as const) {
    const img = el("img", { alt: `${label} frame` }) as HTMLImageElement;
    img.src = imageUrl(detail.images[variant]);
    img.onerror = () => {
      img.replaceWith(el("div", { class: "placeholder" }, `${label} image missing`));
    };
    figures.append(el("figure", {}, img, el("figcaption", {}, label)));
  }
  pane.append(figures);

  if (detail.missing_annotations.length > 0) {
    pane.append(
      el("p", { class: "muted" }, `missing annotations: ${detail.missing_annotations.join(", ")}`),
    );
  }

  const violations = new Set(detail.flags.map((f) => f.metric).filter(Boolean) as string[]);
  pane.append(
    el("h3", {}, "cue errors"),
    metricsTable(CUE_ERROR_LABELS, detail.cue_errors, violations),
    el("h3", {}, "image quality"),
    metricsTable(QUALITY_LABELS, detail.quality, violations),
  );

  if (item.context) {
    const spark = el("div", { class: "sparkline" });
    spark.innerHTML = sparklineSvg(item.context, item.frame_index);
    pane.append(el("h3", {}, `${item.context.metric} around this frame`), spark);
  }
  return pane;
}

export function calibrationDiff(result: CalibrationResult): string {
  const lines: string[] = [];
  for (const [name, next] of Object.entries(result.config.metrics)) {
    const prev = result.previous.metrics[name];
    if (!prev || (prev.lo === next.lo && prev.hi === next.hi)) continue;
    lines.push(`${name}: [${fmt(prev.lo)}, ${fmt(prev.hi)}] → [${fmt(next.lo)}, ${fmt(next.hi)}]`);
  }
  return lines.length > 0 ? `thresholds updated\n${lines.join("\n")}` : "no thresholds changed";
}

export function renderErrorBanner(message: string): HTMLElement {
  const banner = el("div", { class: "banner", role: "alert" });
  banner.append(
    el("span", {}, `API unreachable: ${message}`),
    el("button", { "data-action": "retry" }, "Retry"),
  );
  return banner;
}
