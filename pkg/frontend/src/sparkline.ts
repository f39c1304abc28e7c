import type { SeriesContext } from "./types.js";

const W = 520;
const H = 90;
const PAD = 6;

/**
 * Inline SVG of a metric series around a flagged frame.  Gaps (nulls) break
 * the polyline; the flagged frame gets a highlighted marker.
 */
export function sparklineSvg(context: SeriesContext, highlightFrame: number): string {
  const points = context.frames.map((frame, i) => ({ frame, value: context.values[i] }));
  const present = points.filter((p) => p.value !== null) as { frame: number; value: number }[];
  if (present.length === 0) {
    return `<svg width="${W}" height="${H}" role="img"><text x="8" y="20" fill="#8b919c">no ${esc(context.metric)} data</text></svg>`;
  }
  const fMin = points[0].frame;
  const fMax = points[points.length - 1].frame;
  let vMin = Math.min(...present.map((p) => p.value));
  let vMax = Math.max(...present.map((p) => p.value));
  if (vMin === vMax) {
    vMin -= 1;
    vMax += 1;
  }
  const x = (frame: number) =>
    fMax === fMin ? W / 2 : PAD + ((frame - fMin) / (fMax - fMin)) * (W - 2 * PAD);
  const y = (value: number) => H - PAD - ((value - vMin) / (vMax - vMin)) * (H - 2 * PAD);

  const segments: string[] = [];
  let current: string[] = [];
  for (const p of points) {
    if (p.value === null) {
      if (current.length > 1) segments.push(current.join(" "));
      current = [];
    } else {
      current.push(`${x(p.frame).toFixed(1)},${y(p.value).toFixed(1)}`);
    }
  }
  if (current.length > 1) segments.push(current.join(" "));

  const polylines = segments
    .map((pts) => `<polyline fill="none" stroke="#5aa9e6" stroke-width="1.2" points="${pts}"/>`)
    .join("");
  const highlighted = present.find((p) => p.frame === highlightFrame);
  const marker = highlighted
    ? `<circle class="flagged-point" cx="${x(highlighted.frame).toFixed(1)}" cy="${y(highlighted.value).toFixed(1)}" r="4" fill="none" stroke="#e05d5d" stroke-width="2"/>`
    : "";
  return (
    `<svg width="${W}" height="${H}" viewBox="0 0 ${W} ${H}" role="img" aria-label="${esc(context.metric)} series">` +
    polylines +
    marker +
    `</svg>`
  );
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}
