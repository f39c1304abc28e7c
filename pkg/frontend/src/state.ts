import type { QueueItem, VerdictStatus } from "./types.js";

export interface Filters {
  status: "pending" | "all";
  reason: string | "all";
  session: string | "all";
}

export interface QueueState {
  items: QueueItem[];
  filters: Filters;
  /** index into visibleItems(); -1 when nothing is selectable */
  cursor: number;
}

export function initialState(): QueueState {
  return {
    items: [],
    filters: { status: "pending", reason: "all", session: "all" },
    cursor: -1,
  };
}

export function visibleItems(state: QueueState): QueueItem[] {
  return state.items.filter((item) => {
    if (state.filters.status === "pending" && item.status !== "pending") return false;
    if (state.filters.reason !== "all" && item.reason !== state.filters.reason) return false;
    if (state.filters.session !== "all" && item.session_id !== state.filters.session) return false;
    return true;
  });
}

export function selectedItem(state: QueueState): QueueItem | null {
  const visible = visibleItems(state);
  return state.cursor >= 0 && state.cursor < visible.length ? visible[state.cursor] : null;
}

export function clampCursor(state: QueueState): void {
  const count = visibleItems(state).length;
  if (count === 0) state.cursor = -1;
  else state.cursor = Math.min(Math.max(state.cursor, 0), count - 1);
}

export function moveCursor(state: QueueState, delta: number): void {
  const count = visibleItems(state).length;
  if (count === 0) {
    state.cursor = -1;
    return;
  }
  const base = state.cursor < 0 ? 0 : state.cursor + delta;
  state.cursor = Math.min(Math.max(base, 0), count - 1);
}

export function setItems(state: QueueState, items: QueueItem[]): void {
  state.items = items;
  clampCursor(state);
}

/** Mark every flag of a frame; the queue has one row per flag. */
export function applyVerdictLocally(
  state: QueueState,
  sessionId: string,
  frameIndex: number,
  status: VerdictStatus,
): void {
  for (const item of state.items) {
    if (item.session_id === sessionId && item.frame_index === frameIndex) {
      item.status = status;
    }
  }
  clampCursor(state);
}

export function reasonOptions(items: QueueItem[]): string[] {
  return [...new Set(items.map((i) => i.reason))].sort();
}

export function sessionOptions(items: QueueItem[]): string[] {
  return [...new Set(items.map((i) => i.session_id))].sort();
}
