/** Wire types of the review API. */

export type VerdictStatus = "pending" | "pass" | "fail";

export interface SeriesContext {
  metric: string;
  frames: number[];
  values: (number | null)[];
}

export interface QueueItem {
  session_id: string;
  frame_index: number;
  reason: string;
  metric: string | null;
  value: number | null;
  detail: string;
  status: VerdictStatus;
  context: SeriesContext | null;
}

export interface FrameDetail {
  session_id: string;
  frame_index: number;
  gender_pair: string;
  glasses: string;
  cues: {
    original: Record<string, number | null>;
    deid: Record<string, number | null>;
  };
  cue_errors: Record<string, number | null>;
  quality: Record<string, number | null>;
  missing_annotations: string[];
  flags: Omit<QueueItem, "status" | "context">[];
  status: VerdictStatus;
  images: { original: string; deid: string };
}

export interface VerdictBody {
  session_id: string;
  frame_index: number;
  verdict: "pass" | "fail";
  reviewer: string;
  reason?: string;
}

export interface MetricRange {
  lo: number | null;
  hi: number | null;
}

export interface ThresholdConfig {
  metrics: Record<string, MetricRange>;
  anomaly: { window: number; z_threshold: number; metrics: string[] };
  zero_error: { epsilon: number };
}

export interface CalibrationResult {
  config: ThresholdConfig;
  previous: ThresholdConfig;
}
