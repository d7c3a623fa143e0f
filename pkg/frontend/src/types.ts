/** Record shapes mirroring the engine's JSONL schemas, exchanged as JSON. */

export interface PathSample {
  frame: number;
  px: number;
  py: number;
}

export interface BoxRecord {
  path_id: string;
  frame: number;
  x: number;
  y: number;
  w: number;
  h: number;
}

export type TrajectorySource =
  | "detected"
  | "interpolated"
  | "extrapolated"
  | "supervised";

export interface TrajectoryRecord extends BoxRecord {
  source: TrajectorySource;
}

export interface DetectionRecord {
  id: string;
  frame: number;
  x: number;
  y: number;
  w: number;
  h: number;
  score: number;
}

export interface SessionInfo {
  id: string;
  fps: number;
  n_frames: number;
}

export interface TrajectoryPayload {
  revision: number;
  records: TrajectoryRecord[];
}
